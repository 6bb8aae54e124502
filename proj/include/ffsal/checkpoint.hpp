// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

// FFMLP1 checkpoint format. All integers and floats are little-endian.
//
//   magic            6 bytes  "FFMLP1"
//   format_version   u16      1
//   theta            f32
//   normalization    u8       bit 0: normalize_hidden, bit 1: normalize_input
//   layer_count      u16
//   per layer:       in_dim u32, out_dim u32,
//                    weights f32[out_dim * in_dim] row-major, bias f32[out_dim]
//   config echo:     seed u64, epochs_per_layer u32, batch_size u32,
//                    learning_rate f64, num_classes u16, optimizer u8,
//                    rng_algorithm u8, flags u8 (bit 0: raw_logits, bit 1: no_bias)
//   crc32            u32      over every preceding byte
//
// Nothing time- or host-dependent is stored, so equal inputs give equal bytes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ffsal/ff_train.hpp"
#include "ffsal/nn.hpp"

namespace ffsal {

inline constexpr char kCheckpointMagic[6] = {'F', 'F', 'M', 'L', 'P', '1'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct ConfigEcho {
  std::uint64_t seed = 0;
  std::uint32_t epochs_per_layer = 0;
  std::uint32_t batch_size = 0;
  double learning_rate = 0.0;
  std::uint16_t num_classes = 0;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::uint8_t rng_algorithm = 0;
  bool raw_logits = false;
  bool use_bias = true;

  static ConfigEcho from(const TrainConfig& config);
  bool operator==(const ConfigEcho&) const = default;
};

struct Checkpoint {
  FfModel model;
  ConfigEcho config;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_checkpoint(const FfModel& model, const ConfigEcho& config);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

/// Writes to a sibling temporary file and renames it into place.
void save_checkpoint(const FfModel& model, const TrainConfig& config,
                     const std::filesystem::path& path);
void save_checkpoint(const FfModel& model, const ConfigEcho& config,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Writes `bytes` to a temporary sibling of `path`, then renames.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace ffsal
