// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace ffsal {

/// Identifier written into checkpoints. Bump when the generator or any
/// derived-stream rule changes so old runs are not silently "reproduced".
inline constexpr std::uint8_t kRngAlgorithmId = 1;  // xoshiro256** seeded via splitmix64
inline constexpr const char* kRngAlgorithmName = "xoshiro256**/splitmix64 v1";

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Mixes a root seed with a list of stream tags into an independent sub-seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept;

// Stream tags for the independent random streams used during training.
enum class Stream : std::uint64_t {
  Shuffle = 0x5348'5546'464c'4531ULL,
  NegativeLabel = 0x4e45'4741'5449'5645ULL,
  Init = 0x494e'4954'5741'4954ULL,
};

class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;

  /// Unbiased integer in [0, bound); bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace ffsal
