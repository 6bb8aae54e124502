// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#include "ffsal/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <system_error>

#include "ffsal/error.hpp"
#include "ffsal/idx.hpp"
#include "ffsal/rng.hpp"

namespace ffsal {
namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* data, std::size_t n) { out_.insert(out_.end(), data, data + n); }
  std::vector<std::uint8_t> take() { return std::move(out_); }
  std::span<const std::uint8_t> view() const { return out_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::uint64_t le(int n) {
    if (remaining() < static_cast<std::size_t>(n)) {
      throw Error(Errc::TruncatedFile, "checkpoint payload ends early");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

constexpr std::size_t kHeaderBytes = 6 + 2;
constexpr std::size_t kCrcBytes = 4;

}  // namespace

ConfigEcho ConfigEcho::from(const TrainConfig& config) {
  ConfigEcho echo;
  echo.seed = config.seed;
  echo.epochs_per_layer = static_cast<std::uint32_t>(config.epochs_per_layer);
  echo.batch_size = static_cast<std::uint32_t>(config.batch_size);
  echo.learning_rate = config.learning_rate;
  echo.num_classes = static_cast<std::uint16_t>(config.num_classes);
  echo.optimizer = config.optimizer;
  echo.rng_algorithm = kRngAlgorithmId;
  echo.raw_logits = config.raw_logits;
  echo.use_bias = config.use_bias;
  return echo;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_checkpoint(const FfModel& model, const ConfigEcho& config) {
  model.validate();
  Writer w;
  w.raw(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u16(kCheckpointVersion);
  w.f32(model.theta);
  w.u8(static_cast<std::uint8_t>((model.normalize_hidden ? 1 : 0) | (model.normalize_input ? 2 : 0)));
  w.u16(static_cast<std::uint16_t>(model.layers.size()));
  for (const DenseLayer& layer : model.layers) {
    w.u32(static_cast<std::uint32_t>(layer.in_dim()));
    w.u32(static_cast<std::uint32_t>(layer.out_dim()));
    for (Eigen::Index j = 0; j < layer.weights.rows(); ++j) {
      for (Eigen::Index i = 0; i < layer.weights.cols(); ++i) w.f32(layer.weights(j, i));
    }
    for (Eigen::Index j = 0; j < layer.bias.size(); ++j) w.f32(layer.bias[j]);
  }
  w.u64(config.seed);
  w.u32(config.epochs_per_layer);
  w.u32(config.batch_size);
  w.f64(config.learning_rate);
  w.u16(config.num_classes);
  w.u8(static_cast<std::uint8_t>(config.optimizer));
  w.u8(config.rng_algorithm);
  w.u8(static_cast<std::uint8_t>((config.raw_logits ? 1 : 0) | (config.use_bias ? 0 : 2)));
  w.u32(crc32_of(w.view()));
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kCheckpointMagic ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0) {
    throw Error(Errc::BadMagic, "not an FFMLP1 checkpoint");
  }
  if (bytes.size() < kHeaderBytes + kCrcBytes) {
    throw Error(Errc::TruncatedFile, "checkpoint shorter than its header");
  }
  const auto version = static_cast<std::uint16_t>(bytes[6] | (bytes[7] << 8));
  if (version != kCheckpointVersion) {
    throw Error(Errc::UnsupportedVersion, "checkpoint version " + std::to_string(version) +
                                              ", this reader supports " +
                                              std::to_string(kCheckpointVersion));
  }
  const auto payload = bytes.first(bytes.size() - kCrcBytes);
  Reader crc_reader(bytes.last(kCrcBytes));
  const std::uint32_t stored = crc_reader.u32();
  if (crc32_of(payload) != stored) throw Error(Errc::CrcMismatch, "checkpoint is corrupt");

  Reader r(payload.subspan(kHeaderBytes));
  Checkpoint ck;
  ck.model.theta = r.f32();
  const std::uint8_t norm = r.u8();
  ck.model.normalize_hidden = (norm & 1) != 0;
  ck.model.normalize_input = (norm & 2) != 0;
  const std::uint16_t layer_count = r.u16();
  for (std::uint16_t k = 0; k < layer_count; ++k) {
    const std::uint32_t in = r.u32();
    const std::uint32_t out = r.u32();
    if (in == 0 || out == 0) throw Error(Errc::DimChainBroken, "zero-sized layer");
    if (!ck.model.layers.empty() && ck.model.layers.back().out_dim() != in) {
      throw Error(Errc::DimChainBroken, "layer " + std::to_string(k) + " input " +
                                            std::to_string(in) + " does not match previous output " +
                                            std::to_string(ck.model.layers.back().out_dim()));
    }
    const std::uint64_t floats = std::uint64_t{in} * out + out;
    if (floats * 4 > r.remaining()) throw Error(Errc::TruncatedFile, "layer data ends early");
    DenseLayer layer(in, out);
    for (Eigen::Index j = 0; j < layer.weights.rows(); ++j) {
      for (Eigen::Index i = 0; i < layer.weights.cols(); ++i) layer.weights(j, i) = r.f32();
    }
    for (Eigen::Index j = 0; j < layer.bias.size(); ++j) layer.bias[j] = r.f32();
    ck.model.layers.push_back(std::move(layer));
  }
  ck.config.seed = r.u64();
  ck.config.epochs_per_layer = r.u32();
  ck.config.batch_size = r.u32();
  ck.config.learning_rate = r.f64();
  ck.config.num_classes = r.u16();
  const std::uint8_t optimizer = r.u8();
  if (optimizer > static_cast<std::uint8_t>(OptimizerKind::Adam)) {
    throw Error(Errc::InvalidArgument, "unknown optimizer id " + std::to_string(optimizer));
  }
  ck.config.optimizer = static_cast<OptimizerKind>(optimizer);
  ck.config.rng_algorithm = r.u8();
  const std::uint8_t flags = r.u8();
  ck.config.raw_logits = (flags & 1) != 0;
  ck.config.use_bias = (flags & 2) == 0;
  if (r.remaining() != 0) throw Error(Errc::TruncatedFile, "trailing bytes after config echo");
  ck.model.validate();
  return ck;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error(Errc::IoError, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(Errc::IoError, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

void save_checkpoint(const FfModel& model, const ConfigEcho& config,
                     const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(model, config));
}

void save_checkpoint(const FfModel& model, const TrainConfig& config,
                     const std::filesystem::path& path) {
  save_checkpoint(model, ConfigEcho::from(config), path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace ffsal
