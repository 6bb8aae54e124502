// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#include "ffsal/idx.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "ffsal/error.hpp"
#include "ffsal/rng.hpp"

namespace ffsal {

__extension__ using u128 = unsigned __int128;
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  out.push_back(static_cast<std::uint8_t>(value >> 24));
  out.push_back(static_cast<std::uint8_t>(value >> 16));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
  out.push_back(static_cast<std::uint8_t>(value));
}

void check_magic(std::uint32_t magic, std::uint32_t expected, const char* what) {
  if (magic != expected) {
    throw Error(Errc::WrongMagic, std::string("not an IDX ") + what + " file (magic " +
                                      std::to_string(magic) + ", expected " +
                                      std::to_string(expected) + ")");
  }
}

}  // namespace

ImageSet parse_idx_images(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 4) check_magic(read_be32(bytes, 0), kIdxImagesMagic, "images");
  if (bytes.size() < 16) {
    throw Error(Errc::TruncatedFile,
                "image header needs 16 bytes, got " + std::to_string(bytes.size()));
  }
  const std::uint64_t count = read_be32(bytes, 4);
  const std::uint64_t rows = read_be32(bytes, 8);
  const std::uint64_t cols = read_be32(bytes, 12);
  if (rows == 0 || cols == 0) {
    throw Error(Errc::InvalidArgument, "image dimensions must be positive");
  }
  // count * rows * cols can exceed 64 bits for hostile headers.
  const u128 expected =
      static_cast<u128>(count) * rows * cols + 16;
  if (expected != bytes.size()) {
    throw Error(Errc::TruncatedFile, "images payload length " + std::to_string(bytes.size()) +
                                         " does not match header");
  }

  ImageSet out;
  out.count = count;
  out.rows = rows;
  out.cols = cols;
  out.pixels.resize(bytes.size() - 16);
  std::transform(bytes.begin() + 16, bytes.end(), out.pixels.begin(),
                 [](std::uint8_t b) { return static_cast<float>(b) / 255.0f; });
  return out;
}

LabelSet parse_idx_labels(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 4) check_magic(read_be32(bytes, 0), kIdxLabelsMagic, "labels");
  if (bytes.size() < 8) {
    throw Error(Errc::TruncatedFile,
                "label header needs 8 bytes, got " + std::to_string(bytes.size()));
  }
  const std::uint64_t count = read_be32(bytes, 4);
  if (count + 8 != bytes.size()) {
    throw Error(Errc::TruncatedFile, "labels payload length " + std::to_string(bytes.size()) +
                                         " does not match count " + std::to_string(count));
  }
  LabelSet out;
  out.count = count;
  out.labels.assign(bytes.begin() + 8, bytes.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx_images(const ImageSet& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kIdxImagesMagic);
  write_be32(out, static_cast<std::uint32_t>(images.count));
  write_be32(out, static_cast<std::uint32_t>(images.rows));
  write_be32(out, static_cast<std::uint32_t>(images.cols));
  for (float p : images.pixels) {
    out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(p, 0.0f, 1.0f) * 255.0f)));
  }
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(const LabelSet& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.labels.size());
  write_be32(out, kIdxLabelsMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.count));
  out.insert(out.end(), labels.labels.begin(), labels.labels.end());
  return out;
}

std::vector<std::uint8_t> maybe_gunzip(std::vector<std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 0x1F || bytes[1] != 0x8B) return bytes;

  z_stream stream{};
  if (inflateInit2(&stream, 16 + MAX_WBITS) != Z_OK) {
    throw Error(Errc::IoError, "zlib initialization failed");
  }
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> chunk(1 << 20);
  stream.next_in = bytes.data();
  stream.avail_in = static_cast<uInt>(bytes.size());
  int status = Z_OK;
  while (status != Z_STREAM_END) {
    stream.next_out = chunk.data();
    stream.avail_out = static_cast<uInt>(chunk.size());
    status = inflate(&stream, Z_NO_FLUSH);
    if (status != Z_OK && status != Z_STREAM_END) {
      inflateEnd(&stream);
      throw Error(Errc::TruncatedFile, "corrupt or truncated gzip stream");
    }
    out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - stream.avail_out));
    if (status == Z_OK && stream.avail_in == 0 && stream.avail_out != 0) {
      inflateEnd(&stream);
      throw Error(Errc::TruncatedFile, "gzip stream ended early");
    }
  }
  inflateEnd(&stream);
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::IoError, "read failed for " + path.string());
  return bytes;
}

Dataset make_dataset(ImageSet images, LabelSet labels, int num_classes) {
  if (num_classes < 2) {
    throw Error(Errc::InvalidArgument, "num_classes must be >= 2");
  }
  if (images.count != labels.count) {
    throw Error(Errc::CountMismatch, std::to_string(images.count) + " images vs " +
                                         std::to_string(labels.count) + " labels");
  }
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    if (labels.labels[i] >= num_classes) {
      throw Error(Errc::LabelOutOfRange, "label " + std::to_string(labels.labels[i]) +
                                             " at index " + std::to_string(i) + " >= " +
                                             std::to_string(num_classes));
    }
  }
  return Dataset{std::move(images), std::move(labels), num_classes};
}

Dataset load_dataset(const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path, int num_classes) {
  ImageSet images = parse_idx_images(maybe_gunzip(read_file_bytes(images_path)));
  LabelSet labels = parse_idx_labels(maybe_gunzip(read_file_bytes(labels_path)));
  return make_dataset(std::move(images), std::move(labels), num_classes);
}

Dataset load_mnist_split(const std::filesystem::path& dir, Split split, int num_classes) {
  const std::string prefix = split == Split::Train ? "train" : "t10k";
  auto resolve = [&](const std::string& name) {
    std::filesystem::path plain = dir / name;
    if (std::filesystem::exists(plain)) return plain;
    std::filesystem::path gz = dir / (name + ".gz");
    if (std::filesystem::exists(gz)) return gz;
    throw Error(Errc::IoError, "missing " + plain.string() + " (or .gz)");
  };
  return load_dataset(resolve(prefix + "-images-idx3-ubyte"),
                      resolve(prefix + "-labels-idx1-ubyte"), num_classes);
}

Dataset take_prefix(const Dataset& dataset, std::size_t n) {
  n = std::min(n, dataset.size());
  Dataset out;
  out.num_classes = dataset.num_classes;
  out.images.count = n;
  out.images.rows = dataset.images.rows;
  out.images.cols = dataset.images.cols;
  out.images.pixels.assign(dataset.images.pixels.begin(),
                           dataset.images.pixels.begin() + n * dataset.input_dim());
  out.labels.count = n;
  out.labels.labels.assign(dataset.labels.labels.begin(), dataset.labels.labels.begin() + n);
  return out;
}

std::vector<std::size_t> epoch_permutation(std::size_t count, std::uint64_t seed,
                                           std::uint64_t epoch) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Xoshiro256 rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::Shuffle), epoch}));
  // Fisher-Yates, high to low.
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = rng.uniform_below(i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

BatchIterator::BatchIterator(const Dataset& dataset, std::size_t batch_size, std::uint64_t seed,
                             std::uint64_t epoch)
    : dataset_(&dataset),
      batch_size_(batch_size),
      order_(epoch_permutation(dataset.size(), seed, epoch)) {
  if (batch_size == 0) throw Error(Errc::InvalidArgument, "batch_size must be >= 1");
}

std::size_t BatchIterator::batch_count() const noexcept {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

std::optional<Batch> BatchIterator::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  const std::size_t end = std::min(order_.size(), cursor_ + batch_size_);
  const std::size_t dim = dataset_->input_dim();
  Batch batch;
  batch.indices.assign(order_.begin() + cursor_, order_.begin() + end);
  batch.images.resize(batch.indices.size() * dim);
  batch.labels.reserve(batch.indices.size());
  for (std::size_t k = 0; k < batch.indices.size(); ++k) {
    auto src = dataset_->image(batch.indices[k]);
    std::copy(src.begin(), src.end(), batch.images.begin() + k * dim);
    batch.labels.push_back(dataset_->label(batch.indices[k]));
  }
  cursor_ = end;
  return batch;
}

std::vector<Batch> batch_iter(const Dataset& dataset, std::size_t batch_size, std::uint64_t seed,
                              std::uint64_t epoch) {
  BatchIterator it(dataset, batch_size, seed, epoch);
  std::vector<Batch> out;
  out.reserve(it.batch_count());
  while (auto batch = it.next()) out.push_back(std::move(*batch));
  return out;
}

}  // namespace ffsal
