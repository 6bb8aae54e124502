// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

// IDX (MNIST-style) image/label parsing, dataset assembly and seeded
// minibatch iteration.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace ffsal {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;  // 2049

struct ImageSet {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> pixels;  // count * rows * cols, row-major per image, in [0, 1]

  std::size_t pixels_per_image() const noexcept { return rows * cols; }
  std::span<const float> image(std::size_t i) const noexcept {
    return {pixels.data() + i * pixels_per_image(), pixels_per_image()};
  }
  bool operator==(const ImageSet&) const = default;
};

struct LabelSet {
  std::size_t count = 0;
  std::vector<std::uint8_t> labels;

  bool operator==(const LabelSet&) const = default;
};

struct Dataset {
  ImageSet images;
  LabelSet labels;
  int num_classes = 0;

  std::size_t size() const noexcept { return images.count; }
  std::size_t input_dim() const noexcept { return images.pixels_per_image(); }
  std::span<const float> image(std::size_t i) const noexcept { return images.image(i); }
  int label(std::size_t i) const noexcept { return labels.labels[i]; }
};

ImageSet parse_idx_images(std::span<const std::uint8_t> bytes);
LabelSet parse_idx_labels(std::span<const std::uint8_t> bytes);

/// Inverse of the parsers; pixels are mapped back with round(p * 255).
std::vector<std::uint8_t> serialize_idx_images(const ImageSet& images);
std::vector<std::uint8_t> serialize_idx_labels(const LabelSet& labels);

/// Inflates gzip input (detected by the 0x1F 0x8B prefix); any other input is
/// returned unchanged.
std::vector<std::uint8_t> maybe_gunzip(std::vector<std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// Binds images and labels into a Dataset after checking counts and label range.
Dataset make_dataset(ImageSet images, LabelSet labels, int num_classes);

Dataset load_dataset(const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path, int num_classes);

enum class Split { Train, Test };

/// Resolves the canonical MNIST file names inside `dir`, preferring the
/// uncompressed file and falling back to `<name>.gz`.
Dataset load_mnist_split(const std::filesystem::path& dir, Split split, int num_classes = 10);

/// First `n` samples (or all, if n >= size).
Dataset take_prefix(const Dataset& dataset, std::size_t n);

struct Batch {
  std::vector<std::size_t> indices;
  std::vector<float> images;  // indices.size() * input_dim, row-major
  std::vector<int> labels;
};

/// The shuffled visiting order for one epoch; a pure function of (seed, epoch).
std::vector<std::size_t> epoch_permutation(std::size_t count, std::uint64_t seed,
                                           std::uint64_t epoch);

/// One shuffled pass over a dataset in minibatches. The final short batch is
/// kept. The dataset must outlive the iterator.
class BatchIterator {
 public:
  BatchIterator(const Dataset& dataset, std::size_t batch_size, std::uint64_t seed,
                std::uint64_t epoch);

  std::optional<Batch> next();
  std::size_t batch_count() const noexcept;
  const std::vector<std::size_t>& order() const noexcept { return order_; }

 private:
  const Dataset* dataset_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// Materializes every batch of one epoch.
std::vector<Batch> batch_iter(const Dataset& dataset, std::size_t batch_size, std::uint64_t seed,
                              std::uint64_t epoch);

}  // namespace ffsal
