// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

// Occlusion saliency for goodness-based classifiers: a k x k zeroing window is
// centred on each pixel of a stride grid and the drop in model performance is
// recorded at that centre. No gradients are involved, so the model is only
// ever run forward.
//
// Occlusion is applied to the raw image; prediction embeds the label code
// afterwards, so windows over the label pixels never destroy the label.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ffsal/ff_train.hpp"
#include "ffsal/idx.hpp"
#include "ffsal/nn.hpp"

namespace ffsal {

enum class SaliencyMode : std::uint8_t {
  DatasetAccuracy,  // baseline accuracy - occluded accuracy over an evaluation set
  ImageGoodness,    // true-class score - occluded true-class score for one image
};

struct OcclusionSpec {
  int filter_size = 3;  // odd
  int stride = 1;
  SaliencyMode mode = SaliencyMode::DatasetAccuracy;
  std::size_t eval_cap = 1000;  // dataset mode only; 0 = no cap

  void validate() const;
};

struct SaliencyMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::optional<double>> values;  // row-major; nullopt = centre not on the grid
  double baseline = 0.0;
  SaliencyMode mode = SaliencyMode::DatasetAccuracy;

  const std::optional<double>& at(std::size_t row, std::size_t col) const {
    return values[row * width + col];
  }
};

/// Copy of `image` with the window of size k centred at (row, col) zeroed,
/// clipped at the image border.
std::vector<float> occlude(std::span<const float> image, std::size_t rows, std::size_t cols,
                           std::size_t row, std::size_t col, int filter_size);

/// Centres visited for a stride: every (r, c) with r % stride == 0 and c % stride == 0.
std::vector<std::pair<std::size_t, std::size_t>> filter_centers(std::size_t rows, std::size_t cols,
                                                                int stride);

/// The evaluation subset actually used by ads_dataset (first eval_cap samples).
Dataset capped_eval_set(const Dataset& eval_set, const OcclusionSpec& spec);

SaliencyMap ads_dataset(const FfModel& model, const Dataset& eval_set, const OcclusionSpec& spec,
                        const PredictOptions& options = {});

SaliencyMap ads_image(const FfModel& model, std::span<const float> image, std::size_t rows,
                      std::size_t cols, int true_class, int num_classes, const OcclusionSpec& spec,
                      const PredictOptions& options = {});

/// Rescales present values affinely onto [0, 1]; a constant map becomes 0.
SaliencyMap normalize_map(const SaliencyMap& map);

}  // namespace ffsal
