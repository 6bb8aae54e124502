// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#include "ffsal/saliency.hpp"

#include <algorithm>
#include <string>

#include "ffsal/error.hpp"

namespace ffsal {
namespace {

SaliencyMap empty_map(std::size_t rows, std::size_t cols, SaliencyMode mode, double baseline) {
  SaliencyMap map;
  map.height = rows;
  map.width = cols;
  map.values.assign(rows * cols, std::nullopt);
  map.baseline = baseline;
  map.mode = mode;
  return map;
}

}  // namespace

void OcclusionSpec::validate() const {
  if (filter_size < 1 || filter_size % 2 == 0) {
    throw Error(Errc::InvalidArgument, "filter size must be odd and >= 1");
  }
  if (stride < 1) throw Error(Errc::InvalidArgument, "stride must be >= 1");
}

std::vector<float> occlude(std::span<const float> image, std::size_t rows, std::size_t cols,
                           std::size_t row, std::size_t col, int filter_size) {
  if (image.size() != rows * cols) {
    throw Error(Errc::DimMismatch, "image is not " + std::to_string(rows) + "x" +
                                       std::to_string(cols));
  }
  if (row >= rows || col >= cols) {
    throw Error(Errc::CenterOutOfBounds, "centre (" + std::to_string(row) + ", " +
                                             std::to_string(col) + ") outside image");
  }
  if (filter_size < 1) throw Error(Errc::InvalidArgument, "filter size must be >= 1");
  const auto half = static_cast<std::size_t>(filter_size / 2);
  const std::size_t r0 = row >= half ? row - half : 0;
  const std::size_t c0 = col >= half ? col - half : 0;
  const std::size_t r1 = std::min(rows - 1, row + half);
  const std::size_t c1 = std::min(cols - 1, col + half);

  std::vector<float> out(image.begin(), image.end());
  for (std::size_t r = r0; r <= r1; ++r) {
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(r * cols + c0),
              out.begin() + static_cast<std::ptrdiff_t>(r * cols + c1 + 1), 0.0f);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> filter_centers(std::size_t rows, std::size_t cols,
                                                                int stride) {
  if (stride < 1) throw Error(Errc::InvalidArgument, "stride must be >= 1");
  const auto step = static_cast<std::size_t>(stride);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t r = 0; r < rows; r += step) {
    for (std::size_t c = 0; c < cols; c += step) out.emplace_back(r, c);
  }
  return out;
}

Dataset capped_eval_set(const Dataset& eval_set, const OcclusionSpec& spec) {
  return spec.eval_cap == 0 ? eval_set : take_prefix(eval_set, spec.eval_cap);
}

SaliencyMap ads_dataset(const FfModel& model, const Dataset& eval_set, const OcclusionSpec& spec,
                        const PredictOptions& options) {
  spec.validate();
  if (spec.mode != SaliencyMode::DatasetAccuracy) {
    throw Error(Errc::InvalidArgument, "ads_dataset needs dataset-accuracy mode");
  }
  if (eval_set.size() == 0) throw Error(Errc::EmptyEvalSet, "no evaluation samples");

  const Dataset subset = capped_eval_set(eval_set, spec);
  const std::size_t rows = subset.images.rows;
  const std::size_t cols = subset.images.cols;
  const std::size_t dim = subset.input_dim();
  const double baseline = evaluate(model, subset, options);
  SaliencyMap map = empty_map(rows, cols, spec.mode, baseline);

  Dataset occluded = subset;
  for (const auto& [r, c] : filter_centers(rows, cols, spec.stride)) {
    for (std::size_t i = 0; i < subset.size(); ++i) {
      const std::vector<float> image = occlude(subset.image(i), rows, cols, r, c, spec.filter_size);
      std::copy(image.begin(), image.end(), occluded.images.pixels.begin() +
                                                static_cast<std::ptrdiff_t>(i * dim));
    }
    map.values[r * cols + c] = baseline - evaluate(model, occluded, options);
  }
  return map;
}

SaliencyMap ads_image(const FfModel& model, std::span<const float> image, std::size_t rows,
                      std::size_t cols, int true_class, int num_classes, const OcclusionSpec& spec,
                      const PredictOptions& options) {
  spec.validate();
  if (spec.mode != SaliencyMode::ImageGoodness) {
    throw Error(Errc::InvalidArgument, "ads_image needs image-goodness mode");
  }
  if (true_class < 0 || true_class >= num_classes) {
    throw Error(Errc::ClassOutOfRange, "class " + std::to_string(true_class));
  }
  auto score = [&](std::span<const float> img) {
    return label_score(model, img, true_class, num_classes, options);
  };
  const double baseline = score(image);
  SaliencyMap map = empty_map(rows, cols, spec.mode, baseline);
  for (const auto& [r, c] : filter_centers(rows, cols, spec.stride)) {
    map.values[r * cols + c] = baseline - score(occlude(image, rows, cols, r, c, spec.filter_size));
  }
  return map;
}

SaliencyMap normalize_map(const SaliencyMap& map) {
  SaliencyMap out = map;
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const auto& v : map.values) {
    if (!v) continue;
    if (!any) {
      lo = hi = *v;
      any = true;
    } else {
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  }
  for (auto& v : out.values) {
    if (!v) continue;
    v = hi == lo ? 0.0 : (*v - lo) / (hi - lo);
  }
  return out;
}

}  // namespace ffsal
