// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

// Dense ReLU layers, the goodness measure and the layer-stack forward pass.
//
// Parameters are stored as f32; every dot product, norm and goodness sum is
// accumulated in f64. Single-sample functions use plain loops; the *_batch
// variants use Eigen GEMM over row-per-sample matrices and are what training
// and evaluation run on.

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

namespace ffsal {

using WeightMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kNormEpsilon = 1e-8;

struct DenseLayer {
  WeightMatrix weights;  // out_dim x in_dim
  Eigen::VectorXf bias;  // out_dim

  DenseLayer() = default;
  DenseLayer(std::size_t in_dim, std::size_t out_dim);

  std::size_t in_dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  std::size_t out_dim() const noexcept { return static_cast<std::size_t>(weights.rows()); }

  bool operator==(const DenseLayer& other) const;
};

struct FfModel {
  std::vector<DenseLayer> layers;
  float theta = 2.0f;
  bool normalize_hidden = true;
  // L2-normalize the label-embedded input before layer 0 (see model_input()).
  bool normalize_input = true;

  std::size_t input_dim() const noexcept { return layers.empty() ? 0 : layers.front().in_dim(); }

  /// Throws DimChainBroken / InvalidArgument when the invariants do not hold.
  void validate() const;

  bool operator==(const FfModel& other) const;
};

Eigen::VectorXd to_vector(std::span<const float> values);

/// y = ReLU(W x + b).
Eigen::VectorXd forward_layer(const DenseLayer& layer, const Eigen::Ref<const Eigen::VectorXd>& x);

/// x / (||x||_2 + epsilon); the zero vector maps to itself.
Eigen::VectorXd l2_normalize(const Eigen::Ref<const Eigen::VectorXd>& x,
                             double epsilon = kNormEpsilon);

/// Sum of squared activities.
double goodness(const Eigen::Ref<const Eigen::VectorXd>& y);

/// Logistic sigma(g - theta), stable for large |g - theta|.
double positive_probability(double g, double theta);

/// Logistic function, stable on both tails.
double sigmoid(double x);

/// Raw (un-normalized) activations of layer `upto` after running layers
/// 0..upto. Inputs to layers after the first are L2-normalized when the model
/// asks for it.
Eigen::VectorXd run_layers(const FfModel& model, std::size_t upto,
                           const Eigen::Ref<const Eigen::VectorXd>& x);

/// Goodness of every layer's raw activations for one prepared input.
std::vector<double> layer_goodness(const FfModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

// Batched forms. Rows are samples.
RowMatrixD forward_layer_batch(const DenseLayer& layer, const RowMatrixD& x);
void l2_normalize_rows(RowMatrixD& x, double epsilon = kNormEpsilon);
Eigen::VectorXd goodness_rows(const RowMatrixD& y);

/// Input to layer `layer_index` for every row of `x`, i.e. the (normalized)
/// output of layer_index - 1, or `x` itself for layer 0.
RowMatrixD layer_input_batch(const FfModel& model, std::size_t layer_index, const RowMatrixD& x);

/// N x layer_count matrix of per-layer goodness.
Eigen::MatrixXd layer_goodness_batch(const FfModel& model, const RowMatrixD& x);

}  // namespace ffsal
