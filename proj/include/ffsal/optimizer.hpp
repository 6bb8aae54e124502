// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string_view>

#include "ffsal/nn.hpp"

namespace ffsal {

enum class OptimizerKind : std::uint8_t { Sgd = 0, Adam = 1 };

std::string_view optimizer_name(OptimizerKind kind) noexcept;
/// Parses "sgd" / "adam"; throws InvalidArgument otherwise.
OptimizerKind parse_optimizer(std::string_view name);

struct GradientUpdate {
  RowMatrixD dW;
  Eigen::VectorXd db;
};

/// Per-layer parameter update rule. Moments are kept in f64; the stored f32
/// parameters are rounded once per step.
class LayerOptimizer {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  LayerOptimizer(OptimizerKind kind, double learning_rate, const DenseLayer& layer,
                 bool update_bias = true);

  void step(DenseLayer& layer, const GradientUpdate& grad);

  std::uint64_t steps() const noexcept { return t_; }

 private:
  OptimizerKind kind_;
  double lr_;
  bool update_bias_;
  std::uint64_t t_ = 0;
  RowMatrixD m_w_, v_w_;
  Eigen::VectorXd m_b_, v_b_;
};

}  // namespace ffsal
