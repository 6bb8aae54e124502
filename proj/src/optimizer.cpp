// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#include "ffsal/optimizer.hpp"

#include <cmath>
#include <string>

#include "ffsal/error.hpp"

namespace ffsal {

std::string_view optimizer_name(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "sgd") return OptimizerKind::Sgd;
  throw Error(Errc::InvalidArgument, "unknown optimizer '" + std::string(name) + "'");
}

LayerOptimizer::LayerOptimizer(OptimizerKind kind, double learning_rate, const DenseLayer& layer,
                               bool update_bias)
    : kind_(kind), lr_(learning_rate), update_bias_(update_bias) {
  if (kind_ == OptimizerKind::Adam) {
    m_w_ = RowMatrixD::Zero(layer.weights.rows(), layer.weights.cols());
    v_w_ = m_w_;
    m_b_ = Eigen::VectorXd::Zero(layer.bias.size());
    v_b_ = m_b_;
  }
}

void LayerOptimizer::step(DenseLayer& layer, const GradientUpdate& grad) {
  if (grad.dW.rows() != layer.weights.rows() || grad.dW.cols() != layer.weights.cols() ||
      grad.db.size() != layer.bias.size()) {
    throw Error(Errc::DimMismatch, "gradient shape does not match layer");
  }
  ++t_;
  if (kind_ == OptimizerKind::Sgd) {
    layer.weights = (layer.weights.cast<double>() - lr_ * grad.dW).cast<float>();
    if (update_bias_) layer.bias = (layer.bias.cast<double>() - lr_ * grad.db).cast<float>();
    return;
  }

  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  m_w_ = kBeta1 * m_w_ + (1.0 - kBeta1) * grad.dW;
  v_w_ = kBeta2 * v_w_ + (1.0 - kBeta2) * grad.dW.cwiseAbs2();
  layer.weights =
      (layer.weights.cast<double>().array() -
       lr_ * (m_w_.array() / c1) / ((v_w_.array() / c2).sqrt() + kEpsilon))
          .matrix()
          .cast<float>();
  if (update_bias_) {
    m_b_ = kBeta1 * m_b_ + (1.0 - kBeta1) * grad.db;
    v_b_ = kBeta2 * v_b_ + (1.0 - kBeta2) * grad.db.cwiseAbs2();
    layer.bias = (layer.bias.cast<double>().array() -
                  lr_ * (m_b_.array() / c1) / ((v_b_.array() / c2).sqrt() + kEpsilon))
                     .matrix()
                     .cast<float>();
  }
}

}  // namespace ffsal
