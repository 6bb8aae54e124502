// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#include "ffsal/nn.hpp"

#include <cmath>
#include <string>

#include "ffsal/error.hpp"

namespace ffsal {
namespace {

void check_input(const DenseLayer& layer, Eigen::Index n) {
  if (static_cast<std::size_t>(n) != layer.in_dim()) {
    throw Error(Errc::DimMismatch, "layer expects " + std::to_string(layer.in_dim()) +
                                       " inputs, got " + std::to_string(n));
  }
}

}  // namespace

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim)
    : weights(WeightMatrix::Zero(static_cast<Eigen::Index>(out_dim),
                                 static_cast<Eigen::Index>(in_dim))),
      bias(Eigen::VectorXf::Zero(static_cast<Eigen::Index>(out_dim))) {}

bool DenseLayer::operator==(const DenseLayer& other) const {
  return weights.rows() == other.weights.rows() && weights.cols() == other.weights.cols() &&
         bias.size() == other.bias.size() && weights == other.weights && bias == other.bias;
}

void FfModel::validate() const {
  if (layers.empty()) throw Error(Errc::DimChainBroken, "model has no layers");
  if (!(theta > 0.0f) || !std::isfinite(theta)) {
    throw Error(Errc::InvalidArgument, "theta must be finite and > 0");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const DenseLayer& layer = layers[k];
    if (layer.in_dim() == 0 || layer.out_dim() == 0 ||
        static_cast<std::size_t>(layer.bias.size()) != layer.out_dim()) {
      throw Error(Errc::DimChainBroken, "layer " + std::to_string(k) + " has degenerate shape");
    }
    if (k > 0 && layers[k - 1].out_dim() != layer.in_dim()) {
      throw Error(Errc::DimChainBroken, "layer " + std::to_string(k - 1) + " emits " +
                                            std::to_string(layers[k - 1].out_dim()) +
                                            " but layer " + std::to_string(k) + " takes " +
                                            std::to_string(layer.in_dim()));
    }
  }
}

bool FfModel::operator==(const FfModel& other) const {
  return theta == other.theta && normalize_hidden == other.normalize_hidden &&
         normalize_input == other.normalize_input && layers == other.layers;
}

Eigen::VectorXd to_vector(std::span<const float> values) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out[static_cast<Eigen::Index>(i)] = values[i];
  return out;
}

Eigen::VectorXd forward_layer(const DenseLayer& layer, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_input(layer, x.size());
  const Eigen::Index out = layer.weights.rows();
  const Eigen::Index in = layer.weights.cols();
  Eigen::VectorXd y(out);
  for (Eigen::Index j = 0; j < out; ++j) {
    const float* row = layer.weights.data() + j * in;
    double acc = layer.bias[j];
    for (Eigen::Index i = 0; i < in; ++i) acc += static_cast<double>(row[i]) * x[i];
    y[j] = acc > 0.0 ? acc : 0.0;
  }
  return y;
}

Eigen::VectorXd l2_normalize(const Eigen::Ref<const Eigen::VectorXd>& x, double epsilon) {
  double sq = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) sq += x[i] * x[i];
  if (sq == 0.0) return x;
  return x / (std::sqrt(sq) + epsilon);
}

double goodness(const Eigen::Ref<const Eigen::VectorXd>& y) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) sum += y[i] * y[i];
  return sum;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double positive_probability(double g, double theta) { return sigmoid(g - theta); }

Eigen::VectorXd run_layers(const FfModel& model, std::size_t upto,
                           const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (upto >= model.layers.size()) {
    throw Error(Errc::InvalidArgument, "run_layers: layer " + std::to_string(upto) +
                                           " out of range for " +
                                           std::to_string(model.layers.size()) + " layers");
  }
  Eigen::VectorXd y = forward_layer(model.layers[0], x);
  for (std::size_t k = 1; k <= upto; ++k) {
    y = forward_layer(model.layers[k], model.normalize_hidden ? l2_normalize(y) : y);
  }
  return y;
}

std::vector<double> layer_goodness(const FfModel& model,
                                   const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::vector<double> out;
  out.reserve(model.layers.size());
  Eigen::VectorXd y = x;
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    if (k > 0 && model.normalize_hidden) y = l2_normalize(y);
    y = forward_layer(model.layers[k], y);
    out.push_back(goodness(y));
  }
  return out;
}

RowMatrixD forward_layer_batch(const DenseLayer& layer, const RowMatrixD& x) {
  check_input(layer, x.cols());
  RowMatrixD z = x * layer.weights.cast<double>().transpose();
  z.rowwise() += layer.bias.cast<double>().transpose();
  return z.cwiseMax(0.0);
}

void l2_normalize_rows(RowMatrixD& x, double epsilon) {
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double sq = x.row(r).squaredNorm();
    if (sq != 0.0) x.row(r) /= std::sqrt(sq) + epsilon;
  }
}

Eigen::VectorXd goodness_rows(const RowMatrixD& y) { return y.rowwise().squaredNorm(); }

RowMatrixD layer_input_batch(const FfModel& model, std::size_t layer_index, const RowMatrixD& x) {
  if (layer_index >= model.layers.size()) {
    throw Error(Errc::InvalidArgument, "layer index out of range");
  }
  RowMatrixD h = x;
  for (std::size_t k = 0; k < layer_index; ++k) {
    h = forward_layer_batch(model.layers[k], h);
    if (model.normalize_hidden) l2_normalize_rows(h);
  }
  return h;
}

Eigen::MatrixXd layer_goodness_batch(const FfModel& model, const RowMatrixD& x) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(model.layers.size()));
  RowMatrixD h = x;
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    if (k > 0 && model.normalize_hidden) l2_normalize_rows(h);
    h = forward_layer_batch(model.layers[k], h);
    out.col(static_cast<Eigen::Index>(k)) = goodness_rows(h);
  }
  return out;
}

}  // namespace ffsal
