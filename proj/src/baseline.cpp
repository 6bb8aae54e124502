// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#include "ffsal/baseline.hpp"

#include <cmath>
#include <string>

#include "ffsal/error.hpp"
#include "ffsal/rng.hpp"

namespace ffsal {
namespace {

constexpr std::uint64_t kBaselineStream = 0x4241'5345'4c49'4e45ULL;

DenseLayer glorot_layer(std::size_t in, std::size_t out, Xoshiro256& rng) {
  DenseLayer layer(in, out);
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  for (Eigen::Index j = 0; j < layer.weights.rows(); ++j) {
    for (Eigen::Index i = 0; i < layer.weights.cols(); ++i) {
      layer.weights(j, i) = static_cast<float>(-bound + 2.0 * bound * rng.uniform01());
    }
  }
  return layer;
}

RowMatrixD linear(const DenseLayer& layer, const RowMatrixD& x) {
  if (static_cast<std::size_t>(x.cols()) != layer.in_dim()) {
    throw Error(Errc::DimMismatch, "baseline layer input width mismatch");
  }
  RowMatrixD z = x * layer.weights.cast<double>().transpose();
  z.rowwise() += layer.bias.cast<double>().transpose();
  return z;
}

}  // namespace

MlpModel init_mlp(std::size_t input_dim, std::span<const std::size_t> hidden_dims, int num_classes,
                  std::uint64_t seed) {
  Xoshiro256 rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::Init), kBaselineStream}));
  MlpModel model;
  std::size_t in = input_dim;
  for (std::size_t out : hidden_dims) {
    model.hidden.push_back(glorot_layer(in, out, rng));
    in = out;
  }
  model.head = glorot_layer(in, static_cast<std::size_t>(num_classes), rng);
  return model;
}

RowMatrixD mlp_logits(const MlpModel& model, const RowMatrixD& x) {
  RowMatrixD h = x;
  for (const DenseLayer& layer : model.hidden) h = linear(layer, h).cwiseMax(0.0);
  return linear(model.head, h);
}

MlpGradients mlp_loss_and_gradients(const MlpModel& model, const RowMatrixD& x,
                                    std::span<const int> labels) {
  const Eigen::Index n = x.rows();
  if (static_cast<std::size_t>(n) != labels.size() || n == 0) {
    throw Error(Errc::DimMismatch, "need one label per row");
  }
  // Forward, keeping every layer's input.
  std::vector<RowMatrixD> inputs;
  inputs.reserve(model.hidden.size() + 1);
  inputs.push_back(x);
  for (const DenseLayer& layer : model.hidden) {
    inputs.push_back(linear(layer, inputs.back()).cwiseMax(0.0));
  }
  RowMatrixD logits = linear(model.head, inputs.back());

  // Softmax cross-entropy; d(loss)/d(logits) = (p - onehot) / n.
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  RowMatrixD delta(n, logits.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const int label = labels[static_cast<std::size_t>(r)];
    if (label < 0 || label >= logits.cols()) {
      throw Error(Errc::ClassOutOfRange, "label " + std::to_string(label));
    }
    const double max = logits.row(r).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(r).array() - max).exp().matrix();
    const double sum = e.sum();
    loss += std::log(sum) - (logits(r, label) - max);
    delta.row(r) = e / sum;
    delta(r, label) -= 1.0;
  }
  delta *= inv_n;

  MlpGradients grads;
  grads.loss = loss * inv_n;
  grads.head.dW = delta.transpose() * inputs.back();
  grads.head.db = delta.colwise().sum().transpose();
  RowMatrixD upstream = delta * model.head.weights.cast<double>();

  grads.hidden.resize(model.hidden.size());
  for (std::size_t k = model.hidden.size(); k-- > 0;) {
    // inputs[k + 1] is this layer's ReLU output; the gate is open where it is > 0.
    const RowMatrixD dz = (inputs[k + 1].array() > 0.0).select(upstream, 0.0);
    grads.hidden[k].dW = dz.transpose() * inputs[k];
    grads.hidden[k].db = dz.colwise().sum().transpose();
    if (k > 0) upstream = dz * model.hidden[k].weights.cast<double>();
  }
  return grads;
}

double mlp_evaluate(const MlpModel& model, const Dataset& dataset) {
  if (dataset.size() == 0) throw Error(Errc::EmptyEvalSet, "cannot evaluate on zero samples");
  constexpr std::size_t kChunk = 1024;
  const std::size_t dim = dataset.input_dim();
  std::size_t correct = 0;
  for (std::size_t start = 0; start < dataset.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, dataset.size() - start);
    RowMatrixD x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < n; ++i) {
      auto image = dataset.image(start + i);
      for (std::size_t p = 0; p < dim; ++p) {
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = image[p];
      }
    }
    const RowMatrixD logits = mlp_logits(model, x);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::RowVectorXd row = logits.row(static_cast<Eigen::Index>(i));
      if (argmax_lowest(std::span<const double>(row.data(), static_cast<std::size_t>(row.size()))) ==
          dataset.label(start + i)) {
        ++correct;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

BaselineResult train_backprop_baseline(const Dataset& train_set, const Dataset& eval_set,
                                       const TrainConfig& config, double learning_rate) {
  config.validate();
  if (!(learning_rate > 0.0)) throw Error(Errc::InvalidArgument, "learning_rate must be > 0");
  BaselineResult result;
  result.model = init_mlp(train_set.input_dim(), config.hidden_dims, train_set.num_classes,
                          config.seed);
  MlpModel& model = result.model;

  std::vector<LayerOptimizer> hidden_opt;
  for (const DenseLayer& layer : model.hidden) {
    hidden_opt.emplace_back(config.optimizer, learning_rate, layer, config.use_bias);
  }
  LayerOptimizer head_opt(config.optimizer, learning_rate, model.head, config.use_bias);

  const auto dim = static_cast<Eigen::Index>(train_set.input_dim());
  for (std::size_t epoch = 0; epoch < config.epochs_per_layer; ++epoch) {
    BatchIterator batches(train_set, config.batch_size, config.seed, epoch);
    double loss_sum = 0.0;
    while (auto batch = batches.next()) {
      const auto n = static_cast<Eigen::Index>(batch->indices.size());
      const RowMatrixD x = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                                          Eigen::RowMajor>>(batch->images.data(), n, dim)
                               .cast<double>();
      const MlpGradients grads = mlp_loss_and_gradients(model, x, batch->labels);
      for (std::size_t k = 0; k < model.hidden.size(); ++k) {
        hidden_opt[k].step(model.hidden[k], grads.hidden[k]);
      }
      head_opt.step(model.head, grads.head);
      loss_sum += grads.loss * static_cast<double>(n);
    }
    result.epoch_losses.push_back(loss_sum / static_cast<double>(train_set.size()));
  }
  result.accuracy = mlp_evaluate(model, eval_set);
  return result;
}

}  // namespace ffsal
