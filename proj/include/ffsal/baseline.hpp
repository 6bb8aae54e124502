// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

// Conventional MLP trained end to end with backpropagation, used as the
// comparison point for Forward-Forward accuracy. Same hidden shape, ReLU
// hidden units, softmax head, mean cross-entropy.

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ffsal/ff_train.hpp"
#include "ffsal/idx.hpp"
#include "ffsal/nn.hpp"
#include "ffsal/optimizer.hpp"

namespace ffsal {

inline constexpr double kBaselineLearningRate = 1e-3;

struct MlpModel {
  std::vector<DenseLayer> hidden;
  DenseLayer head;  // linear, no ReLU
};

struct MlpGradients {
  std::vector<GradientUpdate> hidden;
  GradientUpdate head;
  double loss = 0.0;
};

MlpModel init_mlp(std::size_t input_dim, std::span<const std::size_t> hidden_dims, int num_classes,
                  std::uint64_t seed);

/// N x C pre-softmax scores.
RowMatrixD mlp_logits(const MlpModel& model, const RowMatrixD& x);

/// Mean softmax cross-entropy over the rows of x and its exact gradient.
MlpGradients mlp_loss_and_gradients(const MlpModel& model, const RowMatrixD& x,
                                    std::span<const int> labels);

double mlp_evaluate(const MlpModel& model, const Dataset& dataset);

struct BaselineResult {
  MlpModel model;
  double accuracy = 0.0;  // on the evaluation set
  std::vector<double> epoch_losses;
};

/// Trains for config.epochs_per_layer epochs with config's batch size, seed,
/// hidden sizes and optimizer, at `learning_rate`.
BaselineResult train_backprop_baseline(const Dataset& train_set, const Dataset& eval_set,
                                       const TrainConfig& config,
                                       double learning_rate = kBaselineLearningRate);

}  // namespace ffsal
