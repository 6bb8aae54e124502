// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

// Greedy layer-wise Forward-Forward training.
//
// Positive samples carry the true class one-hot in the first C pixels,
// negative samples a uniformly drawn wrong class. Each layer is trained in
// turn to push the goodness of positive inputs above theta and of negative
// inputs below it, while every earlier layer stays frozen. Classification
// embeds each candidate class and picks the one with the largest summed
// goodness.

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ffsal/idx.hpp"
#include "ffsal/nn.hpp"
#include "ffsal/optimizer.hpp"
#include "ffsal/rng.hpp"

namespace ffsal {

struct TrainConfig {
  std::size_t epochs_per_layer = 60;
  std::size_t batch_size = 128;
  double learning_rate = 0.003;
  float theta = 2.0f;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden_dims{500, 500};
  int num_classes = 10;
  OptimizerKind optimizer = OptimizerKind::Adam;
  bool normalize_hidden = true;
  bool normalize_input = true;
  bool use_bias = true;
  // Use bare goodness as the loss logits instead of goodness - theta.
  bool raw_logits = false;

  void validate() const;
};

struct PredictOptions {
  // Leave layer 0 out of the goodness sum.
  bool skip_first_layer = false;
};

struct GoodnessPair {
  double g_pos = 0.0;
  double g_neg = 0.0;
};

struct LocalGradient {
  GradientUpdate update;
  double loss = 0.0;
};

struct LossTrace {
  std::vector<std::vector<double>> per_layer;  // [layer][epoch] mean loss
};

/// Optional progress hooks; any member may be empty.
struct TrainObserver {
  std::function<void(std::size_t layer, std::size_t epoch, std::size_t batch, double loss)> on_batch;
  std::function<void(std::size_t layer, std::size_t epoch, double mean_loss)> on_epoch;
  std::function<void(std::size_t layer, const FfModel& model)> on_layer_done;
};

std::vector<float> embed_label(std::span<const float> image, int label, int num_classes);
void embed_label_inplace(std::span<float> image, int label, int num_classes);

/// The vector fed to layer 0 for `image` carrying `label`: the embedded image,
/// L2-normalized when the model normalizes its input.
Eigen::VectorXd model_input(const FfModel& model, std::span<const float> image, int label,
                            int num_classes);

/// Uniform over the num_classes - 1 classes different from true_class.
int sample_negative_label(int true_class, int num_classes, Xoshiro256& rng);

/// log(1 + e^x) without overflow.
double softplus(double x);

/// 1/2 (softplus(-(g_pos - theta)) + softplus(g_neg - theta)).
double ff_loss(const GoodnessPair& pair, double theta);

/// Gradient of ff_loss with respect to one layer's W and b for a single
/// (positive, negative) input pair, inputs held constant.
LocalGradient local_gradient(const DenseLayer& layer, const Eigen::Ref<const Eigen::VectorXd>& x_pos,
                             const Eigen::Ref<const Eigen::VectorXd>& x_neg, double theta);

/// Mean over rows of the single-pair gradient; row k of x_pos pairs with row
/// k of x_neg. The loss is the batch mean as well.
LocalGradient local_gradient_batch(const DenseLayer& layer, const RowMatrixD& x_pos,
                                   const RowMatrixD& x_neg, double theta);

/// Fan-based uniform initialization, biases zero.
FfModel init_model(std::size_t input_dim, const TrainConfig& config);

/// Negative labels drawn for every sample of one (layer, epoch) phase, in
/// dataset index order, so batch size does not change them.
std::vector<int> draw_negative_labels(const Dataset& dataset, std::uint64_t seed,
                                      std::size_t layer, std::size_t epoch);

/// Trains layer `layer_index` for config.epochs_per_layer epochs and returns
/// the per-epoch mean loss. Other layers are left untouched.
std::vector<double> train_layer(FfModel& model, std::size_t layer_index, const Dataset& dataset,
                                const TrainConfig& config, const TrainObserver& observer = {});

struct TrainResult {
  FfModel model;
  LossTrace trace;
};

TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const TrainObserver& observer = {});

struct Prediction {
  int label = 0;
  std::vector<double> scores;
};

/// Index of the largest score; ties resolve to the lowest index.
int argmax_lowest(std::span<const double> scores);

/// Summed goodness of `image` with `label` embedded.
double label_score(const FfModel& model, std::span<const float> image, int label, int num_classes,
                   const PredictOptions& options = {});

/// label_score for every candidate label.
std::vector<double> class_scores(const FfModel& model, std::span<const float> image,
                                 int num_classes, const PredictOptions& options = {});

Prediction predict(const FfModel& model, std::span<const float> image, int num_classes,
                   const PredictOptions& options = {});

/// class_scores for `count` images laid out back to back; returns count x C.
Eigen::MatrixXd class_scores_batch(const FfModel& model, std::span<const float> images,
                                   std::size_t count, int num_classes,
                                   const PredictOptions& options = {});

/// Fraction of samples whose prediction equals the label.
double evaluate(const FfModel& model, const Dataset& dataset, const PredictOptions& options = {});

}  // namespace ffsal
