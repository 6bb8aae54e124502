// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#include "ffsal/ff_train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ffsal/error.hpp"

namespace ffsal {
namespace {

constexpr std::size_t kScoreChunk = 256;  // images per scoring GEMM

void check_class(int label, int num_classes) {
  if (label < 0 || label >= num_classes) {
    throw Error(Errc::ClassOutOfRange, "class " + std::to_string(label) + " not in [0, " +
                                           std::to_string(num_classes) + ")");
  }
}

void copy_embedded_row(RowMatrixD& dst, Eigen::Index row, std::span<const float> image, int label,
                       int num_classes) {
  for (std::size_t i = 0; i < image.size(); ++i) {
    dst(row, static_cast<Eigen::Index>(i)) = image[i];
  }
  for (int c = 0; c < num_classes; ++c) dst(row, c) = c == label ? 1.0 : 0.0;
}

double included_sum(const Eigen::Ref<const Eigen::RowVectorXd>& per_layer,
                    const PredictOptions& options) {
  double sum = 0.0;
  for (Eigen::Index k = options.skip_first_layer ? 1 : 0; k < per_layer.size(); ++k) {
    sum += per_layer[k];
  }
  return sum;
}

void check_predict_options(const FfModel& model, const PredictOptions& options) {
  if (options.skip_first_layer && model.layers.size() < 2) {
    throw Error(Errc::InvalidArgument, "skipping layer 0 needs a model with at least two layers");
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error(Errc::InvalidArgument, "batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(Errc::InvalidArgument, "learning_rate must be > 0");
  }
  if (!(theta > 0.0f) || !std::isfinite(theta)) {
    throw Error(Errc::InvalidArgument, "theta must be > 0");
  }
  if (num_classes < 2) throw Error(Errc::InvalidArgument, "num_classes must be >= 2");
  if (hidden_dims.empty()) throw Error(Errc::InvalidArgument, "need at least one hidden layer");
  for (std::size_t d : hidden_dims) {
    if (d == 0) throw Error(Errc::InvalidArgument, "hidden sizes must be positive");
  }
}

void embed_label_inplace(std::span<float> image, int label, int num_classes) {
  check_class(label, num_classes);
  if (image.size() < static_cast<std::size_t>(num_classes)) {
    throw Error(Errc::DimMismatch, "image shorter than the label code");
  }
  std::fill(image.begin(), image.begin() + num_classes, 0.0f);
  image[static_cast<std::size_t>(label)] = 1.0f;
}

std::vector<float> embed_label(std::span<const float> image, int label, int num_classes) {
  std::vector<float> out(image.begin(), image.end());
  embed_label_inplace(out, label, num_classes);
  return out;
}

Eigen::VectorXd model_input(const FfModel& model, std::span<const float> image, int label,
                            int num_classes) {
  Eigen::VectorXd x = to_vector(embed_label(image, label, num_classes));
  return model.normalize_input ? l2_normalize(x) : x;
}

int sample_negative_label(int true_class, int num_classes, Xoshiro256& rng) {
  check_class(true_class, num_classes);
  const auto draw = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(num_classes - 1)));
  return draw >= true_class ? draw + 1 : draw;
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double ff_loss(const GoodnessPair& pair, double theta) {
  return 0.5 * (softplus(-(pair.g_pos - theta)) + softplus(pair.g_neg - theta));
}

LocalGradient local_gradient(const DenseLayer& layer, const Eigen::Ref<const Eigen::VectorXd>& x_pos,
                             const Eigen::Ref<const Eigen::VectorXd>& x_neg, double theta) {
  const Eigen::VectorXd y_pos = forward_layer(layer, x_pos);
  const Eigen::VectorXd y_neg = forward_layer(layer, x_neg);
  const GoodnessPair pair{goodness(y_pos), goodness(y_neg)};

  const double dg_pos = -0.5 * sigmoid(theta - pair.g_pos);
  const double dg_neg = 0.5 * sigmoid(pair.g_neg - theta);
  // dg/dy_j = 2 y_j, and y_j is already zero wherever the ReLU gate is closed.
  const Eigen::VectorXd delta_pos = (2.0 * dg_pos) * y_pos;
  const Eigen::VectorXd delta_neg = (2.0 * dg_neg) * y_neg;

  LocalGradient out;
  out.update.dW = delta_pos * x_pos.transpose() + delta_neg * x_neg.transpose();
  out.update.db = delta_pos + delta_neg;
  out.loss = ff_loss(pair, theta);
  return out;
}

LocalGradient local_gradient_batch(const DenseLayer& layer, const RowMatrixD& x_pos,
                                   const RowMatrixD& x_neg, double theta) {
  if (x_pos.rows() != x_neg.rows() || x_pos.cols() != x_neg.cols()) {
    throw Error(Errc::DimMismatch, "positive and negative batches differ in shape");
  }
  const Eigen::Index n = x_pos.rows();
  if (n == 0) throw Error(Errc::InvalidArgument, "empty batch");

  RowMatrixD x(2 * n, x_pos.cols());
  x.topRows(n) = x_pos;
  x.bottomRows(n) = x_neg;
  RowMatrixD y = forward_layer_batch(layer, x);
  const Eigen::VectorXd g = goodness_rows(y);

  const double inv_n = 1.0 / static_cast<double>(n);
  double loss_sum = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double g_pos = g[k];
    const double g_neg = g[n + k];
    loss_sum += ff_loss({g_pos, g_neg}, theta);
    y.row(k) *= 2.0 * (-0.5 * sigmoid(theta - g_pos)) * inv_n;
    y.row(n + k) *= 2.0 * (0.5 * sigmoid(g_neg - theta)) * inv_n;
  }

  LocalGradient out;
  out.update.dW = y.transpose() * x;
  out.update.db = y.colwise().sum().transpose();
  out.loss = loss_sum * inv_n;
  return out;
}

FfModel init_model(std::size_t input_dim, const TrainConfig& config) {
  config.validate();
  if (input_dim < static_cast<std::size_t>(config.num_classes)) {
    throw Error(Errc::DimMismatch, "input is too small to carry the label code");
  }
  FfModel model;
  model.theta = config.theta;
  model.normalize_hidden = config.normalize_hidden;
  model.normalize_input = config.normalize_input;
  Xoshiro256 rng(derive_seed(config.seed, {static_cast<std::uint64_t>(Stream::Init)}));
  std::size_t in = input_dim;
  for (std::size_t out : config.hidden_dims) {
    DenseLayer layer(in, out);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (Eigen::Index j = 0; j < layer.weights.rows(); ++j) {
      for (Eigen::Index i = 0; i < layer.weights.cols(); ++i) {
        layer.weights(j, i) = static_cast<float>(-bound + 2.0 * bound * rng.uniform01());
      }
    }
    model.layers.push_back(std::move(layer));
    in = out;
  }
  return model;
}

std::vector<int> draw_negative_labels(const Dataset& dataset, std::uint64_t seed,
                                      std::size_t layer, std::size_t epoch) {
  Xoshiro256 rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::NegativeLabel), layer, epoch}));
  std::vector<int> out(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out[i] = sample_negative_label(dataset.label(i), dataset.num_classes, rng);
  }
  return out;
}

std::vector<double> train_layer(FfModel& model, std::size_t layer_index, const Dataset& dataset,
                                const TrainConfig& config, const TrainObserver& observer) {
  config.validate();
  model.validate();
  if (layer_index >= model.layers.size()) {
    throw Error(Errc::InvalidArgument, "no layer " + std::to_string(layer_index));
  }
  if (dataset.input_dim() != model.input_dim()) {
    throw Error(Errc::DimMismatch, "dataset has " + std::to_string(dataset.input_dim()) +
                                       " pixels, model expects " +
                                       std::to_string(model.input_dim()));
  }
  std::vector<double> epoch_losses;
  if (config.epochs_per_layer == 0) return epoch_losses;
  if (dataset.size() == 0) throw Error(Errc::InvalidArgument, "empty training set");

  const double theta = config.raw_logits ? 0.0 : static_cast<double>(model.theta);
  const int num_classes = dataset.num_classes;
  DenseLayer& layer = model.layers[layer_index];
  LayerOptimizer optimizer(config.optimizer, config.learning_rate, layer, config.use_bias);

  for (std::size_t epoch = 0; epoch < config.epochs_per_layer; ++epoch) {
    const std::vector<int> negatives = draw_negative_labels(dataset, config.seed, layer_index, epoch);
    BatchIterator batches(dataset, config.batch_size, config.seed, epoch);
    double loss_sum = 0.0;
    std::size_t batch_number = 0;
    while (auto batch = batches.next()) {
      const auto n = static_cast<Eigen::Index>(batch->indices.size());
      RowMatrixD x_pos(n, static_cast<Eigen::Index>(dataset.input_dim()));
      RowMatrixD x_neg(n, x_pos.cols());
      for (Eigen::Index k = 0; k < n; ++k) {
        const std::size_t idx = batch->indices[static_cast<std::size_t>(k)];
        copy_embedded_row(x_pos, k, dataset.image(idx), dataset.label(idx), num_classes);
        copy_embedded_row(x_neg, k, dataset.image(idx), negatives[idx], num_classes);
      }
      if (model.normalize_input) {
        l2_normalize_rows(x_pos);
        l2_normalize_rows(x_neg);
      }
      const LocalGradient grad =
          local_gradient_batch(layer, layer_input_batch(model, layer_index, x_pos),
                               layer_input_batch(model, layer_index, x_neg), theta);
      optimizer.step(layer, grad.update);
      loss_sum += grad.loss * static_cast<double>(n);
      if (observer.on_batch) observer.on_batch(layer_index, epoch, batch_number, grad.loss);
      ++batch_number;
    }
    const double mean = loss_sum / static_cast<double>(dataset.size());
    epoch_losses.push_back(mean);
    if (observer.on_epoch) observer.on_epoch(layer_index, epoch, mean);
  }
  return epoch_losses;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config, const TrainObserver& observer) {
  if (dataset.num_classes != config.num_classes) {
    throw Error(Errc::InvalidArgument, "dataset and config disagree on the class count");
  }
  TrainResult result{init_model(dataset.input_dim(), config), {}};
  for (std::size_t l = 0; l < result.model.layers.size(); ++l) {
    result.trace.per_layer.push_back(train_layer(result.model, l, dataset, config, observer));
    if (observer.on_layer_done) observer.on_layer_done(l, result.model);
  }
  return result;
}

int argmax_lowest(std::span<const double> scores) {
  if (scores.empty()) throw Error(Errc::InvalidArgument, "no scores");
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return static_cast<int>(best);
}

double label_score(const FfModel& model, std::span<const float> image, int label, int num_classes,
                   const PredictOptions& options) {
  check_predict_options(model, options);
  if (image.size() != model.input_dim()) {
    throw Error(Errc::DimMismatch, "image has " + std::to_string(image.size()) +
                                       " pixels, model expects " +
                                       std::to_string(model.input_dim()));
  }
  const std::vector<double> per_layer =
      layer_goodness(model, model_input(model, image, label, num_classes));
  double sum = 0.0;
  for (std::size_t k = options.skip_first_layer ? 1 : 0; k < per_layer.size(); ++k) {
    sum += per_layer[k];
  }
  return sum;
}

std::vector<double> class_scores(const FfModel& model, std::span<const float> image,
                                 int num_classes, const PredictOptions& options) {
  std::vector<double> scores(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    scores[static_cast<std::size_t>(c)] = label_score(model, image, c, num_classes, options);
  }
  return scores;
}

Prediction predict(const FfModel& model, std::span<const float> image, int num_classes,
                   const PredictOptions& options) {
  Prediction out;
  out.scores = class_scores(model, image, num_classes, options);
  out.label = argmax_lowest(out.scores);
  return out;
}

Eigen::MatrixXd class_scores_batch(const FfModel& model, std::span<const float> images,
                                   std::size_t count, int num_classes,
                                   const PredictOptions& options) {
  check_predict_options(model, options);
  const std::size_t dim = model.input_dim();
  if (images.size() != count * dim) {
    throw Error(Errc::DimMismatch, "image buffer does not hold " + std::to_string(count) +
                                       " images of " + std::to_string(dim) + " pixels");
  }
  if (dim < static_cast<std::size_t>(num_classes)) {
    throw Error(Errc::DimMismatch, "image shorter than the label code");
  }
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(count), num_classes);
  for (std::size_t start = 0; start < count; start += kScoreChunk) {
    const std::size_t n = std::min(kScoreChunk, count - start);
    RowMatrixD x(static_cast<Eigen::Index>(n) * num_classes, static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < n; ++i) {
      const auto image = images.subspan((start + i) * dim, dim);
      for (int c = 0; c < num_classes; ++c) {
        copy_embedded_row(x, static_cast<Eigen::Index>(i) * num_classes + c, image, c, num_classes);
      }
    }
    if (model.normalize_input) l2_normalize_rows(x);
    const Eigen::MatrixXd per_layer = layer_goodness_batch(model, x);
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < num_classes; ++c) {
        scores(static_cast<Eigen::Index>(start + i), c) =
            included_sum(per_layer.row(static_cast<Eigen::Index>(i) * num_classes + c), options);
      }
    }
  }
  return scores;
}

double evaluate(const FfModel& model, const Dataset& dataset, const PredictOptions& options) {
  if (dataset.size() == 0) throw Error(Errc::EmptyEvalSet, "cannot evaluate on zero samples");
  const Eigen::MatrixXd scores = class_scores_batch(model, dataset.images.pixels, dataset.size(),
                                                    dataset.num_classes, options);
  std::size_t correct = 0;
  std::vector<double> row(static_cast<std::size_t>(dataset.num_classes));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (int c = 0; c < dataset.num_classes; ++c) {
      row[static_cast<std::size_t>(c)] = scores(static_cast<Eigen::Index>(i), c);
    }
    if (argmax_lowest(row) == dataset.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

}  // namespace ffsal
