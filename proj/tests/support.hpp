// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures and reference implementations for the test binaries.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "ffsal/baseline.hpp"
#include "ffsal/ff_train.hpp"
#include "ffsal/idx.hpp"
#include "ffsal/nn.hpp"
#include "ffsal/rng.hpp"

namespace ffsal::testing {

inline std::filesystem::path mnist_dir() { return FFSAL_MNIST_DIR; }

inline bool mnist_available() {
  const auto dir = mnist_dir();
  for (const char* name : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                           "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"}) {
    if (!std::filesystem::exists(dir / name) &&
        !std::filesystem::exists(dir / (std::string(name) + ".gz"))) {
      return false;
    }
  }
  return true;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ffsal_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline double uniform(Xoshiro256& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform01();
}

inline DenseLayer random_layer(std::size_t in, std::size_t out, Xoshiro256& rng,
                               double scale = 1.0) {
  DenseLayer layer(in, out);
  for (Eigen::Index j = 0; j < layer.weights.rows(); ++j) {
    for (Eigen::Index i = 0; i < layer.weights.cols(); ++i) {
      layer.weights(j, i) = static_cast<float>(uniform(rng, -scale, scale));
    }
    layer.bias[j] = static_cast<float>(uniform(rng, -0.5 * scale, 0.5 * scale));
  }
  return layer;
}

inline Eigen::VectorXd random_vector(std::size_t n, Xoshiro256& rng, double lo = -1.0,
                                     double hi = 1.0) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

/// Images with a zero border of width `border`, interior pixels drawn on the
/// 0..255 grid, labels cycling through the classes.
inline Dataset synthetic_dataset(std::size_t count, std::size_t rows, std::size_t cols,
                                 int num_classes, std::uint64_t seed, std::size_t border = 0) {
  Xoshiro256 rng(seed);
  ImageSet images;
  images.count = count;
  images.rows = rows;
  images.cols = cols;
  images.pixels.assign(count * rows * cols, 0.0f);
  LabelSet labels;
  labels.count = count;
  for (std::size_t n = 0; n < count; ++n) {
    for (std::size_t r = border; r + border < rows; ++r) {
      for (std::size_t c = border; c + border < cols; ++c) {
        images.pixels[n * rows * cols + r * cols + c] =
            static_cast<float>(rng.uniform_below(256)) / 255.0f;
      }
    }
    labels.labels.push_back(static_cast<std::uint8_t>(n % static_cast<std::size_t>(num_classes)));
  }
  return make_dataset(std::move(images), std::move(labels), num_classes);
}

/// |a - b| <= max(abs_floor, rel * max(|a|, |b|)).
inline bool close(double a, double b, double rel = 1e-4, double abs_floor = 1e-6) {
  return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

// ---- Reference implementations (plain loops, f64 parameters) ----

struct ShadowLayer {
  std::vector<std::vector<double>> w;  // out x in
  std::vector<double> b;

  static ShadowLayer of(const DenseLayer& layer) {
    ShadowLayer s;
    s.w.assign(layer.out_dim(), std::vector<double>(layer.in_dim()));
    s.b.assign(layer.out_dim(), 0.0);
    for (std::size_t j = 0; j < layer.out_dim(); ++j) {
      for (std::size_t i = 0; i < layer.in_dim(); ++i) {
        s.w[j][i] = layer.weights(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      }
      s.b[j] = layer.bias[static_cast<Eigen::Index>(j)];
    }
    return s;
  }

  std::vector<double> pre(const std::vector<double>& x) const {
    std::vector<double> z(b);
    for (std::size_t j = 0; j < w.size(); ++j) {
      for (std::size_t i = 0; i < x.size(); ++i) z[j] += w[j][i] * x[i];
    }
    return z;
  }

  std::vector<double> relu(const std::vector<double>& x) const {
    std::vector<double> z = pre(x);
    for (double& v : z) v = std::max(v, 0.0);
    return z;
  }
};

inline std::vector<double> std_vec(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

inline double ref_goodness(const std::vector<double>& y) {
  double g = 0.0;
  for (double v : y) g += v * v;
  return g;
}

inline double ref_softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double ref_ff_loss(const ShadowLayer& layer, const std::vector<double>& x_pos,
                          const std::vector<double>& x_neg, double theta) {
  const double gp = ref_goodness(layer.relu(x_pos));
  const double gn = ref_goodness(layer.relu(x_neg));
  return 0.5 * (ref_softplus(-(gp - theta)) + ref_softplus(gn - theta));
}

inline double min_abs_pre(const ShadowLayer& layer, const std::vector<double>& x) {
  double m = INFINITY;
  for (double z : layer.pre(x)) m = std::min(m, std::abs(z));
  return m;
}

struct ShadowMlp {
  std::vector<ShadowLayer> hidden;
  ShadowLayer head;

  double loss(const std::vector<std::vector<double>>& xs, const std::vector<int>& labels) const {
    double total = 0.0;
    for (std::size_t n = 0; n < xs.size(); ++n) {
      std::vector<double> h = xs[n];
      for (const ShadowLayer& layer : hidden) h = layer.relu(h);
      const std::vector<double> z = head.pre(h);
      const double m = *std::max_element(z.begin(), z.end());
      double s = 0.0;
      for (double v : z) s += std::exp(v - m);
      total += std::log(s) + m - z[static_cast<std::size_t>(labels[n])];
    }
    return total / static_cast<double>(xs.size());
  }
};

// ---- Finite-difference cases shared by unit and acceptance tests ----

struct FdResult {
  bool skipped = false;  // instance sat too close to a ReLU kink
  int entries = 0;
  int failures = 0;
  double worst_rel = 0.0;

  void record(double analytic, double numeric) {
    ++entries;
    if (!close(analytic, numeric)) ++failures;
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale > 1e-6) worst_rel = std::max(worst_rel, std::abs(analytic - numeric) / scale);
  }
};

inline constexpr double kFdStep = 1e-3;

/// Random 6->4 layer and input pair; local_gradient against central differences.
inline FdResult fd_local_gradient_case(Xoshiro256& rng) {
  constexpr std::size_t kIn = 6;
  constexpr std::size_t kOut = 4;
  const double h = kFdStep;
  const DenseLayer layer = random_layer(kIn, kOut, rng);
  const Eigen::VectorXd xp = random_vector(kIn, rng);
  const Eigen::VectorXd xn = random_vector(kIn, rng);
  const double theta = uniform(rng, 0.5, 3.0);
  const ShadowLayer base = ShadowLayer::of(layer);
  const auto vp = std_vec(xp);
  const auto vn = std_vec(xn);
  FdResult res;
  const double reach = 2.0 * h * (1.0 + static_cast<double>(kIn));
  if (min_abs_pre(base, vp) < reach || min_abs_pre(base, vn) < reach) {
    res.skipped = true;
    return res;
  }
  const LocalGradient lg = local_gradient(layer, xp, xn, theta);
  for (std::size_t j = 0; j < kOut; ++j) {
    for (std::size_t i = 0; i <= kIn; ++i) {
      ShadowLayer up = base;
      ShadowLayer dn = base;
      (i < kIn ? up.w[j][i] : up.b[j]) += h;
      (i < kIn ? dn.w[j][i] : dn.b[j]) -= h;
      const double fd = (ref_ff_loss(up, vp, vn, theta) - ref_ff_loss(dn, vp, vn, theta)) / (2 * h);
      const auto jj = static_cast<Eigen::Index>(j);
      res.record(i < kIn ? lg.update.dW(jj, static_cast<Eigen::Index>(i)) : lg.update.db[jj], fd);
    }
  }
  return res;
}

/// Random 6->4->3 softmax MLP on a batch of 5; backprop against central differences.
inline FdResult fd_mlp_case(Xoshiro256& rng) {
  constexpr std::size_t kBatch = 5;
  const double h = kFdStep;
  MlpModel model;
  model.hidden = {random_layer(6, 4, rng)};
  model.head = random_layer(4, 3, rng);
  RowMatrixD x(kBatch, 6);
  std::vector<std::vector<double>> xs;
  std::vector<int> labels;
  for (std::size_t n = 0; n < kBatch; ++n) {
    const Eigen::VectorXd v = random_vector(6, rng);
    x.row(static_cast<Eigen::Index>(n)) = v.transpose();
    xs.push_back(std_vec(v));
    labels.push_back(static_cast<int>(rng.uniform_below(3)));
  }
  ShadowMlp base{{ShadowLayer::of(model.hidden[0])}, ShadowLayer::of(model.head)};
  FdResult res;
  const double reach = 2.0 * h * 7.0;
  for (const auto& v : xs) {
    if (min_abs_pre(base.hidden[0], v) < reach) {
      res.skipped = true;
      return res;
    }
  }
  const MlpGradients g = mlp_loss_and_gradients(model, x, labels);
  auto check_layer = [&](auto pick, const GradientUpdate& grad, std::size_t out, std::size_t in) {
    for (std::size_t j = 0; j < out; ++j) {
      for (std::size_t i = 0; i <= in; ++i) {
        ShadowMlp up = base;
        ShadowMlp dn = base;
        ShadowLayer& lu = pick(up);
        ShadowLayer& ld = pick(dn);
        (i < in ? lu.w[j][i] : lu.b[j]) += h;
        (i < in ? ld.w[j][i] : ld.b[j]) -= h;
        const double fd = (up.loss(xs, labels) - dn.loss(xs, labels)) / (2 * h);
        const auto jj = static_cast<Eigen::Index>(j);
        res.record(i < in ? grad.dW(jj, static_cast<Eigen::Index>(i)) : grad.db[jj], fd);
      }
    }
  };
  check_layer([](ShadowMlp& m) -> ShadowLayer& { return m.hidden[0]; }, g.hidden[0], 4, 6);
  check_layer([](ShadowMlp& m) -> ShadowLayer& { return m.head; }, g.head, 3, 4);
  // The reported loss is the same mean cross-entropy.
  res.record(g.loss, base.loss(xs, labels));
  return res;
}

}  // namespace ffsal::testing
