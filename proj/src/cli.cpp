// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#include "ffsal/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ffsal/baseline.hpp"
#include "ffsal/checkpoint.hpp"
#include "ffsal/error.hpp"
#include "ffsal/ff_train.hpp"
#include "ffsal/idx.hpp"
#include "ffsal/raster.hpp"
#include "ffsal/report.hpp"
#include "ffsal/rng.hpp"
#include "ffsal/saliency.hpp"

namespace ffsal {
namespace {

namespace fs = std::filesystem;

struct DataArgs {
  std::string data_dir;
  std::string images;
  std::string labels;
  std::string split = "train";
  std::size_t limit = 0;  // 0 = all
};

void add_data_options(CLI::App& cmd, DataArgs& data, const std::string& default_split) {
  data.split = default_split;
  cmd.add_option("--data-dir", data.data_dir, "Directory with the MNIST IDX files");
  cmd.add_option("--images", data.images, "IDX image file (overrides --data-dir)");
  cmd.add_option("--labels", data.labels, "IDX label file (overrides --data-dir)");
  cmd.add_option("--split", data.split, "Split to read from --data-dir")
      ->check(CLI::IsMember({"train", "test"}))
      ->capture_default_str();
  cmd.add_option("--limit", data.limit, "Use only the first N samples (0 = all)");
}

Dataset load_data(const DataArgs& data, int num_classes) {
  Dataset ds;
  if (!data.images.empty() || !data.labels.empty()) {
    if (data.images.empty() || data.labels.empty()) {
      throw Error(Errc::InvalidArgument, "--images and --labels must be given together");
    }
    ds = load_dataset(data.images, data.labels, num_classes);
  } else if (!data.data_dir.empty()) {
    ds = load_mnist_split(data.data_dir, data.split == "test" ? Split::Test : Split::Train,
                          num_classes);
  } else {
    throw Error(Errc::InvalidArgument, "either --data-dir or --images/--labels is required");
  }
  return data.limit == 0 ? ds : take_prefix(ds, data.limit);
}

void add_train_options(CLI::App& cmd, TrainConfig& cfg, std::string& optimizer, bool& no_bias) {
  cmd.add_option("--hidden", cfg.hidden_dims, "Hidden layer sizes, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  cmd.add_option("--epochs-per-layer,--epochs", cfg.epochs_per_layer, "Epochs per layer")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--batch-size", cfg.batch_size, "Minibatch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--seed", cfg.seed, "Seed for init, shuffling and negative labels")
      ->capture_default_str();
  cmd.add_option("--optimizer", optimizer, "adam or sgd")
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  cmd.add_option("--classes", cfg.num_classes, "Number of classes")
      ->check(CLI::Range(2, 65535))
      ->capture_default_str();
  cmd.add_flag("--no-bias", no_bias, "Keep biases frozen at zero");
}

void print_model(std::ostream& out, const Checkpoint& ck) {
  const FfModel& m = ck.model;
  const ConfigEcho& c = ck.config;
  out << "format_version: " << kCheckpointVersion << "\n";
  out << "theta: " << format_double(m.theta) << "\n";
  out << "normalize_hidden: " << (m.normalize_hidden ? "true" : "false") << "\n";
  out << "normalize_input: " << (m.normalize_input ? "true" : "false") << "\n";
  out << "layers: " << m.layers.size() << "\n";
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    out << "  layer " << k << ": " << m.layers[k].in_dim() << " -> " << m.layers[k].out_dim()
        << "\n";
  }
  out << "seed: " << c.seed << "\n";
  out << "epochs_per_layer: " << c.epochs_per_layer << "\n";
  out << "batch_size: " << c.batch_size << "\n";
  out << "learning_rate: " << format_double(c.learning_rate) << "\n";
  out << "num_classes: " << c.num_classes << "\n";
  out << "optimizer: " << optimizer_name(c.optimizer) << "\n";
  out << "rng_algorithm: " << static_cast<int>(c.rng_algorithm)
      << (c.rng_algorithm == kRngAlgorithmId ? std::string(" (") + std::string(kRngAlgorithmName) + ")"
                                             : std::string(" (unknown)"))
      << "\n";
  out << "raw_logits: " << (c.raw_logits ? "true" : "false") << "\n";
  out << "use_bias: " << (c.use_bias ? "true" : "false") << "\n";
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::InvalidArgument:
    case Errc::ClassOutOfRange:
    case Errc::CenterOutOfBounds:
      return kExitUsage;
    case Errc::WrongMagic:
    case Errc::TruncatedFile:
    case Errc::LabelOutOfRange:
    case Errc::CountMismatch:
    case Errc::DimMismatch:
    case Errc::EmptyEvalSet:
    case Errc::BadMagic:
    case Errc::UnsupportedVersion:
    case Errc::CrcMismatch:
    case Errc::DimChainBroken:
    case Errc::IoError:
      return kExitData;
  }
  return kExitInternal;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forward-Forward MLP training and occlusion saliency", "ffsal"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ffsal 1.0");

  // train
  TrainConfig train_cfg;
  DataArgs train_data;
  std::string train_optimizer = "adam";
  bool train_no_bias = false;
  bool no_norm_hidden = false;
  bool no_norm_input = false;
  bool verbose = false;
  std::string model_out = "model.ffm";
  std::string loss_csv = "loss.csv";
  auto* train_cmd = app.add_subcommand("train", "Train a Forward-Forward MLP layer by layer");
  add_data_options(*train_cmd, train_data, "train");
  add_train_options(*train_cmd, train_cfg, train_optimizer, train_no_bias);
  train_cmd->add_option("--lr", train_cfg.learning_rate, "Learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--theta", train_cfg.theta, "Goodness threshold")->capture_default_str();
  train_cmd->add_flag("--no-normalize-hidden", no_norm_hidden,
                      "Feed raw activations to the next layer");
  train_cmd->add_flag("--no-normalize-input", no_norm_input,
                      "Feed the embedded image to layer 0 without L2 normalization");
  train_cmd->add_flag("--raw-logits", train_cfg.raw_logits,
                      "Use goodness itself, not goodness - theta, as the loss logit");
  train_cmd->add_option("--out", model_out, "Checkpoint path")->capture_default_str();
  train_cmd->add_option("--loss-csv", loss_csv, "Per-epoch loss trace path")->capture_default_str();
  train_cmd->add_flag("--verbose,-v", verbose, "Print every minibatch loss to stderr");

  // eval
  DataArgs eval_data;
  std::string eval_model;
  bool eval_skip_first = false;
  auto* eval_cmd = app.add_subcommand("eval", "Report classification accuracy of a checkpoint");
  eval_cmd->add_option("--model", eval_model, "Checkpoint path")->required();
  add_data_options(*eval_cmd, eval_data, "test");
  eval_cmd->add_flag("--predict-skip-first", eval_skip_first,
                     "Leave layer 0 out of the goodness sum");

  // saliency
  DataArgs sal_data;
  std::string sal_model;
  std::string sal_mode = "dataset";
  std::size_t sal_index = 0;
  OcclusionSpec spec;
  std::string sal_csv;
  std::string sal_pgm;
  std::string sal_overlay;
  bool sal_skip_first = false;
  auto* sal_cmd = app.add_subcommand("saliency", "Occlusion saliency map of a checkpoint");
  sal_cmd->add_option("--model", sal_model, "Checkpoint path")->required();
  add_data_options(*sal_cmd, sal_data, "test");
  sal_cmd->add_option("--mode", sal_mode, "dataset or image")
      ->check(CLI::IsMember({"dataset", "image"}))
      ->capture_default_str();
  sal_cmd->add_option("--index", sal_index, "Sample index for image mode and the overlay")
      ->capture_default_str();
  sal_cmd->add_option("--filter-size", spec.filter_size, "Odd occlusion window size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sal_cmd->add_option("--stride", spec.stride, "Distance between window centres")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sal_cmd->add_option("--eval-cap", spec.eval_cap, "Dataset mode sample cap (0 = all)")
      ->capture_default_str();
  sal_cmd->add_option("--csv", sal_csv, "Write raw map values as row,col,value");
  sal_cmd->add_option("--pgm", sal_pgm, "Write the normalized map as binary PGM");
  sal_cmd->add_option("--overlay", sal_overlay, "Write a colour overlay on the sample as PPM");
  sal_cmd->add_flag("--predict-skip-first", sal_skip_first,
                    "Leave layer 0 out of the goodness sum");

  // baseline
  TrainConfig base_cfg;
  base_cfg.learning_rate = kBaselineLearningRate;
  DataArgs base_data;
  DataArgs base_eval;
  std::string base_optimizer = "adam";
  bool base_no_bias = false;
  std::string base_model;
  auto* base_cmd = app.add_subcommand("baseline", "Train a backprop MLP of matching shape");
  add_data_options(*base_cmd, base_data, "train");
  add_train_options(*base_cmd, base_cfg, base_optimizer, base_no_bias);
  base_cmd->add_option("--lr", base_cfg.learning_rate, "Learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  base_cmd->add_option("--eval-limit", base_eval.limit, "Use only the first N test samples");
  base_cmd->add_option("--compare", base_model, "FF checkpoint to evaluate on the same test set");

  // inspect
  std::string inspect_model;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print checkpoint metadata");
  inspect_cmd->add_option("--model", inspect_model, "Checkpoint path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << "ffsal 1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failed = &app;
    for (const CLI::App* sub : app.get_subcommands()) failed = sub;
    err << failed->help();
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) {
      train_cfg.optimizer = parse_optimizer(train_optimizer);
      train_cfg.use_bias = !train_no_bias;
      train_cfg.normalize_hidden = !no_norm_hidden;
      train_cfg.normalize_input = !no_norm_input;
      train_cfg.validate();
      const Dataset ds = load_data(train_data, train_cfg.num_classes);
      TrainObserver observer;
      observer.on_epoch = [&](std::size_t layer, std::size_t epoch, double loss) {
        err << "layer " << layer << " epoch " << epoch << " mean_loss " << format_double(loss)
            << "\n";
      };
      if (verbose) {
        observer.on_batch = [&](std::size_t layer, std::size_t epoch, std::size_t batch,
                                double loss) {
          err << "layer " << layer << " epoch " << epoch << " batch " << batch << " loss "
              << format_double(loss) << "\n";
        };
      }
      const TrainResult result = train(ds, train_cfg, observer);
      save_checkpoint(result.model, train_cfg, model_out);
      if (!loss_csv.empty()) write_text_file(loss_csv, loss_trace_csv(result.trace));
      out << "trained " << result.model.layers.size() << " layers on " << ds.size()
          << " samples; checkpoint " << model_out << "\n";
      return kExitOk;
    }

    if (eval_cmd->parsed()) {
      const Checkpoint ck = load_checkpoint(eval_model);
      const Dataset ds = load_data(eval_data, ck.config.num_classes);
      const double acc = evaluate(ck.model, ds, PredictOptions{eval_skip_first});
      out << "accuracy: " << format_double(acc) << " (" << ds.size() << " samples)\n";
      return kExitOk;
    }

    if (sal_cmd->parsed()) {
      const Checkpoint ck = load_checkpoint(sal_model);
      const int num_classes = ck.config.num_classes;
      const Dataset ds = load_data(sal_data, num_classes);
      if (sal_index >= ds.size()) {
        throw Error(Errc::InvalidArgument, "--index " + std::to_string(sal_index) +
                                               " but the set has " + std::to_string(ds.size()) +
                                               " samples");
      }
      const PredictOptions popts{sal_skip_first};
      const std::size_t rows = ds.images.rows;
      const std::size_t cols = ds.images.cols;
      SaliencyMap map;
      if (sal_mode == "image") {
        spec.mode = SaliencyMode::ImageGoodness;
        map = ads_image(ck.model, ds.image(sal_index), rows, cols, ds.label(sal_index), num_classes,
                        spec, popts);
      } else {
        spec.mode = SaliencyMode::DatasetAccuracy;
        map = ads_dataset(ck.model, ds, spec, popts);
      }
      out << "baseline: " << format_double(map.baseline) << "\n";
      if (!sal_csv.empty()) write_text_file(sal_csv, saliency_csv(map));
      const SaliencyMap unit = normalize_map(map);
      if (!sal_pgm.empty()) render_pgm(unit, sal_pgm);
      if (!sal_overlay.empty()) render_overlay(ds.image(sal_index), rows, cols, unit, sal_overlay);
      return kExitOk;
    }

    if (base_cmd->parsed()) {
      base_cfg.optimizer = parse_optimizer(base_optimizer);
      base_cfg.use_bias = !base_no_bias;
      if (!base_data.images.empty()) {
        throw Error(Errc::InvalidArgument, "baseline reads both splits and needs --data-dir");
      }
      const Dataset train_set = load_data(base_data, base_cfg.num_classes);
      DataArgs test_args = base_data;
      test_args.split = "test";
      test_args.limit = base_eval.limit;
      const Dataset test_set = load_data(test_args, base_cfg.num_classes);
      const BaselineResult result =
          train_backprop_baseline(train_set, test_set, base_cfg, base_cfg.learning_rate);
      for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
        err << "epoch " << e << " mean_loss " << format_double(result.epoch_losses[e]) << "\n";
      }
      out << "baseline accuracy: " << format_double(result.accuracy) << "\n";
      if (!base_model.empty()) {
        const Checkpoint ck = load_checkpoint(base_model);
        const double ff = evaluate(ck.model, test_set);
        out << "ff accuracy: " << format_double(ff) << "\n";
        out << "difference (pp): " << format_double(100.0 * (result.accuracy - ff)) << "\n";
      }
      return kExitOk;
    }

    if (inspect_cmd->parsed()) {
      print_model(out, load_checkpoint(inspect_model));
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  err << app.help();
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace ffsal
