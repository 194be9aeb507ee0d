// Copyright 2026 The ProbeWeight Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: dataset generation, probing, allocating and the
// experiment grid.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "probeweight/baselines.hpp"
#include "probeweight/biasgen.hpp"
#include "probeweight/checkpoint.hpp"
#include "probeweight/curve_io.hpp"
#include "probeweight/dataset_io.hpp"
#include "probeweight/errors.hpp"
#include "probeweight/experiment.hpp"
#include "probeweight/io_util.hpp"
#include "probeweight/meta_alloc.hpp"
#include "probeweight/metrics.hpp"
#include "probeweight/probe.hpp"
#include "probeweight/reports.hpp"

namespace fs = std::filesystem;
namespace pw = probeweight;
using nlohmann::json;

namespace {

struct GenArgs {
  int classes = 3;
  pw::Index per_class = 1000;
  pw::Index dim = 8;
  double imbalance_factor = 1.0;
  double noise_rate = 0.0;
  std::string noise_mode = "uniform";
  std::uint64_t seed = 0;
  std::string role = "train";
  pw::SampleId first_id = 0;
  std::string out;
};

struct ProbeArgs {
  std::string data;
  std::string out;
  std::vector<pw::Index> hidden = {32, 32};
  pw::ProbeConfig config;
};

struct AllocArgs {
  std::string data;
  std::string meta;
  std::string curves;
  std::string test;
  std::string out;
  std::string weight_model = "curvenet";
  std::vector<pw::Index> hidden = {32, 32};
  pw::AllocConfig config;
  int prefix_drop = 5;
  bool std_normalize = false;
  pw::Index embed_dim = 64;
  pw::Index encoder_hidden = 128;
  pw::Index head_hidden = 100;
};

int run_gen(const GenArgs& a) {
  pw::BiasConfig bias{a.imbalance_factor, a.noise_rate,
                      pw::parse_noise_mode(a.noise_mode), a.seed + 1};
  const auto clean = pw::generate_blobs(a.classes, a.per_class, a.dim, {},
                                        a.seed, a.first_id);
  const auto data = pw::apply_bias(clean, bias);
  pw::save_dataset(data, a.out, {a.classes, a.dim, bias, a.seed, a.role});
  std::cout << "wrote " << data.size() << " samples to " << a.out << "\n";
  return 0;
}

int run_probe(const ProbeArgs& a) {
  const auto data = pw::load_dataset(a.data);
  const auto view = pw::make_training_view(data);
  const auto layout =
      pw::nn::ParamLayout::dense(data.dim(), a.hidden, data.num_classes());
  const auto init = pw::nn::init_classifier(layout, a.config.seed);
  const auto curves = pw::probe_train(view, init, a.config);
  pw::save_curves(curves, a.out);
  std::cout << "recorded " << curves.num_samples() << " x " << curves.epochs()
            << " losses to " << a.out << "\n";
  return 0;
}

int run_allocate(const AllocArgs& a) {
  const auto data = pw::load_dataset(a.data);
  const auto meta_set = pw::load_dataset(a.meta);
  const auto train = pw::make_training_view(data);
  const auto meta = pw::make_training_view(meta_set);
  const auto layout =
      pw::nn::ParamLayout::dense(data.dim(), a.hidden, data.num_classes());
  const auto init = pw::nn::init_classifier(layout, a.config.seed);
  const fs::path out(a.out);
  fs::create_directories(out);

  pw::AllocHooks hooks;
  std::optional<pw::Dataset> test;
  if (!a.test.empty()) {
    test = pw::load_dataset(a.test);
    hooks.test_accuracy = [&](const pw::nn::ClassifierParams& p) {
      return pw::evaluate_classifier(p, *test).accuracy;
    };
  }

  std::optional<pw::LossCurveMatrix> raw;
  std::optional<pw::NormalizedCurves> normalized;
  pw::AllocResult result;
  if (a.weight_model == "curvenet") {
    if (a.curves.empty()) throw pw::ConfigError("--curves is required for curvenet");
    raw = pw::load_curves(a.curves);
    normalized = pw::normalize_curves(*raw, a.prefix_drop, a.std_normalize,
                                      data.num_classes());
    pw::CurveNetConfig cn{normalized->curve_length(), data.num_classes(),
                          a.embed_dim, a.encoder_hidden, a.head_hidden};
    result = pw::allocate_train(
        train, meta, &*normalized, init,
        std::make_unique<pw::CurveNetModel>(
            pw::init_curvenet(cn, a.config.seed ^ 0x5bd1e995ULL)),
        a.config, hooks);
  } else if (a.weight_model == "mwnet_transient") {
    result = pw::train_mwnet_transient(train, meta, init, a.config,
                                       a.config.seed ^ 0x5bd1e995ULL,
                                       pw::TransientLossNet::kDefaultHidden, hooks);
  } else if (a.weight_model == "ce") {
    result = pw::train_ce(train, init, a.config, hooks);
  } else {
    throw pw::ConfigError("unknown weight model '" + a.weight_model + "'");
  }

  json config = {{"method", a.weight_model},
                 {"data", a.data},
                 {"meta", a.meta},
                 {"curves", a.curves},
                 {"hidden", a.hidden},
                 {"epochs", a.config.epochs},
                 {"batch_size", a.config.batch_size},
                 {"meta_batch_size", a.config.meta_batch_size},
                 {"lr", a.config.classifier_lr.initial_lr},
                 {"milestones", a.config.classifier_lr.milestones},
                 {"factors", a.config.classifier_lr.factors},
                 {"weight_lr", a.config.weight_lr},
                 {"skip_layers", a.config.skip_layers},
                 {"freeze_at", a.config.resolved_freeze_at()},
                 {"prefix_drop", a.prefix_drop},
                 {"std_normalize", a.std_normalize},
                 {"seed", a.config.seed}};
  pw::write_file_atomic(out / pw::run_files::kConfig, config.dump(2) + "\n");
  pw::write_file_atomic(out / pw::run_files::kHistory,
                        pw::history_to_csv(result.history));
  pw::save_classifier_checkpoint(out / pw::run_files::kClassifier,
                                 result.classifier, a.config.seed,
                                 a.config.epochs);
  if (result.weight_model && result.weight_model->num_params() > 0) {
    pw::save_weight_checkpoint(out / pw::run_files::kWeightNet,
                               *result.weight_model, a.config.seed,
                               a.config.epochs);
  }
  // Artifacts for "bench report".
  pw::save_dataset(data, out / pw::run_files::kTrain,
                   pw::load_dataset_info(a.data).value_or(pw::DatasetInfo{
                       data.num_classes(), data.dim(), std::nullopt, 0, "train"}));
  pw::write_file_atomic(out / pw::run_files::kWeights,
                        pw::weights_to_csv(train.sample_ids, result.final_weights));
  if (raw) pw::save_curves(*raw, out / pw::run_files::kCurves);
  if (test) {
    const auto predicted = pw::nn::predict(
        result.classifier, pw::make_training_view(*test).features);
    pw::write_file_atomic(out / pw::run_files::kPredictions,
                          pw::predictions_to_csv(*test, predicted));
    std::cout << "test accuracy "
              << pw::format_double(pw::evaluate_classifier(result.classifier, *test)
                                       .accuracy)
              << "\n";
  }
  std::cout << "wrote run to " << out.string() << "\n";
  return 0;
}

int run_bench(const std::string& config_path) {
  const auto config = pw::parse_experiment_config(pw::read_file(config_path));
  const auto summary = pw::run_grid(config);
  std::cout << "cells " << summary.cells.size() << ", trained "
            << summary.trained << "\n";
  for (const auto& [method, ma] : summary.mean_accuracy) {
    std::cout << "MA " << pw::to_string(method) << " " << pw::format_double(ma)
              << "\n";
  }
  std::cout << "summary " << summary.summary_csv.string() << "\n";
  return 0;
}

int run_report(const std::string& run_dir) {
  for (const auto& p : pw::emit_reports(run_dir)) {
    std::cout << p.string() << "\n";
  }
  return 0;
}

int run_ma(const std::string& summary_path) {
  const auto rows = pw::read_summary(summary_path);
  for (const auto& [method, ma] : pw::mean_accuracy_by_method(rows)) {
    std::cout << method << "," << pw::format_double(ma) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probe-and-allocate sample weighting"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a biased blob dataset");
  gen_cmd->add_option("--classes", gen.classes);
  gen_cmd->add_option("--per-class", gen.per_class, "head class size n0");
  gen_cmd->add_option("--dim", gen.dim);
  gen_cmd->add_option("--imbalance", gen.imbalance_factor);
  gen_cmd->add_option("--noise", gen.noise_rate);
  gen_cmd->add_option("--noise-mode", gen.noise_mode)
      ->check(CLI::IsMember({"uniform", "flip2"}));
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--role", gen.role);
  gen_cmd->add_option("--first-id", gen.first_id);
  gen_cmd->add_option("--out", gen.out)->required();

  ProbeArgs probe;
  auto* probe_cmd = app.add_subcommand("probe", "record per-sample loss curves");
  probe_cmd->add_option("--data", probe.data)->required()->check(CLI::ExistingFile);
  probe_cmd->add_option("--epochs", probe.config.epochs);
  probe_cmd->add_option("--cycle-len", probe.config.schedule.cycle_len);
  probe_cmd->add_option("--max-lr", probe.config.schedule.max_lr);
  probe_cmd->add_option("--base-lr", probe.config.schedule.base_lr);
  probe_cmd->add_option("--batch", probe.config.batch_size);
  probe_cmd->add_option("--hidden", probe.hidden)->delimiter(',');
  probe_cmd->add_option("--seed", probe.config.seed);
  probe_cmd->add_flag("--eval-pass", probe.config.eval_pass);
  probe_cmd->add_option("--out", probe.out)->required();

  AllocArgs alloc;
  auto* alloc_cmd =
      app.add_subcommand("allocate", "meta-learn sample weights and train");
  alloc_cmd->add_option("--data", alloc.data)->required()->check(CLI::ExistingFile);
  alloc_cmd->add_option("--meta", alloc.meta)->required()->check(CLI::ExistingFile);
  alloc_cmd->add_option("--curves", alloc.curves)->check(CLI::ExistingFile);
  alloc_cmd->add_option("--test", alloc.test)->check(CLI::ExistingFile);
  alloc_cmd->add_option("--sl", alloc.config.skip_layers);
  alloc_cmd->add_option("--epochs", alloc.config.epochs);
  alloc_cmd->add_option("--batch", alloc.config.batch_size);
  alloc_cmd->add_option("--meta-batch", alloc.config.meta_batch_size);
  alloc_cmd->add_option("--lr", alloc.config.classifier_lr.initial_lr);
  alloc_cmd->add_option("--milestones", alloc.config.classifier_lr.milestones)
      ->delimiter(',');
  alloc_cmd->add_option("--factors", alloc.config.classifier_lr.factors)
      ->delimiter(',');
  alloc_cmd->add_option("--weight-lr", alloc.config.weight_lr);
  alloc_cmd->add_option("--hidden", alloc.hidden)->delimiter(',');
  alloc_cmd->add_option("--prefix-drop", alloc.prefix_drop);
  alloc_cmd->add_flag("--std-normalize", alloc.std_normalize);
  alloc_cmd->add_option("--embed-dim", alloc.embed_dim);
  alloc_cmd->add_option("--weight-model", alloc.weight_model)
      ->check(CLI::IsMember({"curvenet", "mwnet_transient", "ce"}));
  alloc_cmd->add_option("--seed", alloc.config.seed);
  alloc_cmd->add_option("--out", alloc.out)->required();

  auto* bench_cmd = app.add_subcommand("bench", "experiment grid");
  bench_cmd->require_subcommand(1);
  std::string bench_config, report_dir, summary_path;
  auto* bench_run = bench_cmd->add_subcommand("run", "run a grid");
  bench_run->add_option("--config", bench_config)
      ->required()
      ->check(CLI::ExistingFile);
  auto* bench_report = bench_cmd->add_subcommand("report", "emit run reports");
  bench_report->add_option("run-dir", report_dir)
      ->required()
      ->check(CLI::ExistingDirectory);
  auto* bench_ma = bench_cmd->add_subcommand("ma", "mean accuracy per method");
  bench_ma->add_option("summary", summary_path)
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*probe_cmd) return run_probe(probe);
    if (*alloc_cmd) {
      alloc.config.validate(static_cast<int>(alloc.hidden.size()) + 1);
      return run_allocate(alloc);
    }
    if (*bench_run) return run_bench(bench_config);
    if (*bench_report) return run_report(report_dir);
    if (*bench_ma) return run_ma(summary_path);
  } catch (const pw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
