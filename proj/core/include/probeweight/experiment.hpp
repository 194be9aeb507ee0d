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

#ifndef PROBEWEIGHT_EXPERIMENT_HPP_
#define PROBEWEIGHT_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "probeweight/baselines.hpp"
#include "probeweight/biasgen.hpp"
#include "probeweight/meta_alloc.hpp"
#include "probeweight/metrics.hpp"
#include "probeweight/probe.hpp"
#include "probeweight/weight_net.hpp"

namespace probeweight {

struct DatasetRecipe {
  int num_classes = 3;
  Index dim = 8;
  Index train_per_class = 2100;  // n_0 before imbalance
  Index meta_pool_per_class = 100;
  Index test_per_class = 500;
  BlobGeometry geometry;
  NoiseMode noise_mode = NoiseMode::kUniform;
};

struct ExperimentConfig {
  DatasetRecipe dataset;
  std::vector<double> imbalance_factors = {1.0};
  std::vector<double> noise_rates = {0.0};
  std::vector<Method> methods = {Method::kCe, Method::kCurveNet};
  std::vector<std::uint64_t> seeds = {0};
  Index meta_per_class = 10;
  MetaStrategy meta_strategy = MetaStrategy::kHeldOutClean;
  std::vector<Index> hidden = {32, 32};
  ProbeConfig probe;
  AllocConfig alloc;
  Index embed_dim = 64;
  Index encoder_hidden = 128;
  Index head_hidden = 100;
  Index transient_hidden = TransientLossNet::kDefaultHidden;
  std::filesystem::path output_dir = "runs";
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

ExperimentConfig parse_experiment_config(std::string_view json_text);
// Canonical JSON (everything that affects results; no output_dir or threads).
std::string experiment_config_to_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

struct CellSpec {
  double imbalance_factor = 1.0;
  double noise_rate = 0.0;
  std::uint64_t seed = 0;
  Method method = Method::kCe;

  std::string name() const;
};

std::vector<CellSpec> enumerate_cells(const ExperimentConfig& config);

// The biased training set, its meta set and a clean balanced test set for one
// grid cell. Identical across methods for the same (IF, p, seed).
struct CellData {
  Dataset train;
  Dataset meta;
  Dataset test;
  std::optional<LossCurveMatrix> curves;
};

CellData build_cell_data(const ExperimentConfig& config, const CellSpec& cell,
                         bool with_curves);

struct CellResult {
  CellSpec spec;
  MetricsRecord metrics;
  std::filesystem::path run_dir;
  bool reused = false;
};

// Trains one method on one cell, writes the run directory and its reports.
CellResult run_cell(const ExperimentConfig& config, const CellSpec& cell,
                    const std::filesystem::path& run_dir);

struct GridSummary {
  std::vector<CellResult> cells;
  std::map<Method, double> mean_accuracy;
  std::filesystem::path summary_csv;
  Index trained = 0;
};

// Runs every (IF, p, seed, method) cell, skipping cells already recorded in
// the output directory's manifest. Refuses to resume a manifest written for a
// different configuration.
GridSummary run_grid(const ExperimentConfig& config);

// Worker count: config.threads (or hardware concurrency) capped by the
// PROBEWEIGHT_THREADS environment variable.
int grid_threads(const ExperimentConfig& config);

struct SummaryRow {
  std::string kind;  // "run" or "MA"
  std::string method;
  double imbalance_factor = 0.0;
  double noise_rate = 0.0;
  std::uint64_t seed = 0;
  Index correct = 0;
  Index total = 0;
  double accuracy = 0.0;
};

std::vector<SummaryRow> read_summary(const std::filesystem::path& path);

// MA per method recomputed from the summary's run rows.
std::map<std::string, double> mean_accuracy_by_method(
    const std::vector<SummaryRow>& rows);

}  // namespace probeweight

#endif  // PROBEWEIGHT_EXPERIMENT_HPP_
