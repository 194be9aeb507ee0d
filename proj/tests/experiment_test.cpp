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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "probeweight/errors.hpp"
#include "probeweight/experiment.hpp"
#include "probeweight/io_util.hpp"

namespace probeweight {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "probeweight_experiment_test" / name;
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_config(const fs::path& out) {
  const std::string text = R"({
    "dataset": {"classes": 3, "dim": 4, "train_per_class": 60,
                "meta_pool_per_class": 12, "test_per_class": 20},
    "imbalance_factors": [1, 4],
    "noise_rates": [0, 0.3],
    "seeds": [7],
    "methods": ["ce", "curvenet"],
    "meta": {"per_class": 5},
    "classifier": {"hidden": [8]},
    "probe": {"epochs": 6, "prefix_drop": 1, "batch_size": 32, "cycle_len": 3},
    "alloc": {"epochs": 4, "batch_size": 32, "milestones": [2], "factors": [0.1]},
    "curvenet": {"embed_dim": 4, "encoder_hidden": 6, "head_hidden": 5}
  })";
  auto c = parse_experiment_config(text);
  c.output_dir = out;
  c.threads = 2;
  return c;
}

TEST_CASE("config parsing and validation") {
  const auto c = small_config("x");
  CHECK(c.dataset.dim == 4);
  CHECK(c.hidden == std::vector<Index>{8});
  CHECK(c.methods.size() == 2);
  CHECK(c.probe.schedule.cycle_len == 3);
  CHECK(c.alloc.resolved_freeze_at() == 2);
  CHECK(c.embed_dim == 4);
  CHECK(parse_experiment_config(experiment_config_to_json(c)).imbalance_factors ==
        c.imbalance_factors);
  CHECK(config_hash(c) == config_hash(parse_experiment_config(experiment_config_to_json(c))));

  CHECK_THROWS_AS(parse_experiment_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"seeds": []})"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"noise_rates": []})"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"methods": ["svm"]})"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"imbalance_factors": [0.5]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"seeds": "one"})"), ConfigError);
}

TEST_CASE("hash ignores output location but tracks results-relevant fields") {
  auto a = small_config("a");
  auto b = small_config("b");
  b.threads = 1;
  CHECK(config_hash(a) == config_hash(b));
  b.seeds = {8};
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("cells and their names") {
  const auto c = small_config("x");
  const auto cells = enumerate_cells(c);
  CHECK(cells.size() == 2 * 2 * 1 * 2);
  std::set<std::string> names;
  for (const auto& cell : cells) names.insert(cell.name());
  CHECK(names.size() == cells.size());
  CHECK(names.contains("curvenet_if4_p0.3_s7"));
}

TEST_CASE("cell data: clean balanced disjoint test set, shared across methods") {
  const auto c = small_config("x");
  CellSpec cell{4.0, 0.3, 7, Method::kCe};
  const auto data = build_cell_data(c, cell, false);
  CHECK(data.test.class_counts() == std::vector<Index>{20, 20, 20});
  for (const auto& s : data.test.samples()) CHECK_FALSE(s.is_noisy);
  CHECK(data.meta.class_counts() == std::vector<Index>{5, 5, 5});
  std::set<SampleId> seen;
  for (const auto* d : {&data.train, &data.meta, &data.test}) {
    for (auto id : d->sample_ids()) CHECK(seen.insert(id).second);
  }
  std::vector<Index> true_counts(3, 0);
  for (const auto& s : data.train.samples()) ++true_counts[s.true_label];
  CHECK(true_counts == std::vector<Index>{60, 30, 15});

  cell.method = Method::kCurveNet;
  const auto with_curves = build_cell_data(c, cell, true);
  CHECK(with_curves.train == data.train);
  CHECK(with_curves.test == data.test);
  CHECK(with_curves.meta == data.meta);
  REQUIRE(with_curves.curves.has_value());
  CHECK(with_curves.curves->sample_ids == data.train.sample_ids());
}

TEST_CASE("low-loss meta strategy draws from the training set") {
  auto c = small_config("x");
  c.meta_strategy = MetaStrategy::kLowProbeLoss;
  const auto data = build_cell_data(c, {4.0, 0.3, 7, Method::kCe}, false);
  const auto train_ids = data.train.sample_ids();
  const std::set<SampleId> ids(train_ids.begin(), train_ids.end());
  for (auto id : data.meta.sample_ids()) CHECK(ids.contains(id));
  CHECK(data.meta.class_counts() == std::vector<Index>{5, 5, 5});
}

TEST_CASE("grid run, summary, MA and resumption") {
  const auto dir = fresh_dir("grid");
  const auto c = small_config(dir);
  const auto first = run_grid(c);
  CHECK(first.trained == 8);
  const auto rows = read_summary(first.summary_csv);
  CHECK(rows.size() == 2 * 2 * 1 * 2 + 2);

  std::map<std::string, std::vector<double>> acc;
  for (const auto& r : rows) {
    if (r.kind == "run") {
      CHECK(r.accuracy == static_cast<double>(r.correct) / static_cast<double>(r.total));
      acc[r.method].push_back(r.accuracy);
    }
  }
  for (const auto& r : rows) {
    if (r.kind != "MA") continue;
    const auto& a = acc[r.method];
    double sum = 0;
    for (double v : a) sum += v;
    CHECK(r.accuracy == sum / static_cast<double>(a.size()));
  }
  CHECK(mean_accuracy_by_method(rows).at("ce") == first.mean_accuracy.at(Method::kCe));

  for (const auto& cell : first.cells) {
    CHECK(fs::exists(cell.run_dir / "confusion.csv"));
    CHECK(fs::exists(cell.run_dir / "weights_by_group.csv"));
    CHECK(fs::exists(cell.run_dir / "timing.csv"));
    CHECK(fs::exists(cell.run_dir / "classifier.ckpt"));
    const bool curvenet = cell.spec.method == Method::kCurveNet;
    CHECK(fs::exists(cell.run_dir / "curves.pacv") == curvenet);
    CHECK(fs::exists(cell.run_dir / "curve_groups.csv") == curvenet);
    CHECK(fs::exists(cell.run_dir / "curvenet.ckpt") == curvenet);
  }

  const std::string summary = read_file(first.summary_csv);
  const auto again = run_grid(c);
  CHECK(again.trained == 0);
  CHECK(read_file(again.summary_csv) == summary);

  auto changed = c;
  changed.noise_rates = {0.0};
  CHECK_THROWS_WITH_AS(run_grid(changed), doctest::Contains("refusing to resume"),
                       ConfigError);
}

TEST_CASE("partial grids resume where they stopped") {
  const auto dir = fresh_dir("partial");
  auto c = small_config(dir);
  c.methods = {Method::kCe};
  const auto full = run_grid(c);
  const std::string summary = read_file(full.summary_csv);
  // Forget one completed cell.
  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  auto done = manifest.at("completed").get<std::vector<std::string>>();
  const auto it = std::find(done.begin(), done.end(), full.cells[1].spec.name());
  REQUIRE(it != done.end());
  done.erase(it);
  manifest["completed"] = done;
  write_file_atomic(dir / "manifest.json", manifest.dump(2));
  const auto resumed = run_grid(c);
  CHECK(resumed.trained == 1);
  CHECK(read_file(resumed.summary_csv) == summary);
}

TEST_CASE("thread cap from the environment") {
  auto c = small_config("x");
  c.threads = 8;
  ::setenv("PROBEWEIGHT_THREADS", "3", 1);
  CHECK(grid_threads(c) == 3);
  ::setenv("PROBEWEIGHT_THREADS", "16", 1);
  CHECK(grid_threads(c) == 8);
  ::setenv("PROBEWEIGHT_THREADS", "many", 1);
  CHECK_THROWS_AS(grid_threads(c), ConfigError);
  ::unsetenv("PROBEWEIGHT_THREADS");
  CHECK(grid_threads(c) == 8);
}

}  // namespace
}  // namespace probeweight
