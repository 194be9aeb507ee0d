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

#include "probeweight/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "probeweight/checkpoint.hpp"
#include "probeweight/curve_io.hpp"
#include "probeweight/dataset_io.hpp"
#include "probeweight/errors.hpp"
#include "probeweight/io_util.hpp"
#include "probeweight/reports.hpp"

namespace probeweight {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t {
  kPool = 1,
  kSplit,
  kBias,
  kMeta,
  kInit,
  kProbe,
  kWeightInit,
  kAlloc,
};

template <typename T>
std::vector<T> get_list(const json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<std::vector<T>>();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (imbalance_factors.empty() || noise_rates.empty() || methods.empty() ||
      seeds.empty()) {
    throw ConfigError("experiment grids and seed list must be nonempty");
  }
  for (double f : imbalance_factors) {
    if (!(f >= 1.0)) throw ConfigError("imbalance factors must be >= 1");
  }
  for (double p : noise_rates) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("noise rates must lie in [0, 1]");
  }
  if (meta_per_class < 1) throw ConfigError("meta_per_class must be positive");
  if (dataset.num_classes < 2) throw ConfigError("need at least two classes");
  probe.validate();
  alloc.validate(static_cast<int>(hidden.size()) + 1);
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config is not valid JSON: ") +
                      e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      c.dataset.num_classes = d.value("classes", c.dataset.num_classes);
      c.dataset.dim = d.value("dim", c.dataset.dim);
      c.dataset.train_per_class =
          d.value("train_per_class", c.dataset.train_per_class);
      c.dataset.meta_pool_per_class =
          d.value("meta_pool_per_class", c.dataset.meta_pool_per_class);
      c.dataset.test_per_class = d.value("test_per_class", c.dataset.test_per_class);
      c.dataset.geometry.radius = d.value("radius", c.dataset.geometry.radius);
      c.dataset.geometry.stddev = d.value("stddev", c.dataset.geometry.stddev);
      if (d.contains("centers")) {
        for (const auto& row : d["centers"]) {
          const auto v = row.get<std::vector<double>>();
          c.dataset.geometry.centers.push_back(
              Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
        }
      }
      c.dataset.noise_mode =
          parse_noise_mode(d.value("noise_mode", std::string("uniform")));
    }
    c.imbalance_factors = get_list(j, "imbalance_factors", c.imbalance_factors);
    c.noise_rates = get_list(j, "noise_rates", c.noise_rates);
    c.seeds = get_list(j, "seeds", c.seeds);
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j["methods"]) {
        c.methods.push_back(parse_method(m.get<std::string>()));
      }
    }
    if (j.contains("meta")) {
      c.meta_per_class = j["meta"].value("per_class", c.meta_per_class);
      c.meta_strategy = parse_meta_strategy(
          j["meta"].value("strategy", std::string("held_out_clean")));
    }
    if (j.contains("classifier")) {
      c.hidden = get_list(j["classifier"], "hidden", c.hidden);
    }
    if (j.contains("probe")) {
      const auto& p = j["probe"];
      c.probe.epochs = p.value("epochs", c.probe.epochs);
      c.probe.prefix_drop = p.value("prefix_drop", c.probe.prefix_drop);
      c.probe.batch_size = p.value("batch_size", c.probe.batch_size);
      c.probe.schedule.max_lr = p.value("max_lr", c.probe.schedule.max_lr);
      c.probe.schedule.base_lr = p.value("base_lr", c.probe.schedule.base_lr);
      c.probe.schedule.cycle_len = p.value("cycle_len", c.probe.schedule.cycle_len);
      c.probe.std_normalize = p.value("std_normalize", c.probe.std_normalize);
      c.probe.eval_pass = p.value("eval_pass", c.probe.eval_pass);
    }
    if (j.contains("alloc")) {
      const auto& a = j["alloc"];
      c.alloc.epochs = a.value("epochs", c.alloc.epochs);
      c.alloc.batch_size = a.value("batch_size", c.alloc.batch_size);
      c.alloc.meta_batch_size = a.value("meta_batch_size", c.alloc.meta_batch_size);
      c.alloc.classifier_lr.initial_lr = a.value("lr", c.alloc.classifier_lr.initial_lr);
      c.alloc.classifier_lr.milestones =
          get_list(a, "milestones", c.alloc.classifier_lr.milestones);
      c.alloc.classifier_lr.factors =
          get_list(a, "factors", c.alloc.classifier_lr.factors);
      c.alloc.weight_lr = a.value("weight_lr", c.alloc.weight_lr);
      c.alloc.skip_layers = a.value("skip_layers", c.alloc.skip_layers);
      if (a.contains("freeze_at") && !a["freeze_at"].is_null()) {
        c.alloc.freeze_at = a["freeze_at"].get<int>();
      }
    }
    if (j.contains("curvenet")) {
      c.embed_dim = j["curvenet"].value("embed_dim", c.embed_dim);
      c.encoder_hidden = j["curvenet"].value("encoder_hidden", c.encoder_hidden);
      c.head_hidden = j["curvenet"].value("head_hidden", c.head_hidden);
    }
    if (j.contains("transient")) {
      c.transient_hidden = j["transient"].value("hidden", c.transient_hidden);
    }
    c.output_dir = j.value("output_dir", std::string("runs"));
    c.threads = j.value("threads", 0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad experiment config field: ") + e.what());
  }
  c.validate();
  return c;
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
  json centers = json::array();
  for (const auto& v : c.dataset.geometry.centers) {
    centers.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  }
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(std::string(to_string(m)));
  json j = {
      {"dataset",
       {{"classes", c.dataset.num_classes},
        {"dim", c.dataset.dim},
        {"train_per_class", c.dataset.train_per_class},
        {"meta_pool_per_class", c.dataset.meta_pool_per_class},
        {"test_per_class", c.dataset.test_per_class},
        {"radius", c.dataset.geometry.radius},
        {"stddev", c.dataset.geometry.stddev},
        {"centers", centers},
        {"noise_mode", std::string(to_string(c.dataset.noise_mode))}}},
      {"imbalance_factors", c.imbalance_factors},
      {"noise_rates", c.noise_rates},
      {"seeds", c.seeds},
      {"methods", methods},
      {"meta",
       {{"per_class", c.meta_per_class},
        {"strategy", std::string(to_string(c.meta_strategy))}}},
      {"classifier", {{"hidden", c.hidden}}},
      {"probe",
       {{"epochs", c.probe.epochs},
        {"prefix_drop", c.probe.prefix_drop},
        {"batch_size", c.probe.batch_size},
        {"max_lr", c.probe.schedule.max_lr},
        {"base_lr", c.probe.schedule.base_lr},
        {"cycle_len", c.probe.schedule.cycle_len},
        {"std_normalize", c.probe.std_normalize},
        {"eval_pass", c.probe.eval_pass}}},
      {"alloc",
       {{"epochs", c.alloc.epochs},
        {"batch_size", c.alloc.batch_size},
        {"meta_batch_size", c.alloc.meta_batch_size},
        {"lr", c.alloc.classifier_lr.initial_lr},
        {"milestones", c.alloc.classifier_lr.milestones},
        {"factors", c.alloc.classifier_lr.factors},
        {"weight_lr", c.alloc.weight_lr},
        {"skip_layers", c.alloc.skip_layers},
        {"freeze_at", c.alloc.resolved_freeze_at()}}},
      {"curvenet",
       {{"embed_dim", c.embed_dim},
        {"encoder_hidden", c.encoder_hidden},
        {"head_hidden", c.head_hidden}}},
      {"transient", {{"hidden", c.transient_hidden}}},
  };
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = experiment_config_to_json(config);
  const auto crc = crc32_of(std::span<const unsigned char>(
      reinterpret_cast<const unsigned char*>(text.data()), text.size()));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", crc);
  return buf;
}

std::string CellSpec::name() const {
  return std::string(to_string(method)) + "_if" + format_double(imbalance_factor) +
         "_p" + format_double(noise_rate) + "_s" + std::to_string(seed);
}

std::vector<CellSpec> enumerate_cells(const ExperimentConfig& config) {
  std::vector<CellSpec> cells;
  for (Method m : config.methods) {
    for (double f : config.imbalance_factors) {
      for (double p : config.noise_rates) {
        for (auto s : config.seeds) cells.push_back({f, p, s, m});
      }
    }
  }
  return cells;
}

namespace {

nn::ParamLayout classifier_layout(const ExperimentConfig& config) {
  return nn::ParamLayout::dense(config.dataset.dim, config.hidden,
                                config.dataset.num_classes);
}

ProbeConfig probe_config(const ExperimentConfig& config, std::uint64_t seed) {
  ProbeConfig p = config.probe;
  p.seed = mix_seed(seed, kProbe);
  return p;
}

}  // namespace

CellData build_cell_data(const ExperimentConfig& config, const CellSpec& cell,
                         bool with_curves) {
  const auto& r = config.dataset;
  const Dataset pool = generate_blobs(
      r.num_classes, r.train_per_class + r.meta_pool_per_class + r.test_per_class,
      r.dim, r.geometry, mix_seed(cell.seed, kPool));
  const Index sizes[] = {r.train_per_class, r.meta_pool_per_class,
                         r.test_per_class};
  auto parts = partition_per_class(pool, sizes, mix_seed(cell.seed, kSplit));

  CellData data;
  BiasConfig bias{cell.imbalance_factor, cell.noise_rate, r.noise_mode,
                  mix_seed(cell.seed, kBias)};
  data.train = apply_bias(parts[0], bias);
  data.test = std::move(parts[2]);

  const bool low_loss = config.meta_strategy == MetaStrategy::kLowProbeLoss;
  if (with_curves || low_loss) {
    const auto init = init_classifier(classifier_layout(config),
                                      mix_seed(cell.seed, kInit));
    data.curves = probe_train(make_training_view(data.train), init,
                              probe_config(config, cell.seed));
  }
  if (low_loss) {
    data.meta = make_meta_set(data.train, *data.curves, config.meta_per_class,
                              config.probe.prefix_drop);
  } else {
    const auto ids = data.train.sample_ids();
    data.meta = make_meta_set(parts[1], config.meta_per_class,
                              mix_seed(cell.seed, kMeta), ids);
  }
  return data;
}

CellResult run_cell(const ExperimentConfig& config, const CellSpec& cell,
                    const fs::path& run_dir) {
  fs::create_directories(run_dir);
  const auto t_probe = std::chrono::steady_clock::now();
  const bool needs_curves = cell.method == Method::kCurveNet;
  const CellData data = build_cell_data(config, cell, needs_curves);
  const double probe_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_probe)
          .count();

  const auto train = make_training_view(data.train);
  const auto meta = make_training_view(data.meta);
  const auto init =
      init_classifier(classifier_layout(config), mix_seed(cell.seed, kInit));
  AllocConfig alloc = config.alloc;
  alloc.seed = mix_seed(cell.seed, kAlloc);

  AllocHooks hooks;
  const auto test_view = make_training_view(data.test);
  std::vector<ClassId> test_truth;
  for (const auto& s : data.test.samples()) test_truth.push_back(s.true_label);
  hooks.test_accuracy = [&](const nn::ClassifierParams& p) {
    return metrics_from_predictions(test_truth, nn::predict(p, test_view.features),
                                    data.test.num_classes())
        .accuracy;
  };

  const auto t_train = std::chrono::steady_clock::now();
  std::optional<NormalizedCurves> normalized;
  AllocResult result;
  switch (cell.method) {
    case Method::kCe:
      result = train_ce(train, init, alloc, hooks);
      break;
    case Method::kMwnetTransient:
      result = train_mwnet_transient(train, meta, init, alloc,
                                     mix_seed(cell.seed, kWeightInit),
                                     config.transient_hidden, hooks);
      break;
    case Method::kCurveNet: {
      normalized = normalize_curves(*data.curves, config.probe.prefix_drop,
                                    config.probe.std_normalize,
                                    data.train.num_classes());
      CurveNetConfig cn;
      cn.curve_length = normalized->curve_length();
      cn.num_classes = data.train.num_classes();
      cn.embed_dim = config.embed_dim;
      cn.encoder_hidden = config.encoder_hidden;
      cn.head_hidden = config.head_hidden;
      result = allocate_train(
          train, meta, &*normalized, init,
          std::make_unique<CurveNetModel>(
              init_curvenet(cn, mix_seed(cell.seed, kWeightInit))),
          alloc, hooks);
      break;
    }
  }
  const double train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_train)
          .count();

  const auto predicted = nn::predict(result.classifier, test_view.features);
  CellResult out;
  out.spec = cell;
  out.run_dir = run_dir;
  out.metrics =
      metrics_from_predictions(test_truth, predicted, data.test.num_classes());
  out.metrics.probe_seconds = probe_seconds;
  out.metrics.train_seconds = train_seconds;
  double step_total = 0.0;
  for (double ms : result.history.step_ms) step_total += ms;
  out.metrics.mean_step_ms =
      result.history.step_ms.empty()
          ? 0.0
          : step_total / static_cast<double>(result.history.step_ms.size());

  // artifacts
  json run_config = {{"method", std::string(to_string(cell.method))},
                     {"imbalance_factor", cell.imbalance_factor},
                     {"noise_rate", cell.noise_rate},
                     {"seed", cell.seed},
                     {"skip_layers", alloc.skip_layers},
                     {"freeze_at", alloc.resolved_freeze_at()},
                     {"experiment", json::parse(experiment_config_to_json(config))}};
  write_file_atomic(run_dir / run_files::kConfig, run_config.dump(2) + "\n");
  save_dataset(data.train, run_dir / run_files::kTrain,
               {data.train.num_classes(), data.train.dim(),
                BiasConfig{cell.imbalance_factor, cell.noise_rate,
                           config.dataset.noise_mode, mix_seed(cell.seed, kBias)},
                cell.seed, "train"});
  save_dataset(data.meta, run_dir / run_files::kMeta,
               {data.meta.num_classes(), data.meta.dim(), std::nullopt, cell.seed,
                "meta"});
  write_file_atomic(run_dir / run_files::kHistory, history_to_csv(result.history));
  write_file_atomic(run_dir / run_files::kWeights,
                    weights_to_csv(train.sample_ids, result.final_weights));
  write_file_atomic(run_dir / run_files::kPredictions,
                    predictions_to_csv(data.test, predicted));
  save_classifier_checkpoint(run_dir / run_files::kClassifier, result.classifier,
                             cell.seed, alloc.epochs);
  if (result.weight_model && result.weight_model->num_params() > 0) {
    save_weight_checkpoint(run_dir / run_files::kWeightNet, *result.weight_model,
                           cell.seed, alloc.epochs);
    auto frozen = result.weight_model->clone();
    frozen->params() = result.theta_at_freeze;
    save_weight_checkpoint(run_dir / run_files::kWeightNetAtFreeze, *frozen,
                           cell.seed, alloc.resolved_freeze_at());
  }
  if (data.curves) save_curves(*data.curves, run_dir / run_files::kCurves);

  json metrics = {{"correct", out.metrics.correct},
                  {"total", out.metrics.total},
                  {"accuracy", out.metrics.accuracy},
                  {"per_class_accuracy", out.metrics.per_class_accuracy},
                  {"confusion", out.metrics.confusion},
                  {"probe_seconds", probe_seconds},
                  {"train_seconds", train_seconds},
                  {"mean_step_ms", out.metrics.mean_step_ms}};
  write_file_atomic(run_dir / run_files::kMetrics, metrics.dump(2) + "\n");
  emit_reports(run_dir);
  return out;
}

int grid_threads(const ExperimentConfig& config) {
  int n = config.threads > 0
              ? config.threads
              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("PROBEWEIGHT_THREADS")) {
    try {
      const auto cap = parse_int(env);
      if (cap >= 1) n = std::min<int>(n, static_cast<int>(cap));
    } catch (const FormatError&) {
      throw ConfigError("PROBEWEIGHT_THREADS must be a positive integer");
    }
  }
  return std::max(n, 1);
}

namespace {

MetricsRecord load_metrics(const fs::path& run_dir) {
  const auto j = json::parse(read_file(run_dir / run_files::kMetrics));
  MetricsRecord m;
  m.correct = j.at("correct").get<Index>();
  m.total = j.at("total").get<Index>();
  m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.total);
  m.per_class_accuracy = j.at("per_class_accuracy").get<std::vector<double>>();
  m.confusion = j.at("confusion").get<std::vector<std::vector<Index>>>();
  m.probe_seconds = j.value("probe_seconds", 0.0);
  m.train_seconds = j.value("train_seconds", 0.0);
  m.mean_step_ms = j.value("mean_step_ms", 0.0);
  return m;
}

void write_manifest(const fs::path& path, const std::string& hash,
                    const std::set<std::string>& completed) {
  json j = {{"config_hash", hash}, {"completed", completed}};
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace

GridSummary run_grid(const ExperimentConfig& config) {
  config.validate();
  fs::create_directories(config.output_dir);
  const auto manifest_path = config.output_dir / "manifest.json";
  const std::string hash = config_hash(config);

  std::set<std::string> completed;
  if (fs::exists(manifest_path)) {
    const auto j = json::parse(read_file(manifest_path));
    if (j.value("config_hash", std::string()) != hash) {
      throw ConfigError("output directory " + config.output_dir.string() +
                        " holds runs for a different configuration (hash " +
                        j.value("config_hash", std::string("?")) + " vs " +
                        hash + "); refusing to resume");
    }
    completed = j.at("completed").get<std::set<std::string>>();
  } else {
    write_manifest(manifest_path, hash, completed);
  }
  write_file_atomic(config.output_dir / "experiment.json",
                    experiment_config_to_json(config) + "\n");

  const auto cells = enumerate_cells(config);
  GridSummary summary;
  summary.cells.resize(cells.size());
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      const auto& cell = cells[i];
      const auto dir = config.output_dir / cell.name();
      try {
        bool done;
        {
          std::lock_guard lock(mu);
          done = completed.contains(cell.name());
        }
        if (done) {
          summary.cells[i] = {cell, load_metrics(dir), dir, true};
          continue;
        }
        summary.cells[i] = run_cell(config, cell, dir);
        std::lock_guard lock(mu);
        completed.insert(cell.name());
        write_manifest(manifest_path, hash, completed);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int n_threads =
      std::min<int>(grid_threads(config), static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  std::string csv =
      "kind,method,imbalance_factor,noise_rate,seed,correct,total,accuracy\n";
  std::map<Method, std::vector<double>> by_method;
  for (const auto& c : summary.cells) {
    if (!c.reused) ++summary.trained;
    by_method[c.spec.method].push_back(c.metrics.accuracy);
    csv += "run," + std::string(to_string(c.spec.method)) + ',' +
           format_double(c.spec.imbalance_factor) + ',' +
           format_double(c.spec.noise_rate) + ',' + std::to_string(c.spec.seed) +
           ',' + std::to_string(c.metrics.correct) + ',' +
           std::to_string(c.metrics.total) + ',' +
           format_double(c.metrics.accuracy) + '\n';
  }
  for (Method m : config.methods) {
    const double ma = mean_accuracy(by_method[m]);
    summary.mean_accuracy[m] = ma;
    csv += "MA," + std::string(to_string(m)) + ",,,,,," + format_double(ma) + '\n';
  }
  summary.summary_csv = config.output_dir / "summary.csv";
  write_file_atomic(summary.summary_csv, csv);
  return summary;
}

std::vector<SummaryRow> read_summary(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) ||
      line != "kind,method,imbalance_factor,noise_rate,seed,correct,total,accuracy") {
    throw FormatError("unexpected summary header in " + path.string());
  }
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw FormatError("summary row needs 8 fields");
    SummaryRow r;
    r.kind = std::string(f[0]);
    r.method = std::string(f[1]);
    if (r.kind == "run") {
      r.imbalance_factor = parse_double(f[2]);
      r.noise_rate = parse_double(f[3]);
      r.seed = parse_uint(f[4]);
      r.correct = parse_int(f[5]);
      r.total = parse_int(f[6]);
    } else if (r.kind != "MA") {
      throw FormatError("unknown summary row kind '" + r.kind + "'");
    }
    r.accuracy = parse_double(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::map<std::string, double> mean_accuracy_by_method(
    const std::vector<SummaryRow>& rows) {
  std::map<std::string, std::vector<double>> acc;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (r.kind != "run") continue;
    acc[r.method].push_back(r.accuracy);
  }
  std::map<std::string, double> out;
  for (const auto& [m, a] : acc) out[m] = mean_accuracy(a);
  return out;
}

}  // namespace probeweight
