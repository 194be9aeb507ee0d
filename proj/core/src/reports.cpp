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

#include "probeweight/reports.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "probeweight/curve_io.hpp"
#include "probeweight/dataset_io.hpp"
#include "probeweight/errors.hpp"
#include "probeweight/io_util.hpp"

namespace probeweight {

namespace fs = std::filesystem;

std::string history_to_csv(const AllocHistory& history) {
  std::string out =
      "epoch,learning_rate,train_loss,meta_loss,test_accuracy,theta_updates,"
      "mean_step_ms\n";
  for (const auto& r : history.epochs) {
    out += std::to_string(r.epoch) + ',' + format_double(r.learning_rate) + ',' +
           format_double(r.train_loss) + ',' + format_double(r.meta_loss) + ',' +
           format_double(r.test_accuracy) + ',' +
           std::to_string(r.theta_updates) + ',' + format_double(r.mean_step_ms) +
           '\n';
  }
  return out;
}

namespace {

double parse_maybe_nan(std::string_view s) {
  if (s == "nan" || s == "-nan") return std::nan("");
  return parse_double(s);
}

std::vector<std::vector<std::string>> read_rows(std::string_view text,
                                                std::string_view header) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw FormatError("expected header '" + std::string(header) + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    for (auto f : split_csv_line(line)) fields.emplace_back(f);
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::vector<HistoryRow> history_from_csv(std::string_view text) {
  std::vector<HistoryRow> out;
  for (const auto& f : read_rows(
           text,
           "epoch,learning_rate,train_loss,meta_loss,test_accuracy,"
           "theta_updates,mean_step_ms")) {
    if (f.size() != 7) throw FormatError("history row needs 7 fields");
    HistoryRow r;
    r.epoch = static_cast<int>(parse_int(f[0]));
    r.learning_rate = parse_double(f[1]);
    r.train_loss = parse_maybe_nan(f[2]);
    r.meta_loss = parse_maybe_nan(f[3]);
    r.test_accuracy = parse_maybe_nan(f[4]);
    r.theta_updates = parse_int(f[5]);
    r.mean_step_ms = parse_double(f[6]);
    out.push_back(r);
  }
  return out;
}

std::string weights_to_csv(std::span<const SampleId> ids, const Vector& weights) {
  if (static_cast<Index>(ids.size()) != weights.size()) {
    throw ShapeError("one weight per sample id expected");
  }
  std::string out = "sample_id,weight\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out += std::to_string(ids[i]) + ',' +
           format_double(weights[static_cast<Index>(i)]) + '\n';
  }
  return out;
}

std::string predictions_to_csv(const Dataset& test,
                               std::span<const ClassId> predicted) {
  if (static_cast<Index>(predicted.size()) != test.size()) {
    throw ShapeError("one prediction per test sample expected");
  }
  std::string out = "sample_id,true_label,predicted\n";
  for (Index i = 0; i < test.size(); ++i) {
    out += std::to_string(test[i].sample_id) + ',' +
           std::to_string(test[i].true_label) + ',' +
           std::to_string(predicted[i]) + '\n';
  }
  return out;
}

std::string confusion_to_csv(const std::vector<std::vector<Index>>& confusion) {
  std::string out = "true_label";
  for (std::size_t k = 0; k < confusion.size(); ++k) {
    out += ",pred_" + std::to_string(k);
  }
  out += '\n';
  for (std::size_t t = 0; t < confusion.size(); ++t) {
    out += std::to_string(t);
    for (Index c : confusion[t]) out += ',' + std::to_string(c);
    out += '\n';
  }
  return out;
}

std::string group_weights_to_csv(const std::vector<GroupWeightStat>& groups) {
  std::string out = "class,is_noisy,count,mean_weight,std_weight\n";
  for (const auto& g : groups) {
    out += std::to_string(g.label) + (g.is_noisy ? ",1," : ",0,") +
           std::to_string(g.count) + ',' + format_double(g.mean) + ',' +
           format_double(g.stddev) + '\n';
  }
  return out;
}

std::string_view to_string(CurveGroup group) {
  switch (group) {
    case CurveGroup::kCleanHead:
      return "clean-head";
    case CurveGroup::kNoisyHead:
      return "noisy-head";
    case CurveGroup::kCleanTail:
      return "clean-tail";
    case CurveGroup::kNoisyTail:
      return "noisy-tail";
  }
  return "?";
}

std::vector<CurveGroupStat> curve_group_stats(const Dataset& train,
                                              const LossCurveMatrix& curves) {
  if (curves.sample_ids != train.sample_ids()) {
    throw ConfigError("curves are not row-aligned with the training set");
  }
  const ClassId tail = train.num_classes() - 1;
  std::vector<std::vector<Index>> members(4);
  for (Index i = 0; i < train.size(); ++i) {
    const auto& s = train[i];
    const int noisy = s.is_noisy ? 1 : 0;
    if (s.observed_label == 0) members[0 + noisy].push_back(i);
    if (s.observed_label == tail) members[2 + noisy].push_back(i);
  }
  std::vector<CurveGroupStat> out;
  for (int t = 0; t < curves.epochs(); ++t) {
    for (int g = 0; g < 4; ++g) {
      const auto& rows = members[g];
      if (rows.empty()) continue;
      double sum = 0.0;
      for (Index r : rows) sum += curves.losses(r, t);
      const double mean = sum / static_cast<double>(rows.size());
      double sq = 0.0;
      for (Index r : rows) {
        const double d = curves.losses(r, t) - mean;
        sq += d * d;
      }
      out.push_back({t, static_cast<CurveGroup>(g),
                     static_cast<Index>(rows.size()), mean,
                     sq / static_cast<double>(rows.size())});
    }
  }
  return out;
}

std::string curve_groups_to_csv(const std::vector<CurveGroupStat>& stats) {
  std::string out = "epoch,group,mean_loss,variance\n";
  for (const auto& s : stats) {
    out += std::to_string(s.epoch) + ',' + std::string(to_string(s.group)) +
           ',' + format_double(s.mean) + ',' + format_double(s.variance) + '\n';
  }
  return out;
}

double mean_step_ms(const std::vector<HistoryRow>& history) {
  double total = 0.0;
  std::int64_t steps = 0;
  std::int64_t prev = 0;
  for (const auto& r : history) {
    const std::int64_t d = r.theta_updates - prev;
    prev = r.theta_updates;
    if (d <= 0) continue;
    total += r.mean_step_ms * static_cast<double>(d);
    steps += d;
  }
  return steps > 0 ? total / static_cast<double>(steps) : 0.0;
}

std::vector<fs::path> emit_reports(const fs::path& run_dir) {
  const char* required[] = {run_files::kConfig, run_files::kTrain,
                            run_files::kHistory, run_files::kWeights,
                            run_files::kPredictions};
  std::string missing;
  for (const char* name : required) {
    if (!fs::exists(run_dir / name)) {
      missing += (missing.empty() ? "" : ", ") + (run_dir / name).string();
    }
  }
  if (!missing.empty()) throw IoError("missing run artifacts: " + missing);

  const auto config = nlohmann::json::parse(read_file(run_dir / run_files::kConfig));
  const Dataset train = load_dataset(run_dir / run_files::kTrain);

  // predictions -> confusion
  std::vector<ClassId> truth, predicted;
  for (const auto& f : read_rows(read_file(run_dir / run_files::kPredictions),
                                 "sample_id,true_label,predicted")) {
    if (f.size() != 3) throw FormatError("prediction row needs 3 fields");
    truth.push_back(static_cast<ClassId>(parse_int(f[1])));
    predicted.push_back(static_cast<ClassId>(parse_int(f[2])));
  }
  const auto metrics =
      metrics_from_predictions(truth, predicted, train.num_classes());

  // weights -> group statistics, matched by id
  std::unordered_map<SampleId, double> by_id;
  for (const auto& f :
       read_rows(read_file(run_dir / run_files::kWeights), "sample_id,weight")) {
    if (f.size() != 2) throw FormatError("weight row needs 2 fields");
    by_id[parse_uint(f[0])] = parse_double(f[1]);
  }
  Vector weights(train.size());
  for (Index i = 0; i < train.size(); ++i) {
    const auto it = by_id.find(train[i].sample_id);
    if (it == by_id.end()) {
      throw FormatError("no weight for training sample " +
                        std::to_string(train[i].sample_id));
    }
    weights[i] = it->second;
  }

  std::vector<fs::path> written;
  auto emit = [&](const char* name, const std::string& text) {
    write_file_atomic(run_dir / name, text);
    written.push_back(run_dir / name);
  };
  emit(run_files::kConfusion, confusion_to_csv(metrics.confusion));
  emit(run_files::kWeightsByGroup,
       group_weights_to_csv(group_weight_stats(train, weights)));

  if (fs::exists(run_dir / run_files::kCurves)) {
    emit(run_files::kCurveGroups,
         curve_groups_to_csv(curve_group_stats(
             train, load_curves(run_dir / run_files::kCurves))));
  }

  const auto history =
      history_from_csv(read_file(run_dir / run_files::kHistory));
  const int sl = config.value("skip_layers", 0);
  emit(run_files::kTiming, "skip_layers,mean_step_ms\n" + std::to_string(sl) +
                               ',' + format_double(mean_step_ms(history)) + '\n');
  return written;
}

}  // namespace probeweight
