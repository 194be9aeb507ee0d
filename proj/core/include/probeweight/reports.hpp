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

// Run directories and the reports derived from them.
//
// A run directory holds the artifacts written by a training run:
//   config.json        run configuration (method, skip_layers, ...)
//   train.csv (+json)  biased training set, including evaluation metadata
//   history.csv        per-epoch training history
//   weights.csv        final weight of every training sample
//   predictions.csv    test-set predictions
//   classifier.ckpt    classifier parameters
//   curvenet.ckpt      weighting model parameters (methods with one)
//   curves.pacv        probe loss curves (curve-conditioned runs)
//
// emit_reports turns them into confusion.csv, weights_by_group.csv,
// curve_groups.csv and timing.csv. Reports are the only place where true
// labels and noise flags of training samples are read.

#ifndef PROBEWEIGHT_REPORTS_HPP_
#define PROBEWEIGHT_REPORTS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "probeweight/curves.hpp"
#include "probeweight/dataset.hpp"
#include "probeweight/meta_alloc.hpp"
#include "probeweight/metrics.hpp"

namespace probeweight {

namespace run_files {
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kTrain = "train.csv";
inline constexpr const char* kMeta = "meta.csv";
inline constexpr const char* kHistory = "history.csv";
inline constexpr const char* kWeights = "weights.csv";
inline constexpr const char* kPredictions = "predictions.csv";
inline constexpr const char* kClassifier = "classifier.ckpt";
inline constexpr const char* kWeightNet = "curvenet.ckpt";
inline constexpr const char* kWeightNetAtFreeze = "curvenet_freeze.ckpt";
inline constexpr const char* kCurves = "curves.pacv";
inline constexpr const char* kMetrics = "metrics.json";
inline constexpr const char* kConfusion = "confusion.csv";
inline constexpr const char* kWeightsByGroup = "weights_by_group.csv";
inline constexpr const char* kCurveGroups = "curve_groups.csv";
inline constexpr const char* kTiming = "timing.csv";
}  // namespace run_files

std::string history_to_csv(const AllocHistory& history);

struct HistoryRow {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double meta_loss = 0.0;
  double test_accuracy = 0.0;
  std::int64_t theta_updates = 0;
  double mean_step_ms = 0.0;
};
std::vector<HistoryRow> history_from_csv(std::string_view text);

std::string weights_to_csv(std::span<const SampleId> ids, const Vector& weights);
std::string predictions_to_csv(const Dataset& test,
                               std::span<const ClassId> predicted);

std::string confusion_to_csv(const std::vector<std::vector<Index>>& confusion);
std::string group_weights_to_csv(const std::vector<GroupWeightStat>& groups);

enum class CurveGroup { kCleanHead, kNoisyHead, kCleanTail, kNoisyTail };
std::string_view to_string(CurveGroup group);

struct CurveGroupStat {
  int epoch = 0;
  CurveGroup group = CurveGroup::kCleanHead;
  Index count = 0;
  double mean = 0.0;
  double variance = 0.0;  // population variance
};

// Head is observed class 0, tail is observed class K - 1. Empty groups are
// omitted.
std::vector<CurveGroupStat> curve_group_stats(const Dataset& train,
                                              const LossCurveMatrix& curves);
std::string curve_groups_to_csv(const std::vector<CurveGroupStat>& stats);

// Mean meta-step time over all recorded steps.
double mean_step_ms(const std::vector<HistoryRow>& history);

// Writes the four report files and returns their paths. Throws IoError naming
// every absent required artifact.
std::vector<std::filesystem::path> emit_reports(
    const std::filesystem::path& run_dir);

}  // namespace probeweight

#endif  // PROBEWEIGHT_REPORTS_HPP_
