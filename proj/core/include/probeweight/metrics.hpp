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

#ifndef PROBEWEIGHT_METRICS_HPP_
#define PROBEWEIGHT_METRICS_HPP_

#include <span>
#include <vector>

#include "probeweight/dataset.hpp"
#include "probeweight/meta_alloc.hpp"
#include "probeweight/nn.hpp"

namespace probeweight {

struct MetricsRecord {
  Index correct = 0;
  Index total = 0;
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  // confusion[t][p]: test samples of true class t predicted as p.
  std::vector<std::vector<Index>> confusion;
  double probe_seconds = 0.0;
  double train_seconds = 0.0;
  double mean_step_ms = 0.0;
};

MetricsRecord metrics_from_predictions(std::span<const ClassId> truth,
                                       std::span<const ClassId> predicted,
                                       int num_classes);

// Scores against true labels; intended for clean test sets.
MetricsRecord evaluate_classifier(const nn::ClassifierParams& params,
                                  const Dataset& test);

// Probability that a random positive scores above a random negative, ties
// counted as one half.
double weight_auc(std::span<const double> positive,
                  std::span<const double> negative);

// Mean and population std of weights per (observed label, is_noisy).
// Groups with no samples are omitted.
std::vector<GroupWeightStat> group_weight_stats(const Dataset& train,
                                                const Vector& weights);

// Unweighted mean of the grid's overall accuracies.
double mean_accuracy(std::span<const double> accuracies);

}  // namespace probeweight

#endif  // PROBEWEIGHT_METRICS_HPP_
