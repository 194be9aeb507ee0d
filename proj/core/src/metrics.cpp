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

#include "probeweight/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "probeweight/errors.hpp"

namespace probeweight {

MetricsRecord metrics_from_predictions(std::span<const ClassId> truth,
                                       std::span<const ClassId> predicted,
                                       int num_classes) {
  if (truth.size() != predicted.size()) {
    throw ShapeError("prediction count does not match label count");
  }
  MetricsRecord m;
  m.confusion.assign(num_classes, std::vector<Index>(num_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= num_classes || predicted[i] < 0 ||
        predicted[i] >= num_classes) {
      throw DomainError("class id outside confusion matrix");
    }
    ++m.confusion[truth[i]][predicted[i]];
  }
  m.total = static_cast<Index>(truth.size());
  m.per_class_accuracy.resize(num_classes, 0.0);
  for (int k = 0; k < num_classes; ++k) {
    const Index row = std::accumulate(m.confusion[k].begin(),
                                      m.confusion[k].end(), Index{0});
    m.correct += m.confusion[k][k];
    m.per_class_accuracy[k] =
        row > 0 ? static_cast<double>(m.confusion[k][k]) / static_cast<double>(row)
                : 0.0;
  }
  m.accuracy = m.total > 0
                   ? static_cast<double>(m.correct) / static_cast<double>(m.total)
                   : 0.0;
  return m;
}

MetricsRecord evaluate_classifier(const nn::ClassifierParams& params,
                                  const Dataset& test) {
  std::vector<ClassId> truth;
  truth.reserve(test.size());
  for (const auto& s : test.samples()) truth.push_back(s.true_label);
  const auto view = make_training_view(test);
  return metrics_from_predictions(truth, nn::predict(params, view.features),
                                  test.num_classes());
}

double weight_auc(std::span<const double> positive,
                  std::span<const double> negative) {
  if (positive.empty() || negative.empty()) {
    throw DomainError("AUC needs both positive and negative scores");
  }
  // Mann-Whitney U with midranks for ties.
  struct Item {
    double score;
    bool pos;
  };
  std::vector<Item> items;
  items.reserve(positive.size() + negative.size());
  for (double s : positive) items.push_back({s, true});
  for (double s : negative) items.push_back({s, false});
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.score < b.score; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j < items.size() && items[j].score == items[i].score) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (items[k].pos) rank_sum += midrank;
    }
    i = j;
  }
  const double np = static_cast<double>(positive.size());
  const double nn = static_cast<double>(negative.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<GroupWeightStat> group_weight_stats(const Dataset& train,
                                                const Vector& weights) {
  if (weights.size() != train.size()) {
    throw ShapeError("one weight per training sample expected");
  }
  const int k = train.num_classes();
  std::vector<double> sum(2 * k, 0.0), sq(2 * k, 0.0);
  std::vector<Index> count(2 * k, 0);
  for (Index i = 0; i < train.size(); ++i) {
    const auto& s = train[i];
    const int g = 2 * s.observed_label + (s.is_noisy ? 1 : 0);
    sum[g] += weights[i];
    ++count[g];
  }
  for (Index i = 0; i < train.size(); ++i) {
    const auto& s = train[i];
    const int g = 2 * s.observed_label + (s.is_noisy ? 1 : 0);
    const double d = weights[i] - sum[g] / static_cast<double>(count[g]);
    sq[g] += d * d;
  }
  std::vector<GroupWeightStat> out;
  for (int g = 0; g < 2 * k; ++g) {
    if (count[g] == 0) continue;
    GroupWeightStat st;
    st.label = g / 2;
    st.is_noisy = (g % 2) == 1;
    st.count = count[g];
    st.mean = sum[g] / static_cast<double>(count[g]);
    st.stddev = std::sqrt(sq[g] / static_cast<double>(count[g]));
    out.push_back(st);
  }
  return out;
}

double mean_accuracy(std::span<const double> accuracies) {
  if (accuracies.empty()) throw DomainError("mean accuracy of an empty grid");
  double total = 0.0;
  for (double a : accuracies) total += a;
  return total / static_cast<double>(accuracies.size());
}

}  // namespace probeweight
