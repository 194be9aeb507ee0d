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

#include "probeweight/dataset.hpp"

#include <string>
#include <unordered_set>

#include "probeweight/errors.hpp"

namespace probeweight {

Dataset::Dataset(int num_classes, Index dim)
    : num_classes_(num_classes), dim_(dim) {
  if (num_classes < 1) throw ConfigError("dataset needs at least one class");
  if (dim < 1) throw ConfigError("dataset needs at least one feature");
}

void Dataset::add(Sample sample) {
  if (sample.features.size() != dim_) {
    throw ShapeError("sample " + std::to_string(sample.sample_id) + " has " +
                     std::to_string(sample.features.size()) +
                     " features, dataset expects " + std::to_string(dim_));
  }
  for (ClassId label : {sample.observed_label, sample.true_label}) {
    if (label < 0 || label >= num_classes_) {
      throw DomainError("label " + std::to_string(label) + " of sample " +
                        std::to_string(sample.sample_id) + " out of range");
    }
  }
  if (sample.is_noisy != (sample.observed_label != sample.true_label)) {
    throw DomainError("noisy flag of sample " +
                      std::to_string(sample.sample_id) +
                      " disagrees with its labels");
  }
  samples_.push_back(std::move(sample));
}

std::vector<Index> Dataset::class_counts() const {
  std::vector<Index> counts(num_classes_, 0);
  for (const auto& s : samples_) ++counts[s.observed_label];
  return counts;
}

std::vector<SampleId> Dataset::sample_ids() const {
  std::vector<SampleId> ids;
  ids.reserve(samples_.size());
  for (const auto& s : samples_) ids.push_back(s.sample_id);
  return ids;
}

void Dataset::validate() const {
  std::unordered_set<SampleId> seen;
  seen.reserve(samples_.size());
  for (const auto& s : samples_) {
    if (!seen.insert(s.sample_id).second) {
      throw ConfigError("duplicate sample id " + std::to_string(s.sample_id));
    }
  }
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.num_classes_ != b.num_classes_ || a.dim_ != b.dim_ ||
      a.samples_.size() != b.samples_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.samples_.size(); ++i) {
    const auto& x = a.samples_[i];
    const auto& y = b.samples_[i];
    if (x.sample_id != y.sample_id || x.observed_label != y.observed_label ||
        x.true_label != y.true_label || x.is_noisy != y.is_noisy ||
        x.features != y.features) {
      return false;
    }
  }
  return true;
}

TrainingView make_training_view(const Dataset& dataset) {
  TrainingView view;
  view.num_classes = dataset.num_classes();
  view.features.resize(dataset.size(), dataset.dim());
  view.labels.reserve(dataset.size());
  view.sample_ids.reserve(dataset.size());
  for (Index i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset[i];
    view.features.row(i) = s.features.transpose();
    view.labels.push_back(s.observed_label);
    view.sample_ids.push_back(s.sample_id);
  }
  return view;
}

Matrix gather_rows(const Matrix& source, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), source.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Index>(i)) = source.row(rows[i]);
  }
  return out;
}

std::vector<ClassId> gather_labels(std::span<const ClassId> source,
                                   std::span<const Index> rows) {
  std::vector<ClassId> out;
  out.reserve(rows.size());
  for (Index r : rows) out.push_back(source[r]);
  return out;
}

}  // namespace probeweight
