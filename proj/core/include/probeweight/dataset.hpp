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

#ifndef PROBEWEIGHT_DATASET_HPP_
#define PROBEWEIGHT_DATASET_HPP_

#include <cstdint>
#include <vector>

#include "probeweight/nn.hpp"

namespace probeweight {

using SampleId = std::uint64_t;

// One labelled example. true_label and is_noisy are evaluation metadata: the
// training entry points only ever see a TrainingView, which omits them.
struct Sample {
  Vector features;
  ClassId observed_label = 0;
  ClassId true_label = 0;
  bool is_noisy = false;
  SampleId sample_id = 0;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(int num_classes, Index dim);

  int num_classes() const { return num_classes_; }
  Index dim() const { return dim_; }
  Index size() const { return static_cast<Index>(samples_.size()); }
  bool empty() const { return samples_.empty(); }

  const std::vector<Sample>& samples() const { return samples_; }
  const Sample& operator[](Index i) const { return samples_[i]; }

  // Checks label range, feature width and the noisy-flag invariant.
  void add(Sample sample);
  void reserve(Index n) { samples_.reserve(n); }

  // Per-class sample counts by observed label.
  std::vector<Index> class_counts() const;
  std::vector<SampleId> sample_ids() const;

  // Throws ConfigError on duplicate ids.
  void validate() const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  int num_classes_ = 0;
  Index dim_ = 0;
  std::vector<Sample> samples_;
};

// What the training loops are allowed to read: features, observed labels and
// ids. Row order follows the source dataset.
struct TrainingView {
  Matrix features;
  std::vector<ClassId> labels;
  std::vector<SampleId> sample_ids;
  int num_classes = 0;

  Index size() const { return features.rows(); }
};

TrainingView make_training_view(const Dataset& dataset);

// Gathers rows of a view into a batch.
Matrix gather_rows(const Matrix& source, std::span<const Index> rows);
std::vector<ClassId> gather_labels(std::span<const ClassId> source,
                                   std::span<const Index> rows);

}  // namespace probeweight

#endif  // PROBEWEIGHT_DATASET_HPP_
