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

// Hand-rolled generators shared by the unit tests.

#ifndef PROBEWEIGHT_TESTS_TEST_SUPPORT_HPP_
#define PROBEWEIGHT_TESTS_TEST_SUPPORT_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include "probeweight/dataset.hpp"
#include "probeweight/nn.hpp"

namespace probeweight::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  Index index(Index lo, Index hi) {  // inclusive
    return std::uniform_int_distribution<Index>(lo, hi)(rng_);
  }
  ClassId label(int num_classes) {
    return static_cast<ClassId>(index(0, num_classes - 1));
  }
  Matrix matrix(Index rows, Index cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) m(i, j) = uniform(-scale, scale);
    }
    return m;
  }
  Vector vector(Index n, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  std::vector<ClassId> labels(Index n, int num_classes) {
    std::vector<ClassId> out(static_cast<std::size_t>(n));
    for (auto& y : out) y = label(num_classes);
    return out;
  }
  // input -> hidden... -> classes with 1..max_hidden layers of width 1..max_width.
  nn::ParamLayout layout(Index input, int classes, int max_hidden,
                         Index max_width) {
    std::vector<Index> hidden(static_cast<std::size_t>(index(0, max_hidden)));
    for (auto& h : hidden) h = index(1, max_width);
    return nn::ParamLayout::dense(input, hidden, classes);
  }
  nn::ClassifierParams params(const nn::ParamLayout& layout, double scale = 1.0) {
    return nn::ClassifierParams(layout, vector(layout.size(), -scale, scale));
  }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline TrainingView random_view(Gen& gen, Index n, Index dim, int classes,
                                SampleId first_id = 0) {
  TrainingView v;
  v.features = gen.matrix(n, dim, 2.0);
  v.labels = gen.labels(n, classes);
  for (Index i = 0; i < n; ++i) v.sample_ids.push_back(first_id + i);
  v.num_classes = classes;
  return v;
}

}  // namespace probeweight::testing

#endif  // PROBEWEIGHT_TESTS_TEST_SUPPORT_HPP_
