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

#include "probeweight/curves.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "probeweight/errors.hpp"

namespace probeweight {

NormalizedCurves normalize_curves(const LossCurveMatrix& curves, int prefix_drop,
                                  bool std_normalize, int num_classes) {
  const int epochs = curves.epochs();
  if (prefix_drop < 0 || prefix_drop >= epochs) {
    throw DomainError("prefix drop " + std::to_string(prefix_drop) +
                      " must lie in [0, " + std::to_string(epochs) + ")");
  }
  if (static_cast<Index>(curves.observed_labels.size()) != curves.num_samples()) {
    throw ShapeError("curve labels do not match curve rows");
  }
  const Index n = curves.num_samples();
  const Index c = epochs - prefix_drop;

  std::vector<Index> counts(num_classes, 0);
  for (ClassId y : curves.observed_labels) {
    if (y < 0 || y >= num_classes) {
      throw DomainError("curve label " + std::to_string(y) + " out of range");
    }
    ++counts[y];
  }
  for (int k = 0; k < num_classes; ++k) {
    if (counts[k] == 0) {
      throw DomainError("class " + std::to_string(k) + " has no curves");
    }
  }

  NormalizedCurves out;
  out.prefix_drop = prefix_drop;
  out.sample_ids = curves.sample_ids;
  out.observed_labels = curves.observed_labels;
  out.features =
      curves.losses.rightCols(c).cast<double>();

  out.class_means = Matrix::Zero(num_classes, c);
  for (Index i = 0; i < n; ++i) {
    out.class_means.row(curves.observed_labels[i]) += out.features.row(i);
  }
  for (int k = 0; k < num_classes; ++k) {
    out.class_means.row(k) /= static_cast<double>(counts[k]);
  }
  for (Index i = 0; i < n; ++i) {
    out.features.row(i) -= out.class_means.row(curves.observed_labels[i]);
  }

  if (std_normalize) {
    out.class_stddev = Matrix::Zero(num_classes, c);
    for (Index i = 0; i < n; ++i) {
      out.class_stddev.row(curves.observed_labels[i]) +=
          out.features.row(i).cwiseAbs2();
    }
    for (int k = 0; k < num_classes; ++k) {
      out.class_stddev.row(k) =
          (out.class_stddev.row(k) / static_cast<double>(counts[k]))
              .cwiseSqrt()
              .cwiseMax(kStddevFloor);
    }
    for (Index i = 0; i < n; ++i) {
      out.features.row(i).array() /=
          out.class_stddev.row(curves.observed_labels[i]).array();
    }
  }
  return out;
}

Vector mean_truncated_loss(const LossCurveMatrix& curves, int prefix_drop) {
  if (prefix_drop < 0 || prefix_drop >= curves.epochs()) {
    throw DomainError("prefix drop out of range");
  }
  const Index c = curves.epochs() - prefix_drop;
  return curves.losses.rightCols(c).cast<double>().rowwise().mean();
}

}  // namespace probeweight
