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

#ifndef PROBEWEIGHT_CURVES_HPP_
#define PROBEWEIGHT_CURVES_HPP_

#include <vector>

#include "probeweight/dataset.hpp"

namespace probeweight {

using CurveLosses =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-sample training loss recorded at every probing epoch, one row per
// sample in the order of sample_ids.
struct LossCurveMatrix {
  CurveLosses losses;
  std::vector<SampleId> sample_ids;
  std::vector<ClassId> observed_labels;

  Index num_samples() const { return losses.rows(); }
  int epochs() const { return static_cast<int>(losses.cols()); }

  friend bool operator==(const LossCurveMatrix&, const LossCurveMatrix&) =
      default;
};

// Curves with the first prefix_drop epochs removed and the per-(class, epoch)
// mean subtracted, optionally divided by the per-(class, epoch) standard
// deviation.
struct NormalizedCurves {
  Matrix features;      // [N x C]
  Matrix class_means;   // [K x C]
  Matrix class_stddev;  // [K x C], empty unless std_normalize was set
  int prefix_drop = 0;
  std::vector<SampleId> sample_ids;
  std::vector<ClassId> observed_labels;

  Index num_samples() const { return features.rows(); }
  Index curve_length() const { return features.cols(); }
};

inline constexpr double kStddevFloor = 1e-8;

// Groups by observed label. Population statistics (divide by class size).
NormalizedCurves normalize_curves(const LossCurveMatrix& curves, int prefix_drop,
                                  bool std_normalize, int num_classes);

// Row-wise mean of columns [prefix_drop, T).
Vector mean_truncated_loss(const LossCurveMatrix& curves, int prefix_drop);

}  // namespace probeweight

#endif  // PROBEWEIGHT_CURVES_HPP_
