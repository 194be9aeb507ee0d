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

#include "probeweight/finite_diff.hpp"

#include <algorithm>

#include "probeweight/errors.hpp"

namespace probeweight {

Vector finite_diff_grad(const std::function<double(const Vector&)>& objective,
                        const Vector& x, double h) {
  if (!(h > 0.0)) throw DomainError("finite difference step must be positive");
  Vector grad(x.size());
  Vector probe = x;
  for (Index j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double up = objective(probe);
    probe[j] = x[j] - h;
    const double down = objective(probe);
    probe[j] = x[j];
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

nn::GradientBundle finite_diff_grad(
    const std::function<double(const nn::ClassifierParams&)>& objective,
    const nn::ClassifierParams& params, double h) {
  const auto& layout = params.layout();
  Vector g = finite_diff_grad(
      [&](const Vector& v) { return objective(nn::ClassifierParams(layout, v)); },
      params.values(), h);
  return nn::GradientBundle(layout, std::move(g));
}

double relative_error(const Vector& a, const Vector& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale == 0.0) return 0.0;
  return (a - b).norm() / scale;
}

}  // namespace probeweight
