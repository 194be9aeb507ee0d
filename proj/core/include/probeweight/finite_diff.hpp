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

#ifndef PROBEWEIGHT_FINITE_DIFF_HPP_
#define PROBEWEIGHT_FINITE_DIFF_HPP_

#include <functional>

#include "probeweight/nn.hpp"

namespace probeweight {

// Central differences (f(x + h e_j) - f(x - h e_j)) / 2h for every coordinate.
Vector finite_diff_grad(const std::function<double(const Vector&)>& objective,
                        const Vector& x, double h);

nn::GradientBundle finite_diff_grad(
    const std::function<double(const nn::ClassifierParams&)>& objective,
    const nn::ClassifierParams& params, double h);

// ||a - b|| / max(||a||, ||b||); zero when both vectors vanish.
double relative_error(const Vector& a, const Vector& b);

}  // namespace probeweight

#endif  // PROBEWEIGHT_FINITE_DIFF_HPP_
