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

#include "probeweight/optimizer.hpp"

#include <cmath>
#include <string>

#include "probeweight/errors.hpp"

namespace probeweight {

OptimizerState::OptimizerState(OptimizerKind kind, double lr)
    : kind_(kind), lr_(lr) {
  set_learning_rate(lr);
}

OptimizerState OptimizerState::sgd(double lr, double momentum) {
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("sgd momentum must lie in [0, 1)");
  }
  OptimizerState s(OptimizerKind::kSgd, lr);
  s.momentum_ = momentum;
  return s;
}

OptimizerState OptimizerState::adam(double lr, double beta1, double beta2,
                                    double eps) {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
      !(eps > 0.0)) {
    throw ConfigError("invalid adam hyperparameters");
  }
  OptimizerState s(OptimizerKind::kAdam, lr);
  s.beta1_ = beta1;
  s.beta2_ = beta2;
  s.eps_ = eps;
  return s;
}

void OptimizerState::set_learning_rate(double lr) {
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw ConfigError("learning rate must be positive, got " +
                      std::to_string(lr));
  }
  lr_ = lr;
}

void OptimizerState::step(Eigen::Ref<Vector> params, const Vector& grads) {
  if (grads.size() != params.size()) {
    throw ShapeError("gradient size does not match parameter size");
  }
  if (!grads.allFinite()) throw NumericError("non-finite gradient");
  if (first_.size() == 0) {
    first_ = Vector::Zero(params.size());
    if (kind_ == OptimizerKind::kAdam) second_ = Vector::Zero(params.size());
  } else if (first_.size() != params.size()) {
    throw ShapeError("optimizer state was sized for a different parameter set");
  }
  ++steps_;
  if (kind_ == OptimizerKind::kSgd) {
    if (momentum_ == 0.0) {
      params -= lr_ * grads;
      return;
    }
    first_ = momentum_ * first_ + grads;
    params -= lr_ * first_;
    return;
  }
  first_ = beta1_ * first_ + (1.0 - beta1_) * grads;
  second_ = beta2_ * second_ + (1.0 - beta2_) * grads.cwiseAbs2();
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(beta1_, t);
  const double c2 = 1.0 - std::pow(beta2_, t);
  params.array() -= lr_ * (first_.array() / c1) /
                    ((second_.array() / c2).sqrt() + eps_);
}

void optimizer_step(OptimizerState& state, nn::ClassifierParams& params,
                    const nn::GradientBundle& grads) {
  if (!(grads.layout() == params.layout())) {
    throw ShapeError("gradient layout does not match classifier");
  }
  state.step(params.values(), grads.values());
}

}  // namespace probeweight
