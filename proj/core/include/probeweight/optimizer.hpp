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

#ifndef PROBEWEIGHT_OPTIMIZER_HPP_
#define PROBEWEIGHT_OPTIMIZER_HPP_

#include <cstdint>

#include "probeweight/nn.hpp"

namespace probeweight {

enum class OptimizerKind { kSgd, kAdam };

// Optimizer hyperparameters plus the running state (momentum buffer or Adam
// moments). Moment buffers are sized on the first step and must keep that
// shape afterwards.
class OptimizerState {
 public:
  static OptimizerState sgd(double lr, double momentum = 0.0);
  static OptimizerState adam(double lr, double beta1 = 0.9,
                             double beta2 = 0.999, double eps = 1e-8);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr);
  std::int64_t step_count() const { return steps_; }

  // In-place update of params with grads.
  void step(Eigen::Ref<Vector> params, const Vector& grads);

 private:
  OptimizerState(OptimizerKind kind, double lr);

  OptimizerKind kind_;
  double lr_;
  double momentum_ = 0.0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::int64_t steps_ = 0;
  Vector first_;   // sgd velocity or adam m
  Vector second_;  // adam v
};

void optimizer_step(OptimizerState& state, nn::ClassifierParams& params,
                    const nn::GradientBundle& grads);

}  // namespace probeweight

#endif  // PROBEWEIGHT_OPTIMIZER_HPP_
