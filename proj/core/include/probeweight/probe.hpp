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

#ifndef PROBEWEIGHT_PROBE_HPP_
#define PROBEWEIGHT_PROBE_HPP_

#include <cstdint>
#include <functional>
#include <span>

#include "probeweight/curves.hpp"
#include "probeweight/dataset.hpp"
#include "probeweight/nn.hpp"
#include "probeweight/schedule.hpp"

namespace probeweight {

struct ProbeConfig {
  int epochs = 60;
  int prefix_drop = 5;
  Index batch_size = 128;
  CyclicalSchedule schedule;
  std::uint64_t seed = 0;
  bool std_normalize = false;
  // Record an end-of-epoch evaluation over the whole set instead of the loss
  // seen while training.
  bool eval_pass = false;

  void validate() const;
};

// Seen once per minibatch, before the update is applied.
struct ProbeBatchEvent {
  int epoch = 0;
  std::span<const Index> rows;
  const nn::ClassifierParams* params = nullptr;
  const Vector* losses = nullptr;
};

using ProbeObserver = std::function<void(const ProbeBatchEvent&)>;

// Trains with SGD at cyclical_lr_at(epoch) and records each sample's
// cross-entropy at every epoch. By default the recorded value is the loss in
// the forward pass of the minibatch that contains the sample, before that
// minibatch's update.
LossCurveMatrix probe_train(const TrainingView& data,
                            const nn::ClassifierParams& init,
                            const ProbeConfig& config,
                            const ProbeObserver& observer = {});

}  // namespace probeweight

#endif  // PROBEWEIGHT_PROBE_HPP_
