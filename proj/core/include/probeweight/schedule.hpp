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

#ifndef PROBEWEIGHT_SCHEDULE_HPP_
#define PROBEWEIGHT_SCHEDULE_HPP_

#include <vector>

namespace probeweight {

// Restarting triangular decay: within each cycle the rate falls linearly from
// max_lr at position 0 to base_lr at position cycle_len - 1, then jumps back.
struct CyclicalSchedule {
  double base_lr = 0.001;
  double max_lr = 0.1;
  int cycle_len = 10;

  void validate() const;
};

double cyclical_lr_at(const CyclicalSchedule& schedule, int epoch);

// Piecewise constant: initial_lr times the product of factors[j] for every
// milestone[j] <= epoch.
struct StepSchedule {
  double initial_lr = 0.1;
  std::vector<int> milestones = {30, 45};
  std::vector<double> factors = {0.1, 0.1};

  void validate() const;
  double at(int epoch) const;
};

}  // namespace probeweight

#endif  // PROBEWEIGHT_SCHEDULE_HPP_
