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

#include "probeweight/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "probeweight/errors.hpp"

namespace probeweight {

void CyclicalSchedule::validate() const {
  if (!(base_lr > 0.0) || !(base_lr < max_lr) || !std::isfinite(max_lr)) {
    throw ConfigError("cyclical schedule needs 0 < base_lr < max_lr");
  }
  if (cycle_len < 2) throw ConfigError("cycle length must be at least 2");
}

double cyclical_lr_at(const CyclicalSchedule& schedule, int epoch) {
  if (epoch < 0) throw DomainError("epoch must be non-negative");
  const int pos = epoch % schedule.cycle_len;
  const double frac =
      static_cast<double>(pos) / static_cast<double>(schedule.cycle_len - 1);
  return schedule.max_lr - (schedule.max_lr - schedule.base_lr) * frac;
}

void StepSchedule::validate() const {
  if (!(initial_lr > 0.0)) throw ConfigError("initial lr must be positive");
  if (milestones.size() != factors.size()) {
    throw ConfigError("need one decay factor per milestone");
  }
  if (!std::is_sorted(milestones.begin(), milestones.end())) {
    throw ConfigError("decay milestones must be sorted");
  }
  for (double f : factors) {
    if (!(f > 0.0)) throw ConfigError("decay factors must be positive");
  }
}

double StepSchedule::at(int epoch) const {
  double lr = initial_lr;
  for (std::size_t j = 0; j < milestones.size(); ++j) {
    if (epoch >= milestones[j]) lr *= factors[j];
  }
  return lr;
}

}  // namespace probeweight
