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

#ifndef PROBEWEIGHT_BASELINES_HPP_
#define PROBEWEIGHT_BASELINES_HPP_

#include <cstdint>
#include <string_view>

#include "probeweight/meta_alloc.hpp"

namespace probeweight {

enum class Method { kCe, kMwnetTransient, kCurveNet };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

// Plain SGD on the mean cross-entropy with the same batch order, schedule and
// history bookkeeping as allocate_train.
AllocResult train_ce(const TrainingView& train, const nn::ClassifierParams& init,
                     const AllocConfig& config, const AllocHooks& hooks = {});

// The bilevel loop with the weight net fed each sample's current loss.
AllocResult train_mwnet_transient(const TrainingView& train,
                                  const TrainingView& meta,
                                  const nn::ClassifierParams& init,
                                  const AllocConfig& config,
                                  std::uint64_t weight_net_seed,
                                  Index hidden = TransientLossNet::kDefaultHidden,
                                  const AllocHooks& hooks = {});

}  // namespace probeweight

#endif  // PROBEWEIGHT_BASELINES_HPP_
