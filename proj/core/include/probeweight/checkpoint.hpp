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

// Parameter checkpoints:
//
//   "PWCK" | u32 format version | u64 header length | JSON header |
//   u64 value count | f32 values
//
// The JSON header always carries "kind", "version", "config", "seed" and
// "step". Values are stored as f32, so a reload rounds parameters to single
// precision.

#ifndef PROBEWEIGHT_CHECKPOINT_HPP_
#define PROBEWEIGHT_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "probeweight/nn.hpp"
#include "probeweight/weight_net.hpp"

namespace probeweight {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::string kind;
  std::string config_json;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
};

std::string encode_checkpoint(const CheckpointMeta& meta, const Vector& values);
std::pair<CheckpointMeta, Vector> decode_checkpoint(std::string_view bytes);

void save_classifier_checkpoint(const std::filesystem::path& path,
                                const nn::ClassifierParams& params,
                                std::uint64_t seed, std::int64_t step);
nn::ClassifierParams load_classifier_checkpoint(
    const std::filesystem::path& path);

void save_weight_checkpoint(const std::filesystem::path& path,
                            const WeightModel& model, std::uint64_t seed,
                            std::int64_t step);
std::unique_ptr<WeightModel> load_weight_checkpoint(
    const std::filesystem::path& path);

}  // namespace probeweight

#endif  // PROBEWEIGHT_CHECKPOINT_HPP_
