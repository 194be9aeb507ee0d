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

// Synthetic data and the two bias protocols: exponential class imbalance
// (n_i = n_0 * mu^i with mu = IF^(-1/(K-1))) and label corruption with
// probability p, either uniform over the other classes or restricted to two
// fixed classes per true class ("flip2").

#ifndef PROBEWEIGHT_BIASGEN_HPP_
#define PROBEWEIGHT_BIASGEN_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probeweight/curves.hpp"
#include "probeweight/dataset.hpp"

namespace probeweight {

enum class NoiseMode { kUniform, kFlip2 };

std::string_view to_string(NoiseMode mode);
NoiseMode parse_noise_mode(std::string_view text);

struct BiasConfig {
  double imbalance_factor = 1.0;
  double noise_rate = 0.0;
  NoiseMode noise_mode = NoiseMode::kUniform;
  std::uint64_t seed = 0;

  // mu = IF^(-1/(K-1)).
  double decay(int num_classes) const;
  void validate() const;
};

// Cluster layout for generate_blobs. When centers is empty, class k is centred
// at radius * (cos(2 pi k / K), sin(2 pi k / K), 0, ..., 0). Every coordinate
// gets independent N(0, stddev^2) noise.
struct BlobGeometry {
  double radius = 3.0;
  double stddev = 1.0;
  std::vector<Vector> centers;

  std::vector<Vector> resolve_centers(int num_classes, Index dim) const;
};

// Balanced clean dataset; ids are first_id, first_id + 1, ... in class-major
// order.
Dataset generate_blobs(int num_classes, Index n_per_class, Index dim,
                       const BlobGeometry& geometry, std::uint64_t seed,
                       SampleId first_id = 0);

// Splits every class into consecutive disjoint parts of the given sizes after
// a seeded per-class shuffle. Part j gets sizes[j] samples of each class.
std::vector<Dataset> partition_per_class(const Dataset& balanced,
                                         std::span<const Index> sizes,
                                         std::uint64_t seed);

// round(n0 * mu^i) for i in [0, K).
std::vector<Index> imbalance_counts(Index n0, int num_classes,
                                    double imbalance_factor);

Dataset apply_imbalance(const Dataset& balanced, double imbalance_factor,
                        std::uint64_t seed);

Dataset apply_label_noise(const Dataset& dataset, double noise_rate,
                          NoiseMode mode, std::uint64_t seed);

// Imbalance first, then label noise.
Dataset apply_bias(const Dataset& balanced, const BiasConfig& config);

// The two target classes used by flip2 for every true class, drawn from seed.
std::vector<std::pair<ClassId, ClassId>> flip2_targets(int num_classes,
                                                       std::uint64_t seed);

enum class MetaStrategy { kHeldOutClean, kLowProbeLoss };

std::string_view to_string(MetaStrategy strategy);
MetaStrategy parse_meta_strategy(std::string_view text);

// m_per_class samples per class drawn at random from a clean pool. Pool
// samples whose ids appear in exclude_ids are never chosen.
Dataset make_meta_set(const Dataset& clean_pool, Index m_per_class,
                      std::uint64_t seed,
                      std::span<const SampleId> exclude_ids = {});

// For each observed class, the m_per_class training samples with the smallest
// mean probe loss over epochs [prefix_drop, T). Ties break by row order.
Dataset make_meta_set(const Dataset& training, const LossCurveMatrix& curves,
                      Index m_per_class, int prefix_drop);

}  // namespace probeweight

#endif  // PROBEWEIGHT_BIASGEN_HPP_
