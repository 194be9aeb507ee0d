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

#include "probeweight/biasgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <unordered_set>

#include "probeweight/errors.hpp"

namespace probeweight {

std::string_view to_string(NoiseMode mode) {
  return mode == NoiseMode::kUniform ? "uniform" : "flip2";
}

NoiseMode parse_noise_mode(std::string_view text) {
  if (text == "uniform") return NoiseMode::kUniform;
  if (text == "flip2") return NoiseMode::kFlip2;
  throw ConfigError("unknown noise mode '" + std::string(text) + "'");
}

std::string_view to_string(MetaStrategy strategy) {
  return strategy == MetaStrategy::kHeldOutClean ? "held_out_clean"
                                                 : "low_probe_loss";
}

MetaStrategy parse_meta_strategy(std::string_view text) {
  if (text == "held_out_clean") return MetaStrategy::kHeldOutClean;
  if (text == "low_probe_loss") return MetaStrategy::kLowProbeLoss;
  throw ConfigError("unknown meta strategy '" + std::string(text) + "'");
}

double BiasConfig::decay(int num_classes) const {
  if (num_classes < 2) return 1.0;
  return std::pow(imbalance_factor, -1.0 / static_cast<double>(num_classes - 1));
}

void BiasConfig::validate() const {
  if (!(imbalance_factor >= 1.0) || !std::isfinite(imbalance_factor)) {
    throw ConfigError("imbalance factor must be >= 1");
  }
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) {
    throw ConfigError("noise rate must lie in [0, 1]");
  }
}

std::vector<Vector> BlobGeometry::resolve_centers(int num_classes,
                                                  Index dim) const {
  std::vector<Vector> out;
  if (!centers.empty()) {
    if (static_cast<int>(centers.size()) != num_classes) {
      throw ConfigError("expected one center per class");
    }
    for (const auto& c : centers) {
      if (c.size() != dim) throw ConfigError("center dimension mismatch");
    }
    out = centers;
  } else {
    for (int k = 0; k < num_classes; ++k) {
      Vector c = Vector::Zero(dim);
      const double angle = 2.0 * std::numbers::pi * k / num_classes;
      c[0] = radius * std::cos(angle);
      c[1] = radius * std::sin(angle);
      out.push_back(std::move(c));
    }
  }
  return out;
}

Dataset generate_blobs(int num_classes, Index n_per_class, Index dim,
                       const BlobGeometry& geometry, std::uint64_t seed,
                       SampleId first_id) {
  if (num_classes < 2) throw ConfigError("need at least two classes");
  if (n_per_class < 1) throw ConfigError("need at least one sample per class");
  if (dim < 2) throw ConfigError("need at least two feature dimensions");
  if (!(geometry.stddev >= 0.0) || !std::isfinite(geometry.stddev)) {
    throw ConfigError("blob stddev must be finite and non-negative");
  }
  const auto centers = geometry.resolve_centers(num_classes, dim);
  if (geometry.stddev == 0.0) {
    for (int a = 0; a < num_classes; ++a) {
      for (int b = a + 1; b < num_classes; ++b) {
        if (centers[a] == centers[b]) {
          throw ConfigError("classes " + std::to_string(a) + " and " +
                            std::to_string(b) +
                            " coincide with zero variance");
        }
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset out(num_classes, dim);
  out.reserve(num_classes * n_per_class);
  SampleId id = first_id;
  for (int k = 0; k < num_classes; ++k) {
    for (Index i = 0; i < n_per_class; ++i) {
      Sample s;
      s.features.resize(dim);
      for (Index j = 0; j < dim; ++j) {
        s.features[j] = centers[k][j] + geometry.stddev * noise(rng);
      }
      s.observed_label = k;
      s.true_label = k;
      s.sample_id = id++;
      out.add(std::move(s));
    }
  }
  return out;
}

namespace {

std::vector<std::vector<Index>> rows_by_class(const Dataset& d) {
  std::vector<std::vector<Index>> rows(d.num_classes());
  for (Index i = 0; i < d.size(); ++i) rows[d[i].observed_label].push_back(i);
  return rows;
}

// Keeps dataset order for the selected rows.
Dataset select_rows(const Dataset& d, std::vector<Index> rows) {
  std::sort(rows.begin(), rows.end());
  Dataset out(d.num_classes(), d.dim());
  out.reserve(static_cast<Index>(rows.size()));
  for (Index r : rows) out.add(d[r]);
  return out;
}

}  // namespace

std::vector<Dataset> partition_per_class(const Dataset& balanced,
                                         std::span<const Index> sizes,
                                         std::uint64_t seed) {
  auto rows = rows_by_class(balanced);
  const Index needed = std::accumulate(sizes.begin(), sizes.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Index>> parts(sizes.size());
  for (int k = 0; k < balanced.num_classes(); ++k) {
    if (static_cast<Index>(rows[k].size()) < needed) {
      throw ConfigError("class " + std::to_string(k) + " has " +
                        std::to_string(rows[k].size()) +
                        " samples, partition needs " + std::to_string(needed));
    }
    std::shuffle(rows[k].begin(), rows[k].end(), rng);
    Index at = 0;
    for (std::size_t p = 0; p < sizes.size(); ++p) {
      parts[p].insert(parts[p].end(), rows[k].begin() + at,
                      rows[k].begin() + at + sizes[p]);
      at += sizes[p];
    }
  }
  std::vector<Dataset> out;
  out.reserve(parts.size());
  for (auto& p : parts) out.push_back(select_rows(balanced, std::move(p)));
  return out;
}

std::vector<Index> imbalance_counts(Index n0, int num_classes,
                                    double imbalance_factor) {
  BiasConfig cfg;
  cfg.imbalance_factor = imbalance_factor;
  cfg.validate();
  const double mu = cfg.decay(num_classes);
  std::vector<Index> counts(num_classes);
  for (int i = 0; i < num_classes; ++i) {
    counts[i] = static_cast<Index>(
        std::llround(static_cast<double>(n0) * std::pow(mu, i)));
  }
  if (counts.back() < 1) {
    throw ConfigError("imbalance factor " + std::to_string(imbalance_factor) +
                      " leaves the tail class empty");
  }
  return counts;
}

Dataset apply_imbalance(const Dataset& balanced, double imbalance_factor,
                        std::uint64_t seed) {
  const auto present = balanced.class_counts();
  const Index n0 = present.front();
  for (Index c : present) {
    if (c != n0) throw ConfigError("imbalance input must be class balanced");
  }
  const auto keep = imbalance_counts(n0, balanced.num_classes(),
                                     imbalance_factor);
  if (imbalance_factor == 1.0) return balanced;

  auto rows = rows_by_class(balanced);
  std::mt19937_64 rng(seed);
  std::vector<Index> kept;
  for (int k = 0; k < balanced.num_classes(); ++k) {
    std::shuffle(rows[k].begin(), rows[k].end(), rng);
    kept.insert(kept.end(), rows[k].begin(), rows[k].begin() + keep[k]);
  }
  return select_rows(balanced, std::move(kept));
}

std::vector<std::pair<ClassId, ClassId>> flip2_targets(int num_classes,
                                                       std::uint64_t seed) {
  if (num_classes < 3) throw ConfigError("flip2 noise needs at least 3 classes");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<ClassId, ClassId>> pairs;
  for (int k = 0; k < num_classes; ++k) {
    std::vector<ClassId> others;
    for (int j = 0; j < num_classes; ++j) {
      if (j != k) others.push_back(j);
    }
    std::shuffle(others.begin(), others.end(), rng);
    pairs.emplace_back(others[0], others[1]);
  }
  return pairs;
}

Dataset apply_label_noise(const Dataset& dataset, double noise_rate,
                          NoiseMode mode, std::uint64_t seed) {
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) {
    throw ConfigError("noise rate must lie in [0, 1]");
  }
  const int k = dataset.num_classes();
  if (mode == NoiseMode::kUniform && k < 2 && noise_rate > 0.0) {
    throw ConfigError("uniform noise needs at least 2 classes");
  }
  std::vector<std::pair<ClassId, ClassId>> pairs;
  if (mode == NoiseMode::kFlip2) pairs = flip2_targets(k, seed);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Dataset out(k, dataset.dim());
  out.reserve(dataset.size());
  for (const auto& src : dataset.samples()) {
    Sample s = src;
    s.observed_label = s.true_label;
    const bool corrupt = coin(rng) < noise_rate;
    if (corrupt) {
      if (mode == NoiseMode::kUniform) {
        std::uniform_int_distribution<int> pick(0, k - 2);
        const int r = pick(rng);
        s.observed_label = r < s.true_label ? r : r + 1;
      } else {
        std::uniform_int_distribution<int> pick(0, 1);
        const auto& [a, b] = pairs[s.true_label];
        s.observed_label = pick(rng) == 0 ? a : b;
      }
    }
    s.is_noisy = s.observed_label != s.true_label;
    out.add(std::move(s));
  }
  return out;
}

Dataset apply_bias(const Dataset& balanced, const BiasConfig& config) {
  config.validate();
  const Dataset imbalanced =
      apply_imbalance(balanced, config.imbalance_factor, config.seed);
  return apply_label_noise(imbalanced, config.noise_rate, config.noise_mode,
                           config.seed + 1);
}

Dataset make_meta_set(const Dataset& clean_pool, Index m_per_class,
                      std::uint64_t seed,
                      std::span<const SampleId> exclude_ids) {
  if (m_per_class < 1) throw ConfigError("meta set needs m_per_class >= 1");
  const std::unordered_set<SampleId> excluded(exclude_ids.begin(),
                                              exclude_ids.end());
  std::vector<std::vector<Index>> candidates(clean_pool.num_classes());
  for (Index i = 0; i < clean_pool.size(); ++i) {
    const auto& s = clean_pool[i];
    if (s.is_noisy) {
      throw ConfigError("held-out meta pool contains noisy sample " +
                        std::to_string(s.sample_id));
    }
    if (excluded.contains(s.sample_id)) continue;
    candidates[s.observed_label].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<Index> chosen;
  for (int k = 0; k < clean_pool.num_classes(); ++k) {
    auto& c = candidates[k];
    if (static_cast<Index>(c.size()) < m_per_class) {
      throw ConfigError("class " + std::to_string(k) + " has only " +
                        std::to_string(c.size()) +
                        " meta candidates, need " + std::to_string(m_per_class));
    }
    std::shuffle(c.begin(), c.end(), rng);
    chosen.insert(chosen.end(), c.begin(), c.begin() + m_per_class);
  }
  return select_rows(clean_pool, std::move(chosen));
}

Dataset make_meta_set(const Dataset& training, const LossCurveMatrix& curves,
                      Index m_per_class, int prefix_drop) {
  if (m_per_class < 1) throw ConfigError("meta set needs m_per_class >= 1");
  if (curves.sample_ids != training.sample_ids()) {
    throw ConfigError("probe curves are not row-aligned with the training set");
  }
  const Vector score = mean_truncated_loss(curves, prefix_drop);
  std::vector<Index> chosen;
  const auto rows = rows_by_class(training);
  for (int k = 0; k < training.num_classes(); ++k) {
    auto r = rows[k];
    if (static_cast<Index>(r.size()) < m_per_class) {
      throw ConfigError("class " + std::to_string(k) + " has only " +
                        std::to_string(r.size()) +
                        " meta candidates, need " + std::to_string(m_per_class));
    }
    std::stable_sort(r.begin(), r.end(),
                     [&](Index a, Index b) { return score[a] < score[b]; });
    chosen.insert(chosen.end(), r.begin(), r.begin() + m_per_class);
  }
  return select_rows(training, std::move(chosen));
}

}  // namespace probeweight
