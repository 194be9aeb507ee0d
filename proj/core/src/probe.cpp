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

#include "probeweight/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "probeweight/errors.hpp"
#include "probeweight/optimizer.hpp"

namespace probeweight {

void ProbeConfig::validate() const {
  if (epochs < 1) throw ConfigError("probe needs at least one epoch");
  if (prefix_drop < 0 || prefix_drop >= epochs) {
    throw ConfigError("prefix drop must lie in [0, epochs)");
  }
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  schedule.validate();
}

namespace {

void check_losses(const Vector& losses, std::span<const Index> rows,
                  const TrainingView& data, int epoch) {
  for (Index i = 0; i < losses.size(); ++i) {
    if (!std::isfinite(losses[i])) {
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                         " for sample " +
                         std::to_string(data.sample_ids[rows[i]]));
    }
  }
}

}  // namespace

LossCurveMatrix probe_train(const TrainingView& data,
                            const nn::ClassifierParams& init,
                            const ProbeConfig& config,
                            const ProbeObserver& observer) {
  config.validate();
  if (data.size() == 0) throw ConfigError("probe needs a nonempty dataset");
  const Index n = data.size();

  LossCurveMatrix curves;
  curves.losses.resize(n, config.epochs);
  curves.sample_ids = data.sample_ids;
  curves.observed_labels = data.labels;

  nn::ClassifierParams params = init;
  std::mt19937_64 rng(config.seed);
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto sgd = OptimizerState::sgd(cyclical_lr_at(config.schedule, epoch));
    std::shuffle(order.begin(), order.end(), rng);
    for (Index start = 0; start < n; start += config.batch_size) {
      const Index stop = std::min(n, start + config.batch_size);
      const std::span<const Index> rows(order.data() + start, stop - start);
      const Matrix x = gather_rows(data.features, rows);
      const auto y = gather_labels(data.labels, rows);

      const nn::ForwardCache cache = nn::forward(params, x);
      const Vector losses = nn::per_sample_loss(cache.logits(), y);
      check_losses(losses, rows, data, epoch);
      if (!config.eval_pass) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
          curves.losses(rows[i], epoch) = static_cast<float>(losses[i]);
        }
      }
      if (observer) observer({epoch, rows, &params, &losses});

      const Matrix top = nn::loss_logit_grad(cache.logits(), y);
      const auto deltas = nn::backprop_deltas(params, cache, top, 0);
      const Vector coeffs = Vector::Constant(
          x.rows(), 1.0 / static_cast<double>(x.rows()));
      optimizer_step(sgd, params,
                     nn::accumulate_gradient(params.layout(), cache, deltas,
                                             coeffs, 0));
    }
    if (config.eval_pass) {
      const Vector losses =
          nn::per_sample_loss(nn::forward_logits(params, data.features),
                              data.labels);
      std::vector<Index> all(n);
      std::iota(all.begin(), all.end(), Index{0});
      check_losses(losses, all, data, epoch);
      curves.losses.col(epoch) = losses.cast<float>();
    }
  }
  return curves;
}

}  // namespace probeweight
