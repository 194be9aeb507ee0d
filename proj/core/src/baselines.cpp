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

#include "probeweight/baselines.hpp"

#include <limits>
#include <numeric>
#include <random>

#include "probeweight/errors.hpp"
#include "probeweight/optimizer.hpp"

namespace probeweight {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kCe:
      return "ce";
    case Method::kMwnetTransient:
      return "mwnet_transient";
    case Method::kCurveNet:
      return "curvenet";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  if (text == "ce") return Method::kCe;
  if (text == "mwnet_transient") return Method::kMwnetTransient;
  if (text == "curvenet") return Method::kCurveNet;
  throw ConfigError("unknown method '" + std::string(text) + "'");
}

AllocResult train_ce(const TrainingView& train, const nn::ClassifierParams& init,
                     const AllocConfig& config, const AllocHooks& hooks) {
  config.validate(init.layer_count());
  if (train.size() == 0) throw ConfigError("training set is empty");
  const Index n = train.size();

  AllocResult result;
  result.classifier = init;
  auto& params = result.classifier;
  auto sgd = OptimizerState::sgd(config.classifier_lr.at(0));
  std::mt19937_64 rng(config.seed);
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double alpha = config.classifier_lr.at(epoch);
    sgd.set_learning_rate(alpha);
    double loss_sum = 0.0;
    std::shuffle(order.begin(), order.end(), rng);
    for (Index start = 0; start < n; start += config.batch_size) {
      const Index stop = std::min(n, start + config.batch_size);
      const std::span<const Index> rows(order.data() + start, stop - start);
      const Matrix x = gather_rows(train.features, rows);
      const auto y = gather_labels(train.labels, rows);
      loss_sum += nn::per_sample_loss(nn::forward_logits(params, x), y).sum();
      optimizer_step(sgd, params,
                     nn::weighted_grad(params, x, y, Vector::Ones(x.rows())));
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = alpha;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.meta_loss = std::numeric_limits<double>::quiet_NaN();
    rec.test_accuracy = hooks.test_accuracy
                            ? hooks.test_accuracy(params)
                            : std::numeric_limits<double>::quiet_NaN();
    if (hooks.group_weights) rec.group_weights = hooks.group_weights(Vector::Ones(n));
    result.history.epochs.push_back(std::move(rec));
  }
  result.weight_model = std::make_unique<ConstantWeight>(1.0);
  result.final_weights = Vector::Ones(n);
  return result;
}

AllocResult train_mwnet_transient(const TrainingView& train,
                                  const TrainingView& meta,
                                  const nn::ClassifierParams& init,
                                  const AllocConfig& config,
                                  std::uint64_t weight_net_seed, Index hidden,
                                  const AllocHooks& hooks) {
  return allocate_train(train, meta, nullptr, init,
                        std::make_unique<TransientLossNet>(weight_net_seed, hidden),
                        config, hooks);
}

}  // namespace probeweight
