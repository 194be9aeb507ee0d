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

#include "probeweight/meta_alloc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "probeweight/errors.hpp"
#include "probeweight/optimizer.hpp"

namespace probeweight {

int AllocConfig::resolved_freeze_at() const {
  if (freeze_at) return *freeze_at;
  if (!classifier_lr.milestones.empty()) return classifier_lr.milestones.front();
  return epochs;
}

void AllocConfig::validate(int classifier_layers) const {
  if (epochs < 1) throw ConfigError("allocation needs at least one epoch");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (meta_batch_size < 0) throw ConfigError("meta batch size must be >= 0");
  if (!(weight_lr > 0.0)) throw ConfigError("weight net lr must be positive");
  if (skip_layers < 0 || skip_layers > classifier_layers) {
    throw ConfigError("skip layers " + std::to_string(skip_layers) +
                      " outside [0, " + std::to_string(classifier_layers) + "]");
  }
  classifier_lr.validate();
  const int freeze = resolved_freeze_at();
  if (freeze < 0) throw ConfigError("freeze epoch must be non-negative");
  if (!classifier_lr.milestones.empty() &&
      freeze > classifier_lr.milestones.front()) {
    throw ConfigError("freeze epoch must not exceed the first lr milestone");
  }
}

TrainBatchState::TrainBatchState(const nn::ClassifierParams& params,
                                 Matrix inputs, std::vector<ClassId> labels,
                                 WeightInput input_kind,
                                 const Matrix* curve_rows)
    : params_(&params), labels_(std::move(labels)) {
  cache_ = nn::forward(params, inputs);
  losses_ = nn::per_sample_loss(cache_.logits(), labels_);
  const Matrix top = nn::loss_logit_grad(cache_.logits(), labels_);
  deltas_ = nn::backprop_deltas(params, cache_, top, 0);
  switch (input_kind) {
    case WeightInput::kNone:
      weight_inputs_.resize(batch_size(), 0);
      break;
    case WeightInput::kTransientLoss:
      weight_inputs_ = losses_;
      break;
    case WeightInput::kLossCurve:
      if (curve_rows == nullptr || curve_rows->rows() != batch_size()) {
        throw ShapeError("loss-curve weighting needs one curve row per sample");
      }
      weight_inputs_ = *curve_rows;
      break;
  }
}

nn::GradientBundle TrainBatchState::weighted_gradient(
    const Vector& weights) const {
  if (weights.size() != batch_size()) {
    throw ShapeError("weight count does not match batch size");
  }
  if (!weights.allFinite()) throw NumericError("non-finite sample weights");
  const Vector coeffs = weights / static_cast<double>(batch_size());
  return nn::accumulate_gradient(params_->layout(), cache_, deltas_, coeffs, 0);
}

Vector TrainBatchState::grad_dots(const nn::GradientBundle& meta_grad,
                                  int skip_layers) const {
  return nn::grad_dots(cache_, deltas_, meta_grad, skip_layers);
}

nn::ClassifierParams virtual_update(const nn::ClassifierParams& params,
                                    const Matrix& batch_inputs,
                                    std::span<const ClassId> labels,
                                    const Vector& weights, double alpha) {
  nn::ClassifierParams out = params;
  out.values() -=
      alpha * nn::weighted_grad(params, batch_inputs, labels, weights).values();
  return out;
}

nn::GradientBundle meta_loss_gradient(const nn::ClassifierParams& params,
                                      const Matrix& meta_inputs,
                                      std::span<const ClassId> meta_labels,
                                      int lowest_layer, double* loss) {
  const nn::ForwardCache cache = nn::forward(params, meta_inputs);
  if (loss != nullptr) {
    *loss = nn::per_sample_loss(cache.logits(), meta_labels).mean();
  }
  const Matrix top = nn::loss_logit_grad(cache.logits(), meta_labels);
  const auto deltas = nn::backprop_deltas(params, cache, top, lowest_layer);
  const Vector coeffs = Vector::Constant(
      meta_inputs.rows(), 1.0 / static_cast<double>(meta_inputs.rows()));
  return nn::accumulate_gradient(params.layout(), cache, deltas, coeffs,
                                 lowest_layer);
}

MetaGradient meta_gradient_theta(const TrainBatchState& batch,
                                 const WeightModel& model,
                                 const Matrix& meta_inputs,
                                 std::span<const ClassId> meta_labels,
                                 double alpha, int skip_layers) {
  const int z = batch.params().layer_count();
  if (skip_layers < 0 || skip_layers > z) {
    throw DomainError("skip layers " + std::to_string(skip_layers) +
                      " outside [0, " + std::to_string(z) + "]");
  }
  MetaGradient out;
  out.weights = model.weights(batch.weight_inputs(), batch.labels());

  nn::ClassifierParams lookahead = batch.params();
  lookahead.values() -= alpha * batch.weighted_gradient(out.weights).values();

  const nn::GradientBundle g = meta_loss_gradient(
      lookahead, meta_inputs, meta_labels, skip_layers, &out.meta_loss);
  out.dots = batch.grad_dots(g, skip_layers);
  if (!out.dots.allFinite()) throw NumericError("non-finite meta dot products");

  const Vector upstream =
      (-alpha / static_cast<double>(batch.batch_size())) * out.dots;
  out.theta_grad = model.param_grad(batch.weight_inputs(), batch.labels(),
                                    upstream);
  return out;
}

MetaSampler::MetaSampler(Index size, Index batch, std::uint64_t seed)
    : batch_(batch), order_(size), pos_(0), rng_(seed) {
  if (size < 1) throw ConfigError("meta set is empty");
  if (batch < 1 || batch > size) {
    throw ConfigError("meta batch size must lie in [1, meta set size]");
  }
  std::iota(order_.begin(), order_.end(), Index{0});
  std::shuffle(order_.begin(), order_.end(), rng_);
}

std::vector<Index> MetaSampler::next() {
  if (pos_ + batch_ > order_.size()) {
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }
  std::vector<Index> rows(order_.begin() + pos_, order_.begin() + pos_ + batch_);
  pos_ += batch_;
  return rows;
}

Vector weights_for_rows(const WeightModel& model,
                        const nn::ClassifierParams& classifier,
                        const TrainingView& train,
                        const NormalizedCurves* curves) {
  switch (model.input()) {
    case WeightInput::kNone:
      return model.weights(Matrix(train.size(), 0), train.labels);
    case WeightInput::kTransientLoss: {
      const Matrix losses =
          nn::per_sample_loss(nn::forward_logits(classifier, train.features),
                              train.labels);
      return model.weights(losses, train.labels);
    }
    case WeightInput::kLossCurve:
      if (curves == nullptr) throw ConfigError("model needs loss curves");
      return model.weights(curves->features, train.labels);
  }
  return {};
}

namespace {

constexpr std::uint64_t kMetaStreamSalt = 0xa0761d6478bd642fULL;

void check_alignment(const TrainingView& train, const NormalizedCurves* curves,
                     const WeightModel& model) {
  if (model.input() != WeightInput::kLossCurve) return;
  if (curves == nullptr) {
    throw ConfigError("curve-conditioned weighting requires normalized curves");
  }
  if (curves->sample_ids != train.sample_ids) {
    throw ConfigError(
        "normalized curves are not row-aligned with the training set sample ids");
  }
  if (curves->curve_length() != model.input_width()) {
    throw ConfigError("curve length " + std::to_string(curves->curve_length()) +
                      " does not match weight model input width " +
                      std::to_string(model.input_width()));
  }
}

}  // namespace

AllocResult allocate_train(const TrainingView& train, const TrainingView& meta,
                           const NormalizedCurves* curves,
                           const nn::ClassifierParams& init,
                           std::unique_ptr<WeightModel> model,
                           const AllocConfig& config, const AllocHooks& hooks) {
  config.validate(init.layer_count());
  if (!model) throw ConfigError("allocation needs a weight model");
  if (train.size() == 0) throw ConfigError("training set is empty");
  check_alignment(train, curves, *model);

  const bool learns = model->num_params() > 0;
  const Index n = train.size();
  const int freeze_at = config.resolved_freeze_at();

  std::optional<MetaSampler> sampler;
  if (learns) {
    if (meta.size() == 0) throw ConfigError("meta set is empty");
    const Index mb = config.meta_batch_size > 0
                         ? config.meta_batch_size
                         : std::min(config.batch_size, meta.size());
    sampler.emplace(meta.size(), mb, config.seed ^ kMetaStreamSalt);
  }

  AllocResult result;
  result.classifier = init;
  auto& params = result.classifier;
  auto sgd = OptimizerState::sgd(config.classifier_lr.at(0));
  auto adam = OptimizerState::adam(config.weight_lr);

  std::mt19937_64 rng(config.seed);
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::int64_t theta_updates = 0;
  bool froze = false;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double alpha = config.classifier_lr.at(epoch);
    sgd.set_learning_rate(alpha);
    const bool meta_active = learns && epoch < freeze_at;
    if (!meta_active && !froze) {
      result.theta_at_freeze = model->params();
      froze = true;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = alpha;
    double loss_sum = 0.0;
    double meta_loss_sum = 0.0;
    double step_ms_sum = 0.0;
    Index meta_steps = 0;

    std::shuffle(order.begin(), order.end(), rng);
    for (Index start = 0; start < n; start += config.batch_size) {
      const Index stop = std::min(n, start + config.batch_size);
      const std::span<const Index> rows(order.data() + start, stop - start);
      Matrix curve_rows;
      if (model->input() == WeightInput::kLossCurve) {
        curve_rows = gather_rows(curves->features, rows);
      }
      const TrainBatchState batch(params, gather_rows(train.features, rows),
                                  gather_labels(train.labels, rows),
                                  model->input(), &curve_rows);
      loss_sum += batch.losses().sum();

      if (meta_active) {
        const auto meta_rows = sampler->next();
        const Matrix meta_x = gather_rows(meta.features, meta_rows);
        const auto meta_y = gather_labels(meta.labels, meta_rows);

        const auto t0 = std::chrono::steady_clock::now();
        const MetaGradient mg = meta_gradient_theta(
            batch, *model, meta_x, meta_y, alpha, config.skip_layers);
        adam.step(model->params(), mg.theta_grad);
        const auto t1 = std::chrono::steady_clock::now();

        const double ms =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
        result.history.step_ms.push_back(ms);
        step_ms_sum += ms;
        meta_loss_sum += mg.meta_loss;
        ++meta_steps;
        ++theta_updates;
      }

      // Weights are recomputed with the freshly updated model.
      const Vector w = model->weights(batch.weight_inputs(), batch.labels());
      optimizer_step(sgd, params, batch.weighted_gradient(w));
    }

    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.meta_loss = meta_steps > 0
                        ? meta_loss_sum / static_cast<double>(meta_steps)
                        : std::numeric_limits<double>::quiet_NaN();
    rec.mean_step_ms =
        meta_steps > 0 ? step_ms_sum / static_cast<double>(meta_steps) : 0.0;
    rec.theta_updates = theta_updates;
    rec.test_accuracy = hooks.test_accuracy
                            ? hooks.test_accuracy(params)
                            : std::numeric_limits<double>::quiet_NaN();
    if (hooks.group_weights) {
      rec.group_weights =
          hooks.group_weights(weights_for_rows(*model, params, train, curves));
    }
    result.history.epochs.push_back(std::move(rec));
  }
  if (!froze) result.theta_at_freeze = model->params();

  result.final_weights = weights_for_rows(*model, params, train, curves);
  result.weight_model = std::move(model);
  return result;
}

}  // namespace probeweight
