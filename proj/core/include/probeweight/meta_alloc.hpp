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

// Allocating stage: bilevel training of the classifier and a sample-weighting
// model. Per iteration, with classifier parameters w, weighting parameters
// theta, training batch of size B and classifier learning rate alpha:
//
//   1. virtual step    w_hat = w - alpha * grad_w (1/B) sum_i G_i(theta) l_i(w)
//   2. meta step       g     = grad L_meta(w_hat)          (clean meta batch)
//                      s_i   = <grad l_i(w), g> over layers >= SL
//                      grad_theta = sum_i (-alpha / B) s_i grad_theta G_i
//                      theta <- Adam(theta, grad_theta)
//   3. real step       w <- w - alpha * grad_w (1/B) sum_i G_i(theta') l_i(w)
//
// Steps 1-2 stop once the classifier learning rate first decays; afterwards
// the weighting model is frozen and only step 3 runs. Skipping the bottom SL
// layers in step 2 (SLMO) drops their backward work from the meta step.

#ifndef PROBEWEIGHT_META_ALLOC_HPP_
#define PROBEWEIGHT_META_ALLOC_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "probeweight/curves.hpp"
#include "probeweight/dataset.hpp"
#include "probeweight/nn.hpp"
#include "probeweight/schedule.hpp"
#include "probeweight/weight_net.hpp"

namespace probeweight {

struct AllocConfig {
  int epochs = 60;
  Index batch_size = 128;
  // 0 selects min(batch_size, meta set size).
  Index meta_batch_size = 0;
  StepSchedule classifier_lr;
  double weight_lr = 1e-3;
  int skip_layers = 0;
  // Defaults to the first classifier decay milestone (or epochs if none).
  std::optional<int> freeze_at;
  std::uint64_t seed = 0;

  int resolved_freeze_at() const;
  void validate(int classifier_layers) const;
};

// Forward activations and per-sample deltas of one training batch at fixed
// classifier parameters, shared by the virtual step, the meta step and the
// real step.
class TrainBatchState {
 public:
  // curve_rows is read only when the model consumes loss curves.
  TrainBatchState(const nn::ClassifierParams& params, Matrix inputs,
                  std::vector<ClassId> labels, WeightInput input_kind,
                  const Matrix* curve_rows = nullptr);

  Index batch_size() const { return cache_.batch_size(); }
  std::span<const ClassId> labels() const { return labels_; }
  const Vector& losses() const { return losses_; }
  const Matrix& weight_inputs() const { return weight_inputs_; }
  const nn::ClassifierParams& params() const { return *params_; }

  // grad of (1/B) sum_i weights_i l_i at the stored parameters.
  nn::GradientBundle weighted_gradient(const Vector& weights) const;

  // sum over layers >= skip_layers of <grad l_i, meta_grad>.
  Vector grad_dots(const nn::GradientBundle& meta_grad, int skip_layers) const;

 private:
  const nn::ClassifierParams* params_;
  std::vector<ClassId> labels_;
  nn::ForwardCache cache_;
  std::vector<Matrix> deltas_;
  Vector losses_;
  Matrix weight_inputs_;
};

nn::ClassifierParams virtual_update(const nn::ClassifierParams& params,
                                    const Matrix& batch_inputs,
                                    std::span<const ClassId> labels,
                                    const Vector& weights, double alpha);

struct MetaGradient {
  Vector theta_grad;
  Vector weights;     // G_i at the current theta
  Vector dots;        // s_i
  double meta_loss = 0.0;  // L_meta at w_hat
};

// Mean cross-entropy gradient restricted to layers >= lowest_layer.
nn::GradientBundle meta_loss_gradient(const nn::ClassifierParams& params,
                                      const Matrix& meta_inputs,
                                      std::span<const ClassId> meta_labels,
                                      int lowest_layer, double* loss = nullptr);

MetaGradient meta_gradient_theta(const TrainBatchState& batch,
                                 const WeightModel& model,
                                 const Matrix& meta_inputs,
                                 std::span<const ClassId> meta_labels,
                                 double alpha, int skip_layers);

struct GroupWeightStat {
  ClassId label = 0;
  bool is_noisy = false;
  Index count = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double meta_loss = 0.0;      // NaN when no meta step ran
  double test_accuracy = 0.0;  // NaN without an evaluator
  std::int64_t theta_updates = 0;  // cumulative
  double mean_step_ms = 0.0;       // mean meta-step time this epoch
  std::vector<GroupWeightStat> group_weights;
};

struct AllocHistory {
  std::vector<EpochRecord> epochs;
  std::vector<double> step_ms;  // every meta step, in order
};

// Reporting callbacks. The training loop itself never sees clean/noisy
// metadata; the caller's closures may.
struct AllocHooks {
  std::function<double(const nn::ClassifierParams&)> test_accuracy;
  // Receives the current weight of every training row.
  std::function<std::vector<GroupWeightStat>(const Vector&)> group_weights;
};

struct AllocResult {
  nn::ClassifierParams classifier;
  std::unique_ptr<WeightModel> weight_model;
  AllocHistory history;
  Vector final_weights;     // per training row, final classifier and model
  Vector theta_at_freeze;   // model parameters when freezing took effect
};

// Weights of every training row under the given model and classifier.
Vector weights_for_rows(const WeightModel& model,
                        const nn::ClassifierParams& classifier,
                        const TrainingView& train,
                        const NormalizedCurves* curves);

AllocResult allocate_train(const TrainingView& train, const TrainingView& meta,
                           const NormalizedCurves* curves,
                           const nn::ClassifierParams& init,
                           std::unique_ptr<WeightModel> model,
                           const AllocConfig& config,
                           const AllocHooks& hooks = {});

// Cycles through a shuffled meta set, reshuffling when a full batch no
// longer fits.
class MetaSampler {
 public:
  MetaSampler(Index size, Index batch, std::uint64_t seed);
  std::vector<Index> next();

 private:
  Index batch_;
  std::vector<Index> order_;
  std::size_t pos_;
  std::mt19937_64 rng_;
};

}  // namespace probeweight

#endif  // PROBEWEIGHT_META_ALLOC_HPP_
