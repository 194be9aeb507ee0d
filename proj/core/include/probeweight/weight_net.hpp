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

// Sample-weighting networks.
//
// CurveNet maps a normalized loss curve I_i (length C) and the sample's
// observed label y_i to a weight in (0, 1):
//
//   f_i = relu(W2 relu(W1 I_i + b1) + b2)          curve encoder, C -> H1 -> P
//   z_i = f_i + Y[y_i]                              class embedding, Y is K x P
//   w_i = sigmoid(w4 . relu(W3 z_i + b3) + b4)      head, P -> H2 -> 1
//
// TransientLossNet is the single-input baseline: the sample's current loss
// through a 1 -> 100 -> 1 rectifier MLP with a sigmoid output.

#ifndef PROBEWEIGHT_WEIGHT_NET_HPP_
#define PROBEWEIGHT_WEIGHT_NET_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "probeweight/nn.hpp"

namespace probeweight {

struct CurveNetConfig {
  Index curve_length = 0;
  int num_classes = 0;
  Index embed_dim = 64;
  Index encoder_hidden = 128;
  Index head_hidden = 100;

  void validate() const;
  Index param_count() const;

  friend bool operator==(const CurveNetConfig&, const CurveNetConfig&) =
      default;
};

// Flat parameter vector with named views. Blocks are stored in the order
// enc1_w, enc1_b, enc2_w, enc2_b, embedding, head1_w, head1_b, head2_w,
// head2_b. Also used as the container for gradients.
class CurveNetParams {
 public:
  CurveNetParams() = default;
  explicit CurveNetParams(CurveNetConfig config);
  CurveNetParams(CurveNetConfig config, Vector values);

  const CurveNetConfig& config() const { return config_; }
  Vector& values() { return values_; }
  const Vector& values() const { return values_; }

  Eigen::Map<Matrix> enc1_w() { return mat(0, config_.encoder_hidden, config_.curve_length); }
  Eigen::Map<const Matrix> enc1_w() const { return mat(0, config_.encoder_hidden, config_.curve_length); }
  Eigen::Map<Vector> enc1_b() { return vec(1, config_.encoder_hidden); }
  Eigen::Map<const Vector> enc1_b() const { return vec(1, config_.encoder_hidden); }
  Eigen::Map<Matrix> enc2_w() { return mat(2, config_.embed_dim, config_.encoder_hidden); }
  Eigen::Map<const Matrix> enc2_w() const { return mat(2, config_.embed_dim, config_.encoder_hidden); }
  Eigen::Map<Vector> enc2_b() { return vec(3, config_.embed_dim); }
  Eigen::Map<const Vector> enc2_b() const { return vec(3, config_.embed_dim); }
  // K x P, row k is the embedding of class k.
  Eigen::Map<Matrix> embedding() { return mat(4, config_.num_classes, config_.embed_dim); }
  Eigen::Map<const Matrix> embedding() const { return mat(4, config_.num_classes, config_.embed_dim); }
  Eigen::Map<Matrix> head1_w() { return mat(5, config_.head_hidden, config_.embed_dim); }
  Eigen::Map<const Matrix> head1_w() const { return mat(5, config_.head_hidden, config_.embed_dim); }
  Eigen::Map<Vector> head1_b() { return vec(6, config_.head_hidden); }
  Eigen::Map<const Vector> head1_b() const { return vec(6, config_.head_hidden); }
  Eigen::Map<Matrix> head2_w() { return mat(7, 1, config_.head_hidden); }
  Eigen::Map<const Matrix> head2_w() const { return mat(7, 1, config_.head_hidden); }
  Eigen::Map<Vector> head2_b() { return vec(8, 1); }
  Eigen::Map<const Vector> head2_b() const { return vec(8, 1); }

  // [begin, end) of block b in values().
  std::pair<Index, Index> block_range(int block) const;
  static constexpr int kBlockCount = 9;

 private:
  Eigen::Map<Matrix> mat(int block, Index rows, Index cols);
  Eigen::Map<const Matrix> mat(int block, Index rows, Index cols) const;
  Eigen::Map<Vector> vec(int block, Index n);
  Eigen::Map<const Vector> vec(int block, Index n) const;

  CurveNetConfig config_;
  Vector values_;
};

using CurveNetGrad = CurveNetParams;

// Fan-in uniform init for every layer and the embedding; the last head layer
// starts at zero so every initial weight is exactly 0.5.
CurveNetParams init_curvenet(const CurveNetConfig& config, std::uint64_t seed);

Vector curvenet_forward(const CurveNetParams& params, const Matrix& curves,
                        std::span<const ClassId> labels);

// Gradient of sum_i upstream_i * w_i with respect to every parameter.
CurveNetGrad curvenet_param_grad(const CurveNetParams& params,
                                 const Matrix& curves,
                                 std::span<const ClassId> labels,
                                 const Vector& upstream);

double sigmoid(double x);

// What a weighting model reads for each training sample.
enum class WeightInput {
  kNone,           // constant weights
  kLossCurve,      // normalized probe curve row
  kTransientLoss,  // current cross-entropy as a 1-column matrix
};

// Parameterized map from per-sample inputs to weights, as seen by the bilevel
// loop. Parameters are one flat vector so Adam and finite differences apply
// uniformly.
class WeightModel {
 public:
  virtual ~WeightModel() = default;

  virtual std::string kind() const = 0;
  virtual WeightInput input() const = 0;
  virtual Index input_width() const = 0;

  virtual Vector& params() = 0;
  virtual const Vector& params() const = 0;
  Index num_params() const { return params().size(); }

  virtual Vector weights(const Matrix& inputs,
                         std::span<const ClassId> labels) const = 0;
  virtual Vector param_grad(const Matrix& inputs,
                            std::span<const ClassId> labels,
                            const Vector& upstream) const = 0;

  // JSON object describing the architecture, stored in checkpoints.
  virtual std::string config_json() const = 0;
  virtual std::unique_ptr<WeightModel> clone() const = 0;
};

class CurveNetModel final : public WeightModel {
 public:
  explicit CurveNetModel(CurveNetParams params) : params_(std::move(params)) {}

  std::string kind() const override { return "curvenet"; }
  WeightInput input() const override { return WeightInput::kLossCurve; }
  Index input_width() const override { return params_.config().curve_length; }
  Vector& params() override { return params_.values(); }
  const Vector& params() const override { return params_.values(); }
  Vector weights(const Matrix& inputs,
                 std::span<const ClassId> labels) const override;
  Vector param_grad(const Matrix& inputs, std::span<const ClassId> labels,
                    const Vector& upstream) const override;
  std::string config_json() const override;
  std::unique_ptr<WeightModel> clone() const override;

  const CurveNetParams& curvenet() const { return params_; }

 private:
  CurveNetParams params_;
};

// 1 -> hidden -> 1, rectifier hidden layer, sigmoid output; labels ignored.
class TransientLossNet final : public WeightModel {
 public:
  static constexpr Index kDefaultHidden = 100;

  explicit TransientLossNet(std::uint64_t seed, Index hidden = kDefaultHidden);
  TransientLossNet(Index hidden, Vector params);

  std::string kind() const override { return "mwnet_transient"; }
  WeightInput input() const override { return WeightInput::kTransientLoss; }
  Index input_width() const override { return 1; }
  Vector& params() override { return params_; }
  const Vector& params() const override { return params_; }
  Vector weights(const Matrix& inputs,
                 std::span<const ClassId> labels) const override;
  Vector param_grad(const Matrix& inputs, std::span<const ClassId> labels,
                    const Vector& upstream) const override;
  std::string config_json() const override;
  std::unique_ptr<WeightModel> clone() const override;

  Index hidden() const { return hidden_; }
  static Index param_count(Index hidden) { return hidden + hidden + hidden + 1; }

 private:
  Index hidden_;
  Vector params_;
};

// Every weight equals value; no parameters.
class ConstantWeight final : public WeightModel {
 public:
  explicit ConstantWeight(double value = 1.0) : value_(value) {}

  std::string kind() const override { return "constant"; }
  WeightInput input() const override { return WeightInput::kNone; }
  Index input_width() const override { return 0; }
  Vector& params() override { return empty_; }
  const Vector& params() const override { return empty_; }
  Vector weights(const Matrix& inputs,
                 std::span<const ClassId> labels) const override;
  Vector param_grad(const Matrix& inputs, std::span<const ClassId> labels,
                    const Vector& upstream) const override;
  std::string config_json() const override;
  std::unique_ptr<WeightModel> clone() const override;

 private:
  double value_;
  Vector empty_;
};

}  // namespace probeweight

#endif  // PROBEWEIGHT_WEIGHT_NET_HPP_
