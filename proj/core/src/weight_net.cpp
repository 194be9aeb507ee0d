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

#include "probeweight/weight_net.hpp"

#include <cmath>
#include <random>
#include <string>

#include <json.hpp>

#include "probeweight/errors.hpp"

namespace probeweight {
namespace {

void check_batch(const Matrix& inputs, std::span<const ClassId> labels,
                 Index width, int num_classes) {
  if (inputs.cols() != width) {
    throw ShapeError("weight net expects " + std::to_string(width) +
                     " input columns, got " + std::to_string(inputs.cols()));
  }
  if (static_cast<Index>(labels.size()) != inputs.rows()) {
    throw ShapeError("label count does not match weight net batch");
  }
  if (num_classes > 0) {
    for (ClassId y : labels) {
      if (y < 0 || y >= num_classes) {
        throw DomainError("label " + std::to_string(y) + " outside [0, " +
                          std::to_string(num_classes) + ")");
      }
    }
  }
}

void check_finite(const Matrix& m, const char* where) {
  if (!m.allFinite()) {
    throw NumericError(std::string("non-finite value in ") + where);
  }
}

Matrix affine(const Matrix& x, const Eigen::Map<const Matrix>& w,
              const Eigen::Map<const Vector>& b) {
  Matrix a = x * w.transpose();
  a.rowwise() += b.transpose();
  return a;
}

Matrix relu_mask(const Matrix& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

template <typename MapT>
void fill_uniform(MapT&& m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  }
}

struct CurveNetActivations {
  Matrix a1, h1, a2, features, z, a3, h3;
  Vector out;  // sigmoid output
};

CurveNetActivations curvenet_activations(const CurveNetParams& p,
                                         const Matrix& curves,
                                         std::span<const ClassId> labels) {
  const auto& cfg = p.config();
  check_batch(curves, labels, cfg.curve_length, cfg.num_classes);
  CurveNetActivations act;
  act.a1 = affine(curves, p.enc1_w(), p.enc1_b());
  act.h1 = act.a1.cwiseMax(0.0);
  act.a2 = affine(act.h1, p.enc2_w(), p.enc2_b());
  act.features = act.a2.cwiseMax(0.0);
  act.z = act.features;
  const auto emb = p.embedding();
  for (Index i = 0; i < act.z.rows(); ++i) act.z.row(i) += emb.row(labels[i]);
  act.a3 = affine(act.z, p.head1_w(), p.head1_b());
  act.h3 = act.a3.cwiseMax(0.0);
  const Matrix logit = affine(act.h3, p.head2_w(), p.head2_b());
  check_finite(logit, "curvenet forward");
  act.out.resize(logit.rows());
  for (Index i = 0; i < logit.rows(); ++i) act.out[i] = sigmoid(logit(i, 0));
  return act;
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void CurveNetConfig::validate() const {
  if (curve_length < 1 || num_classes < 1 || embed_dim < 1 ||
      encoder_hidden < 1 || head_hidden < 1) {
    throw ConfigError("curvenet widths must all be at least 1");
  }
}

Index CurveNetConfig::param_count() const {
  return encoder_hidden * curve_length + encoder_hidden +
         embed_dim * encoder_hidden + embed_dim + num_classes * embed_dim +
         head_hidden * embed_dim + head_hidden + head_hidden + 1;
}

CurveNetParams::CurveNetParams(CurveNetConfig config)
    : config_(config), values_(Vector::Zero(config.param_count())) {
  config_.validate();
}

CurveNetParams::CurveNetParams(CurveNetConfig config, Vector values)
    : config_(config), values_(std::move(values)) {
  config_.validate();
  if (values_.size() != config_.param_count()) {
    throw ShapeError("curvenet parameter count mismatch");
  }
}

std::pair<Index, Index> CurveNetParams::block_range(int block) const {
  const auto& c = config_;
  const Index sizes[kBlockCount] = {
      c.encoder_hidden * c.curve_length, c.encoder_hidden,
      c.embed_dim * c.encoder_hidden,    c.embed_dim,
      c.num_classes * c.embed_dim,       c.head_hidden * c.embed_dim,
      c.head_hidden,                     c.head_hidden,
      1};
  Index begin = 0;
  for (int b = 0; b < block; ++b) begin += sizes[b];
  return {begin, begin + sizes[block]};
}

Eigen::Map<Matrix> CurveNetParams::mat(int block, Index rows, Index cols) {
  return {values_.data() + block_range(block).first, rows, cols};
}

Eigen::Map<const Matrix> CurveNetParams::mat(int block, Index rows,
                                             Index cols) const {
  return {values_.data() + block_range(block).first, rows, cols};
}

Eigen::Map<Vector> CurveNetParams::vec(int block, Index n) {
  return {values_.data() + block_range(block).first, n};
}

Eigen::Map<const Vector> CurveNetParams::vec(int block, Index n) const {
  return {values_.data() + block_range(block).first, n};
}

CurveNetParams init_curvenet(const CurveNetConfig& config, std::uint64_t seed) {
  CurveNetParams p(config);
  std::mt19937_64 rng(seed);
  auto fan_in = [](Index n) { return 1.0 / std::sqrt(static_cast<double>(n)); };
  fill_uniform(p.enc1_w(), fan_in(config.curve_length), rng);
  fill_uniform(p.enc1_b(), fan_in(config.curve_length), rng);
  fill_uniform(p.enc2_w(), fan_in(config.encoder_hidden), rng);
  fill_uniform(p.enc2_b(), fan_in(config.encoder_hidden), rng);
  fill_uniform(p.embedding(), fan_in(config.embed_dim), rng);
  fill_uniform(p.head1_w(), fan_in(config.embed_dim), rng);
  fill_uniform(p.head1_b(), fan_in(config.embed_dim), rng);
  // head2 stays zero: sigmoid(0) = 0.5 for every input.
  return p;
}

Vector curvenet_forward(const CurveNetParams& params, const Matrix& curves,
                        std::span<const ClassId> labels) {
  return curvenet_activations(params, curves, labels).out;
}

CurveNetGrad curvenet_param_grad(const CurveNetParams& params,
                                 const Matrix& curves,
                                 std::span<const ClassId> labels,
                                 const Vector& upstream) {
  if (upstream.size() != curves.rows()) {
    throw ShapeError("upstream size does not match curvenet batch");
  }
  if (!upstream.allFinite()) throw NumericError("non-finite upstream gradient");
  const auto act = curvenet_activations(params, curves, labels);
  CurveNetGrad g(params.config());

  // d sigmoid / d logit = w (1 - w)
  const Vector d_logit =
      upstream.cwiseProduct(act.out.cwiseProduct(
          (Vector::Ones(act.out.size()) - act.out)));
  g.head2_w() = d_logit.transpose() * act.h3;
  g.head2_b()[0] = d_logit.sum();

  const Matrix d_a3 =
      (d_logit * params.head2_w()).cwiseProduct(relu_mask(act.a3));
  g.head1_w() = d_a3.transpose() * act.z;
  g.head1_b() = d_a3.colwise().sum().transpose();

  const Matrix d_z = d_a3 * params.head1_w();
  auto d_emb = g.embedding();
  for (Index i = 0; i < d_z.rows(); ++i) d_emb.row(labels[i]) += d_z.row(i);

  const Matrix d_a2 = d_z.cwiseProduct(relu_mask(act.a2));
  g.enc2_w() = d_a2.transpose() * act.h1;
  g.enc2_b() = d_a2.colwise().sum().transpose();

  const Matrix d_a1 = (d_a2 * params.enc2_w()).cwiseProduct(relu_mask(act.a1));
  g.enc1_w() = d_a1.transpose() * curves;
  g.enc1_b() = d_a1.colwise().sum().transpose();

  check_finite(g.values(), "curvenet gradient");
  return g;
}

Vector CurveNetModel::weights(const Matrix& inputs,
                              std::span<const ClassId> labels) const {
  return curvenet_forward(params_, inputs, labels);
}

Vector CurveNetModel::param_grad(const Matrix& inputs,
                                 std::span<const ClassId> labels,
                                 const Vector& upstream) const {
  return curvenet_param_grad(params_, inputs, labels, upstream).values();
}

std::string CurveNetModel::config_json() const {
  const auto& c = params_.config();
  nlohmann::json j = {{"curve_length", c.curve_length},
                      {"num_classes", c.num_classes},
                      {"embed_dim", c.embed_dim},
                      {"encoder_hidden", c.encoder_hidden},
                      {"head_hidden", c.head_hidden}};
  return j.dump();
}

std::unique_ptr<WeightModel> CurveNetModel::clone() const {
  return std::make_unique<CurveNetModel>(*this);
}

TransientLossNet::TransientLossNet(std::uint64_t seed, Index hidden)
    : hidden_(hidden), params_(Vector::Zero(param_count(hidden))) {
  if (hidden < 1) throw ConfigError("transient weight net needs hidden >= 1");
  std::mt19937_64 rng(seed);
  // Input has fan-in 1.
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (Index j = 0; j < 2 * hidden_; ++j) params_[j] = dist(rng);
}

TransientLossNet::TransientLossNet(Index hidden, Vector params)
    : hidden_(hidden), params_(std::move(params)) {
  if (params_.size() != param_count(hidden_)) {
    throw ShapeError("transient weight net parameter count mismatch");
  }
}

Vector TransientLossNet::weights(const Matrix& inputs,
                                 std::span<const ClassId> labels) const {
  check_batch(inputs, labels, 1, 0);
  const Eigen::Map<const Vector> w1(params_.data(), hidden_);
  const Eigen::Map<const Vector> b1(params_.data() + hidden_, hidden_);
  const Eigen::Map<const Vector> w2(params_.data() + 2 * hidden_, hidden_);
  const double b2 = params_[3 * hidden_];
  Vector out(inputs.rows());
  for (Index i = 0; i < inputs.rows(); ++i) {
    const Vector h = (w1 * inputs(i, 0) + b1).cwiseMax(0.0);
    out[i] = sigmoid(w2.dot(h) + b2);
  }
  check_finite(out, "transient weight net");
  return out;
}

Vector TransientLossNet::param_grad(const Matrix& inputs,
                                    std::span<const ClassId> labels,
                                    const Vector& upstream) const {
  check_batch(inputs, labels, 1, 0);
  if (upstream.size() != inputs.rows()) {
    throw ShapeError("upstream size does not match weight net batch");
  }
  const Eigen::Map<const Vector> w1(params_.data(), hidden_);
  const Eigen::Map<const Vector> b1(params_.data() + hidden_, hidden_);
  const Eigen::Map<const Vector> w2(params_.data() + 2 * hidden_, hidden_);
  const double b2 = params_[3 * hidden_];
  Vector g = Vector::Zero(params_.size());
  for (Index i = 0; i < inputs.rows(); ++i) {
    const double x = inputs(i, 0);
    const Vector a = w1 * x + b1;
    const Vector h = a.cwiseMax(0.0);
    const double w = sigmoid(w2.dot(h) + b2);
    const double d_logit = upstream[i] * w * (1.0 - w);
    g.segment(2 * hidden_, hidden_) += d_logit * h;
    g[3 * hidden_] += d_logit;
    const Vector d_a = (d_logit * w2).cwiseProduct(relu_mask(a));
    g.segment(0, hidden_) += d_a * x;
    g.segment(hidden_, hidden_) += d_a;
  }
  check_finite(g, "transient weight net gradient");
  return g;
}

std::string TransientLossNet::config_json() const {
  return nlohmann::json({{"hidden", hidden_}}).dump();
}

std::unique_ptr<WeightModel> TransientLossNet::clone() const {
  return std::make_unique<TransientLossNet>(*this);
}

Vector ConstantWeight::weights(const Matrix&,
                               std::span<const ClassId> labels) const {
  return Vector::Constant(static_cast<Index>(labels.size()), value_);
}

Vector ConstantWeight::param_grad(const Matrix&, std::span<const ClassId>,
                                  const Vector&) const {
  return Vector();
}

std::string ConstantWeight::config_json() const {
  return nlohmann::json({{"value", value_}}).dump();
}

std::unique_ptr<WeightModel> ConstantWeight::clone() const {
  return std::make_unique<ConstantWeight>(*this);
}

}  // namespace probeweight
