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

#include "probeweight/nn.hpp"

#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "probeweight/errors.hpp"

namespace probeweight::nn {
namespace {

void check_labels(std::span<const ClassId> labels, Index rows, Index classes) {
  if (static_cast<Index>(labels.size()) != rows) {
    throw ShapeError("label count " + std::to_string(labels.size()) +
                     " does not match batch size " + std::to_string(rows));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw DomainError("label " + std::to_string(labels[i]) + " of row " +
                        std::to_string(i) + " outside [0, " +
                        std::to_string(classes) + ")");
    }
  }
}

void check_finite(const Matrix& m, int layer, const char* what) {
  if (!m.allFinite()) {
    throw NumericError(std::string("non-finite ") + what + " at layer " +
                       std::to_string(layer));
  }
}

}  // namespace

ParamLayout::ParamLayout(std::vector<LayerShape> shapes)
    : shapes_(std::move(shapes)) {
  if (shapes_.empty()) throw ShapeError("classifier needs at least one layer");
  offsets_.reserve(shapes_.size() + 1);
  offsets_.push_back(0);
  for (std::size_t l = 0; l < shapes_.size(); ++l) {
    const auto& s = shapes_[l];
    if (s.in < 1 || s.out < 1) {
      throw ShapeError("layer " + std::to_string(l) + " has an empty dimension");
    }
    if (l > 0 && shapes_[l - 1].out != s.in) {
      throw ShapeError("layer " + std::to_string(l) + " expects " +
                       std::to_string(s.in) + " inputs but layer " +
                       std::to_string(l - 1) + " produces " +
                       std::to_string(shapes_[l - 1].out));
    }
    offsets_.push_back(offsets_.back() + s.out * s.in + s.out);
  }
}

ParamLayout ParamLayout::dense(Index input_dim, std::span<const Index> hidden,
                               Index classes) {
  std::vector<LayerShape> shapes;
  Index in = input_dim;
  for (Index h : hidden) {
    shapes.push_back({in, h});
    in = h;
  }
  shapes.push_back({in, classes});
  return ParamLayout(std::move(shapes));
}

Index ParamLayout::input_dim() const { return shapes_.front().in; }
Index ParamLayout::output_dim() const { return shapes_.back().out; }

Index ParamLayout::bias_offset(int layer) const {
  const auto& s = shapes_.at(layer);
  return offsets_[layer] + s.out * s.in;
}

LayeredVector::LayeredVector(ParamLayout layout)
    : layout_(std::move(layout)), values_(Vector::Zero(layout_.size())) {}

LayeredVector::LayeredVector(ParamLayout layout, Vector values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (values_.size() != layout_.size()) {
    throw ShapeError("value count " + std::to_string(values_.size()) +
                     " does not match layout size " +
                     std::to_string(layout_.size()));
  }
}

Eigen::Map<Matrix> LayeredVector::weight(int layer) {
  const auto& s = layout_.shape(layer);
  return {values_.data() + layout_.layer_begin(layer), s.out, s.in};
}

Eigen::Map<const Matrix> LayeredVector::weight(int layer) const {
  const auto& s = layout_.shape(layer);
  return {values_.data() + layout_.layer_begin(layer), s.out, s.in};
}

Eigen::Map<Vector> LayeredVector::bias(int layer) {
  return {values_.data() + layout_.bias_offset(layer),
          layout_.shape(layer).out};
}

Eigen::Map<const Vector> LayeredVector::bias(int layer) const {
  return {values_.data() + layout_.bias_offset(layer),
          layout_.shape(layer).out};
}

Eigen::VectorBlock<Vector> LayeredVector::layer_segment(int layer) {
  return values_.segment(layout_.layer_begin(layer),
                         layout_.layer_end(layer) - layout_.layer_begin(layer));
}

Eigen::VectorBlock<const Vector> LayeredVector::layer_segment(int layer) const {
  return values_.segment(layout_.layer_begin(layer),
                         layout_.layer_end(layer) - layout_.layer_begin(layer));
}

void LayeredVector::zero_layers_below(int first_kept) {
  for (int l = 0; l < std::min(first_kept, layer_count()); ++l) {
    layer_segment(l).setZero();
  }
}

ClassifierParams init_classifier(const ParamLayout& layout,
                                 std::uint64_t seed) {
  ClassifierParams params(layout);
  std::mt19937_64 rng(seed);
  for (int l = 0; l < layout.layer_count(); ++l) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(layout.shape(l).in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = params.weight(l);
    for (Index j = 0; j < w.cols(); ++j) {
      for (Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
  }
  return params;
}

ForwardCache forward(const ClassifierParams& params,
                     const Matrix& batch_inputs) {
  const auto& layout = params.layout();
  if (batch_inputs.rows() < 1) throw ShapeError("empty batch");
  if (batch_inputs.cols() != layout.input_dim()) {
    throw ShapeError("layer 0 expects " + std::to_string(layout.input_dim()) +
                     " input features, got " +
                     std::to_string(batch_inputs.cols()));
  }
  const int z = layout.layer_count();
  ForwardCache cache;
  cache.inputs.reserve(z);
  cache.preacts.reserve(z);
  cache.inputs.push_back(batch_inputs);
  for (int l = 0; l < z; ++l) {
    Matrix a = cache.inputs[l] * params.weight(l).transpose();
    a.rowwise() += params.bias(l).transpose();
    check_finite(a, l, "activation");
    if (l + 1 < z) cache.inputs.push_back(a.cwiseMax(0.0));
    cache.preacts.push_back(std::move(a));
  }
  return cache;
}

Matrix forward_logits(const ClassifierParams& params,
                      const Matrix& batch_inputs) {
  const auto& layout = params.layout();
  if (batch_inputs.rows() < 1) throw ShapeError("empty batch");
  if (batch_inputs.cols() != layout.input_dim()) {
    throw ShapeError("layer 0 expects " + std::to_string(layout.input_dim()) +
                     " input features, got " +
                     std::to_string(batch_inputs.cols()));
  }
  Matrix h = batch_inputs;
  for (int l = 0; l < layout.layer_count(); ++l) {
    Matrix a = h * params.weight(l).transpose();
    a.rowwise() += params.bias(l).transpose();
    check_finite(a, l, "activation");
    h = (l + 1 < layout.layer_count()) ? Matrix(a.cwiseMax(0.0)) : std::move(a);
  }
  return h;
}

Vector per_sample_loss(const Matrix& logits, std::span<const ClassId> labels) {
  check_labels(labels, logits.rows(), logits.cols());
  Vector out(logits.rows());
  for (Index i = 0; i < logits.rows(); ++i) {
    Index top = 0;
    const double m = logits.row(i).maxCoeff(&top);
    // log1p keeps precision when the runner-up logits are far below the max.
    double tail = 0.0;
    for (Index k = 0; k < logits.cols(); ++k) {
      if (k != top) tail += std::exp(logits(i, k) - m);
    }
    out[i] = (m - logits(i, labels[i])) + std::log1p(tail);
  }
  return out;
}

Matrix loss_logit_grad(const Matrix& logits, std::span<const ClassId> labels) {
  check_labels(labels, logits.rows(), logits.cols());
  Matrix g(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    double z = 0.0;
    for (Index k = 0; k < logits.cols(); ++k) {
      g(i, k) = std::exp(logits(i, k) - m);
      z += g(i, k);
    }
    g.row(i) /= z;
    g(i, labels[i]) -= 1.0;
  }
  return g;
}

std::vector<Matrix> backprop_deltas(const ClassifierParams& params,
                                    const ForwardCache& cache,
                                    const Matrix& top_delta, int lowest_layer) {
  const int z = params.layer_count();
  if (lowest_layer < 0 || lowest_layer > z) {
    throw DomainError("lowest layer " + std::to_string(lowest_layer) +
                      " outside [0, " + std::to_string(z) + "]");
  }
  std::vector<Matrix> deltas(z);
  if (lowest_layer == z) return deltas;
  deltas[z - 1] = top_delta;
  for (int l = z - 1; l > lowest_layer; --l) {
    Matrix d = deltas[l] * params.weight(l);
    d.array() *= (cache.preacts[l - 1].array() > 0.0).cast<double>();
    check_finite(d, l - 1, "gradient");
    deltas[l - 1] = std::move(d);
  }
  return deltas;
}

GradientBundle accumulate_gradient(const ParamLayout& layout,
                                   const ForwardCache& cache,
                                   const std::vector<Matrix>& deltas,
                                   const Vector& coeffs, int lowest_layer) {
  GradientBundle grad(layout);
  for (int l = std::max(lowest_layer, 0); l < layout.layer_count(); ++l) {
    const Matrix scaled = coeffs.asDiagonal() * deltas[l];
    grad.weight(l).noalias() = scaled.transpose() * cache.inputs[l];
    grad.bias(l) = scaled.colwise().sum().transpose();
  }
  return grad;
}

GradientBundle weighted_grad(const ClassifierParams& params,
                             const Matrix& batch_inputs,
                             std::span<const ClassId> labels,
                             const Vector& weights) {
  if (weights.size() != batch_inputs.rows()) {
    throw ShapeError("weight count does not match batch size");
  }
  if (!weights.allFinite()) throw NumericError("non-finite sample weights");
  const ForwardCache cache = forward(params, batch_inputs);
  const Matrix top = loss_logit_grad(cache.logits(), labels);
  const auto deltas = backprop_deltas(params, cache, top, 0);
  const Vector coeffs = weights / static_cast<double>(batch_inputs.rows());
  return accumulate_gradient(params.layout(), cache, deltas, coeffs, 0);
}

Vector grad_dots(const ForwardCache& cache, const std::vector<Matrix>& deltas,
                 const GradientBundle& meta_grad, int skip_layers) {
  const int z = meta_grad.layer_count();
  if (skip_layers < 0 || skip_layers > z) {
    throw DomainError("skip layers " + std::to_string(skip_layers) +
                      " outside [0, " + std::to_string(z) + "]");
  }
  Vector s = Vector::Zero(cache.batch_size());
  for (int l = skip_layers; l < z; ++l) {
    // <delta_i h_i^T, G> = delta_i . (G h_i), plus the bias term delta_i . g_b
    Matrix projected = cache.inputs[l] * meta_grad.weight(l).transpose();
    projected.rowwise() += meta_grad.bias(l).transpose();
    s += deltas[l].cwiseProduct(projected).rowwise().sum();
  }
  return s;
}

Vector per_sample_grad_dots(const ClassifierParams& params,
                            const Matrix& batch_inputs,
                            std::span<const ClassId> labels,
                            const GradientBundle& meta_grad, int skip_layers) {
  const int z = params.layer_count();
  if (skip_layers < 0 || skip_layers > z) {
    throw DomainError("skip layers " + std::to_string(skip_layers) +
                      " outside [0, " + std::to_string(z) + "]");
  }
  if (!(meta_grad.layout() == params.layout())) {
    throw ShapeError("meta gradient layout does not match classifier");
  }
  const ForwardCache cache = forward(params, batch_inputs);
  const Matrix top = loss_logit_grad(cache.logits(), labels);
  const auto deltas = backprop_deltas(params, cache, top, skip_layers);
  return grad_dots(cache, deltas, meta_grad, skip_layers);
}

std::vector<ClassId> predict(const ClassifierParams& params,
                             const Matrix& batch_inputs) {
  const Matrix logits = forward_logits(params, batch_inputs);
  std::vector<ClassId> out(logits.rows());
  for (Index i = 0; i < logits.rows(); ++i) {
    Index k = 0;
    logits.row(i).maxCoeff(&k);
    out[i] = static_cast<ClassId>(k);
  }
  return out;
}

}  // namespace probeweight::nn
