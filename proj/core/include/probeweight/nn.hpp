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

// Dense rectifier classifier with hand-written backpropagation.
//
// Parameters live in one flat vector partitioned by layer so that optimizers,
// finite-difference checks and layer masking all operate on plain segments.
// Layer 0 is the input-side layer. Hidden layers use max(0, x); the last layer
// emits raw logits and the softmax is folded into the cross-entropy loss.
//
// Gradient scale convention: every batch gradient is the gradient of
//   (1/B) * sum_i c_i * loss_i
// for per-sample coefficients c_i.

#ifndef PROBEWEIGHT_NN_HPP_
#define PROBEWEIGHT_NN_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace probeweight {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ClassId = std::int32_t;

namespace nn {

struct LayerShape {
  Index in = 0;
  Index out = 0;

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

// Shapes and flat offsets of a layered parameter vector. Each layer stores its
// column-major [out x in] weight followed by its [out] bias.
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(std::vector<LayerShape> shapes);

  // input_dim -> hidden[0] -> ... -> hidden.back() -> classes
  static ParamLayout dense(Index input_dim, std::span<const Index> hidden,
                           Index classes);

  int layer_count() const { return static_cast<int>(shapes_.size()); }
  const LayerShape& shape(int layer) const { return shapes_.at(layer); }
  const std::vector<LayerShape>& shapes() const { return shapes_; }
  Index size() const { return offsets_.empty() ? 0 : offsets_.back(); }
  Index input_dim() const;
  Index output_dim() const;

  Index layer_begin(int layer) const { return offsets_.at(layer); }
  Index layer_end(int layer) const { return offsets_.at(layer + 1); }
  Index bias_offset(int layer) const;

  friend bool operator==(const ParamLayout& a, const ParamLayout& b) {
    return a.shapes_ == b.shapes_;
  }

 private:
  std::vector<LayerShape> shapes_;
  std::vector<Index> offsets_;
};

class LayeredVector {
 public:
  LayeredVector() = default;
  explicit LayeredVector(ParamLayout layout);
  LayeredVector(ParamLayout layout, Vector values);

  const ParamLayout& layout() const { return layout_; }
  int layer_count() const { return layout_.layer_count(); }
  Index size() const { return values_.size(); }

  Vector& values() { return values_; }
  const Vector& values() const { return values_; }

  Eigen::Map<Matrix> weight(int layer);
  Eigen::Map<const Matrix> weight(int layer) const;
  Eigen::Map<Vector> bias(int layer);
  Eigen::Map<const Vector> bias(int layer) const;
  Eigen::VectorBlock<Vector> layer_segment(int layer);
  Eigen::VectorBlock<const Vector> layer_segment(int layer) const;

  // Zeroes every layer with index < first_kept.
  void zero_layers_below(int first_kept);

 protected:
  ParamLayout layout_;
  Vector values_;
};

// The classifier parameters.
class ClassifierParams : public LayeredVector {
 public:
  using LayeredVector::LayeredVector;
};

// Per-layer gradients with the same layout as ClassifierParams.
class GradientBundle : public LayeredVector {
 public:
  using LayeredVector::LayeredVector;
};

// He-uniform weights (bound sqrt(6 / fan_in)), zero biases.
ClassifierParams init_classifier(const ParamLayout& layout, std::uint64_t seed);

// Activations kept for backpropagation. inputs[l] is the input of layer l and
// preacts[l] its affine output; preacts.back() holds the logits.
struct ForwardCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> preacts;

  const Matrix& logits() const { return preacts.back(); }
  Index batch_size() const { return inputs.front().rows(); }
};

ForwardCache forward(const ClassifierParams& params, const Matrix& batch_inputs);

Matrix forward_logits(const ClassifierParams& params,
                      const Matrix& batch_inputs);

// Softmax cross-entropy of each row.
Vector per_sample_loss(const Matrix& logits, std::span<const ClassId> labels);

// d loss_i / d logits_i for every row: softmax(logits_i) - onehot(label_i).
Matrix loss_logit_grad(const Matrix& logits, std::span<const ClassId> labels);

// Per-sample backpropagated deltas d loss_i / d preacts[l] for layers
// l >= lowest_layer. Entries below lowest_layer are left empty.
std::vector<Matrix> backprop_deltas(const ClassifierParams& params,
                                    const ForwardCache& cache,
                                    const Matrix& top_delta, int lowest_layer);

// sum_i coeffs_i * grad loss_i, restricted to layers >= lowest_layer (lower
// layers stay zero).
GradientBundle accumulate_gradient(const ParamLayout& layout,
                                   const ForwardCache& cache,
                                   const std::vector<Matrix>& deltas,
                                   const Vector& coeffs, int lowest_layer = 0);

// Gradient of (1/B) sum_i weights_i * loss_i.
GradientBundle weighted_grad(const ClassifierParams& params,
                             const Matrix& batch_inputs,
                             std::span<const ClassId> labels,
                             const Vector& weights);

// s_i = sum over layers l >= skip_layers of <grad_{w_l} loss_i, meta_grad_l>,
// computed without materializing per-sample gradients.
Vector per_sample_grad_dots(const ClassifierParams& params,
                            const Matrix& batch_inputs,
                            std::span<const ClassId> labels,
                            const GradientBundle& meta_grad, int skip_layers);

// Same contraction from precomputed activations and deltas. deltas must cover
// every layer >= skip_layers.
Vector grad_dots(const ForwardCache& cache, const std::vector<Matrix>& deltas,
                 const GradientBundle& meta_grad, int skip_layers);

// Index of the largest logit per row.
std::vector<ClassId> predict(const ClassifierParams& params,
                             const Matrix& batch_inputs);

}  // namespace nn
}  // namespace probeweight

#endif  // PROBEWEIGHT_NN_HPP_
