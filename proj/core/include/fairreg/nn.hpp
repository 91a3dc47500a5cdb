// Copyright 2026 The fairreg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense MLP engine: forward/backward over affine+activation stacks, the
// gradient reversal layer, losses, optimizers and weight clipping.

#ifndef FAIRREG_NN_HPP_
#define FAIRREG_NN_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fairreg/matrix.hpp"
#include "fairreg/rng.hpp"

namespace fairreg {

enum class Activation { kReLU, kSigmoid, kIdentity };

std::string_view to_string(Activation a);

// y = act(W x + b), W is out x in.
struct Layer {
  Matrix weights;
  Vector bias;
  Activation activation = Activation::kIdentity;

  std::size_t in_width() const { return weights.cols(); }
  std::size_t out_width() const { return weights.rows(); }

  friend bool operator==(const Layer&, const Layer&) = default;
};

using LayerStack = std::vector<Layer>;

enum class AdversaryKind { kNone, kCrossEntropy, kWassersteinCritic };

std::string_view to_string(AdversaryKind k);

// g (feature_map) -> Z -> h (head) -> prediction, and the adversary f that
// reads [Z | y].
struct MlpModel {
  LayerStack feature_map;
  LayerStack head;
  LayerStack adversary;
  AdversaryKind adversary_kind = AdversaryKind::kNone;

  std::size_t input_width() const;
  std::size_t feature_width() const;

  // Throws ShapeError / ConfigError when the stacks do not chain, the
  // adversary does not read feature_width()+1 inputs, or its output
  // activation does not match adversary_kind.
  void validate() const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

// Checks bias length and that consecutive layers chain.
void validate_stack(std::span<const Layer> layers);

struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // W x + b per layer
  std::vector<Matrix> post;  // act(pre) per layer
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

ForwardResult forward(std::span<const Layer> layers, const Matrix& input);
// Forward pass without keeping intermediates.
Matrix predict(std::span<const Layer> layers, const Matrix& input);

struct LayerGrads {
  Matrix weights;
  Vector bias;
};

struct BackwardResult {
  std::vector<LayerGrads> params;
  Matrix input_grad;
};

BackwardResult backward(std::span<const Layer> layers, const ForwardCache& cache,
                        const Matrix& output_grad);

// Backward pass of the gradient reversal layer: -lambda * upstream.
// The forward pass is the identity and needs no function.
Matrix grl_backward(const Matrix& upstream_grad, double lambda);

struct LossResult {
  double value = 0.0;
  Vector grad;  // d value / d prediction
};

LossResult mse_loss(std::span<const double> pred, std::span<const double> target);

inline constexpr double kBceClamp = 1e-7;

// Binary cross-entropy in nats; predictions clamped to [1e-7, 1 - 1e-7].
LossResult bce_loss(std::span<const double> pred, std::span<const int> labels);

// |mean(out | group 0) - mean(out | group 1)| and its subgradient. Returns
// nullopt when the batch lacks one of the groups; the caller then skips the
// penalty for that step.
std::optional<LossResult> wasserstein_penalty(std::span<const double> critic_out,
                                              std::span<const int> groups);

enum class OptimizerKind { kSgd, kAdadelta };

std::string_view to_string(OptimizerKind k);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdadelta;
  double learning_rate = 0.1;
  double rho = 0.9;
  double eps = 1e-6;

  void validate() const;
};

// Per-stack optimizer state. Adadelta accumulators are allocated on the
// first step and mirror the parameter shapes.
struct OptimizerState {
  OptimizerConfig config;
  std::vector<LayerGrads> sq_grad_avg;
  std::vector<LayerGrads> sq_update_avg;

  explicit OptimizerState(OptimizerConfig cfg = {});
};

void optimizer_step(OptimizerState& state, LayerStack& layers,
                    std::span<const LayerGrads> grads);

// Clamps every weight and bias entry to [-c, c].
void clip_weights(LayerStack& layers, double c);

// Largest |entry| over all weights and biases.
double max_abs_param(std::span<const Layer> layers);

// Uniform in +-sqrt(6 / (fan_in + fan_out)); rows = fan_out, cols = fan_in.
Matrix init_glorot(std::size_t rows, std::size_t cols, std::uint64_t seed);
Matrix init_glorot(std::size_t rows, std::size_t cols, Rng& rng);

// Stack in_width -> hidden... -> out_width. Hidden layers use `hidden`,
// the last layer uses `output`. Weights Glorot, biases zero.
LayerStack make_stack(std::size_t in_width, std::span<const std::size_t> hidden,
                      std::size_t out_width, Activation hidden_act, Activation output_act,
                      Rng& rng);

}  // namespace fairreg

#endif  // FAIRREG_NN_HPP_
