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

#include "fairreg/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairreg/error.hpp"

namespace fairreg {

namespace {

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kReLU:
      return z > 0.0 ? z : 0.0;
    case Activation::kSigmoid:
      return sigmoid(z);
    case Activation::kIdentity:
      return z;
  }
  return z;
}

// d act / d pre, expressed through pre and post.
double activation_slope(Activation a, double pre, double post) {
  switch (a) {
    case Activation::kReLU:
      return pre > 0.0 ? 1.0 : 0.0;
    case Activation::kSigmoid:
      return post * (1.0 - post);
    case Activation::kIdentity:
      return 1.0;
  }
  return 1.0;
}

// out = in * W^T + b, before activation.
Matrix affine(const Layer& layer, const Matrix& in) {
  const std::size_t n = in.rows();
  const std::size_t out_w = layer.out_width();
  const std::size_t in_w = layer.in_width();
  Matrix out(n, out_w);
  for (std::size_t r = 0; r < n; ++r) {
    const double* x = in.row(r).data();
    double* y = out.row(r).data();
    for (std::size_t o = 0; o < out_w; ++o) {
      const double* w = layer.weights.row(o).data();
      double acc = layer.bias[o];
      for (std::size_t i = 0; i < in_w; ++i) acc += w[i] * x[i];
      y[o] = acc;
    }
  }
  return out;
}

void check_input(std::span<const Layer> layers, const Matrix& input) {
  if (layers.empty()) throw ShapeError("empty layer stack");
  if (input.cols() != layers.front().in_width()) {
    throw ShapeError("input has " + std::to_string(input.cols()) +
                     " columns, first layer expects " +
                     std::to_string(layers.front().in_width()));
  }
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kReLU:
      return "relu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kIdentity:
      return "identity";
  }
  return "?";
}

std::string_view to_string(AdversaryKind k) {
  switch (k) {
    case AdversaryKind::kNone:
      return "none";
    case AdversaryKind::kCrossEntropy:
      return "cross_entropy";
    case AdversaryKind::kWassersteinCritic:
      return "wasserstein_critic";
  }
  return "?";
}

std::string_view to_string(OptimizerKind k) {
  return k == OptimizerKind::kSgd ? "sgd" : "adadelta";
}

void validate_stack(std::span<const Layer> layers) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& l = layers[k];
    if (l.bias.size() != l.out_width()) {
      throw ShapeError("layer " + std::to_string(k) + ": bias length " +
                       std::to_string(l.bias.size()) + " != " + std::to_string(l.out_width()));
    }
    if (k + 1 < layers.size() && layers[k + 1].in_width() != l.out_width()) {
      throw ShapeError("layer " + std::to_string(k) + " outputs " +
                       std::to_string(l.out_width()) + " but layer " + std::to_string(k + 1) +
                       " expects " + std::to_string(layers[k + 1].in_width()));
    }
  }
}

std::size_t MlpModel::input_width() const {
  return feature_map.empty() ? 0 : feature_map.front().in_width();
}

std::size_t MlpModel::feature_width() const {
  return feature_map.empty() ? 0 : feature_map.back().out_width();
}

void MlpModel::validate() const {
  if (feature_map.empty() || head.empty()) throw ShapeError("model needs feature map and head");
  validate_stack(feature_map);
  validate_stack(head);
  if (head.front().in_width() != feature_width()) throw ShapeError("head does not read Z");
  if (head.back().out_width() != 1) throw ShapeError("head must output one value");
  if (adversary_kind == AdversaryKind::kNone) {
    if (!adversary.empty()) throw ConfigError("adversary layers present without adversary kind");
    return;
  }
  if (adversary.empty()) throw ConfigError("adversary kind set but no adversary layers");
  validate_stack(adversary);
  if (adversary.front().in_width() != feature_width() + 1) {
    throw ShapeError("adversary must read feature width + 1 inputs");
  }
  if (adversary.back().out_width() != 1) throw ShapeError("adversary must output one value");
  const Activation want = adversary_kind == AdversaryKind::kCrossEntropy ? Activation::kSigmoid
                                                                         : Activation::kIdentity;
  if (adversary.back().activation != want) {
    throw ConfigError(std::string("adversary of kind ") + std::string(to_string(adversary_kind)) +
                      " must end in " + std::string(to_string(want)));
  }
}

ForwardResult forward(std::span<const Layer> layers, const Matrix& input) {
  check_input(layers, input);
  ForwardResult result;
  result.cache.input = input;
  result.cache.pre.reserve(layers.size());
  result.cache.post.reserve(layers.size());
  const Matrix* current = &input;
  for (const Layer& layer : layers) {
    if (current->cols() != layer.in_width()) throw ShapeError("layer stack does not chain");
    Matrix pre = affine(layer, *current);
    Matrix post(pre.rows(), pre.cols());
    auto pv = pre.values();
    auto qv = post.values();
    for (std::size_t i = 0; i < pv.size(); ++i) qv[i] = activate(layer.activation, pv[i]);
    result.cache.pre.push_back(std::move(pre));
    result.cache.post.push_back(std::move(post));
    current = &result.cache.post.back();
  }
  result.output = result.cache.post.back();
  return result;
}

Matrix predict(std::span<const Layer> layers, const Matrix& input) {
  check_input(layers, input);
  Matrix current = input;
  for (const Layer& layer : layers) {
    if (current.cols() != layer.in_width()) throw ShapeError("layer stack does not chain");
    Matrix next = affine(layer, current);
    for (double& v : next.values()) v = activate(layer.activation, v);
    current = std::move(next);
  }
  return current;
}

BackwardResult backward(std::span<const Layer> layers, const ForwardCache& cache,
                        const Matrix& output_grad) {
  if (layers.empty() || cache.post.size() != layers.size() || cache.pre.size() != layers.size()) {
    throw ShapeError("forward cache does not match layer stack");
  }
  const Matrix& out = cache.post.back();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
    throw ShapeError("output gradient is " + dims(output_grad.rows(), output_grad.cols()) +
                     ", forward output is " + dims(out.rows(), out.cols()));
  }

  BackwardResult result;
  result.params.resize(layers.size());
  Matrix upstream = output_grad;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const Layer& layer = layers[k];
    const Matrix& in = k == 0 ? cache.input : cache.post[k - 1];
    const Matrix& pre = cache.pre[k];
    const Matrix& post = cache.post[k];
    const std::size_t n = in.rows();
    const std::size_t out_w = layer.out_width();
    const std::size_t in_w = layer.in_width();

    Matrix delta(n, out_w);
    for (std::size_t i = 0; i < delta.size(); ++i) {
      delta.values()[i] = upstream.values()[i] *
                          activation_slope(layer.activation, pre.values()[i], post.values()[i]);
    }

    LayerGrads& g = result.params[k];
    g.weights = Matrix(out_w, in_w);
    g.bias.assign(out_w, 0.0);
    Matrix down(n, in_w);
    for (std::size_t r = 0; r < n; ++r) {
      const double* d = delta.row(r).data();
      const double* x = in.row(r).data();
      double* dx = down.row(r).data();
      for (std::size_t o = 0; o < out_w; ++o) {
        const double dv = d[o];
        g.bias[o] += dv;
        double* gw = g.weights.row(o).data();
        const double* w = layer.weights.row(o).data();
        for (std::size_t i = 0; i < in_w; ++i) {
          gw[i] += dv * x[i];
          dx[i] += dv * w[i];
        }
      }
    }
    upstream = std::move(down);
  }
  result.input_grad = std::move(upstream);
  return result;
}

Matrix grl_backward(const Matrix& upstream_grad, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("grl_backward: lambda must be >= 0");
  Matrix out = upstream_grad;
  for (double& v : out.values()) v = -lambda * v;
  return out;
}

LossResult mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw ShapeError("mse_loss: length mismatch");
  if (pred.empty()) throw DomainError("mse_loss: empty input");
  const double n = static_cast<double>(pred.size());
  LossResult r;
  r.grad.resize(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
    r.grad[i] = 2.0 * d / n;
  }
  r.value = sum / n;
  return r;
}

LossResult bce_loss(std::span<const double> pred, std::span<const int> labels) {
  if (pred.size() != labels.size()) throw ShapeError("bce_loss: length mismatch");
  if (pred.empty()) throw DomainError("bce_loss: empty input");
  const double n = static_cast<double>(pred.size());
  LossResult r;
  r.grad.resize(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], kBceClamp, 1.0 - kBceClamp);
    if (labels[i] != 0) {
      sum -= std::log(p);
      r.grad[i] = -1.0 / (p * n);
    } else {
      sum -= std::log1p(-p);
      r.grad[i] = 1.0 / ((1.0 - p) * n);
    }
  }
  r.value = sum / n;
  return r;
}

std::optional<LossResult> wasserstein_penalty(std::span<const double> critic_out,
                                              std::span<const int> groups) {
  if (critic_out.size() != groups.size()) throw ShapeError("wasserstein_penalty: length mismatch");
  double sum0 = 0.0, sum1 = 0.0;
  std::size_t n0 = 0, n1 = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i] == 0) {
      sum0 += critic_out[i];
      ++n0;
    } else {
      sum1 += critic_out[i];
      ++n1;
    }
  }
  if (n0 == 0 || n1 == 0) return std::nullopt;
  const double m0 = sum0 / static_cast<double>(n0);
  const double m1 = sum1 / static_cast<double>(n1);
  const double diff = m1 - m0;
  const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
  LossResult r;
  r.value = std::abs(diff);
  r.grad.resize(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    r.grad[i] = groups[i] == 0 ? -sign / static_cast<double>(n0) : sign / static_cast<double>(n1);
  }
  return r;
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (kind == OptimizerKind::kAdadelta) {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("adadelta rho must lie in (0, 1)");
    if (!(eps > 0.0)) throw ConfigError("adadelta eps must be positive");
  }
}

OptimizerState::OptimizerState(OptimizerConfig cfg) : config(cfg) { config.validate(); }

namespace {

LayerGrads zeros_like(const Layer& l) {
  return {Matrix(l.out_width(), l.in_width()), Vector(l.out_width(), 0.0)};
}

void adadelta_update(std::span<double> p, std::span<const double> g, std::span<double> eg2,
                     std::span<double> edx2, const OptimizerConfig& c) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    eg2[i] = c.rho * eg2[i] + (1.0 - c.rho) * g[i] * g[i];
    const double dx = -std::sqrt(edx2[i] + c.eps) / std::sqrt(eg2[i] + c.eps) * g[i];
    edx2[i] = c.rho * edx2[i] + (1.0 - c.rho) * dx * dx;
    p[i] += c.learning_rate * dx;
  }
}

}  // namespace

void optimizer_step(OptimizerState& state, LayerStack& layers, std::span<const LayerGrads> grads) {
  if (grads.size() != layers.size()) throw ShapeError("optimizer_step: gradient count mismatch");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (grads[k].weights.rows() != layers[k].weights.rows() ||
        grads[k].weights.cols() != layers[k].weights.cols() ||
        grads[k].bias.size() != layers[k].bias.size()) {
      throw ShapeError("optimizer_step: gradient shape mismatch at layer " + std::to_string(k));
    }
  }
  const OptimizerConfig& c = state.config;
  if (c.kind == OptimizerKind::kSgd) {
    for (std::size_t k = 0; k < layers.size(); ++k) {
      auto w = layers[k].weights.values();
      auto gw = grads[k].weights.values();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c.learning_rate * gw[i];
      for (std::size_t i = 0; i < layers[k].bias.size(); ++i) {
        layers[k].bias[i] -= c.learning_rate * grads[k].bias[i];
      }
    }
    return;
  }

  if (state.sq_grad_avg.empty()) {
    for (const Layer& l : layers) {
      state.sq_grad_avg.push_back(zeros_like(l));
      state.sq_update_avg.push_back(zeros_like(l));
    }
  }
  if (state.sq_grad_avg.size() != layers.size()) {
    throw ShapeError("optimizer state was built for a different stack");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto& eg = state.sq_grad_avg[k];
    auto& ed = state.sq_update_avg[k];
    if (eg.weights.size() != layers[k].weights.size()) {
      throw ShapeError("optimizer accumulator shape mismatch at layer " + std::to_string(k));
    }
    adadelta_update(layers[k].weights.values(), grads[k].weights.values(), eg.weights.values(),
                    ed.weights.values(), c);
    adadelta_update(layers[k].bias, grads[k].bias, eg.bias, ed.bias, c);
  }
}

void clip_weights(LayerStack& layers, double c) {
  if (!(c > 0.0)) throw DomainError("clip norm must be positive");
  for (Layer& l : layers) {
    for (double& w : l.weights.values()) w = std::clamp(w, -c, c);
    for (double& b : l.bias) b = std::clamp(b, -c, c);
  }
}

double max_abs_param(std::span<const Layer> layers) {
  double m = 0.0;
  for (const Layer& l : layers) {
    for (double w : l.weights.values()) m = std::max(m, std::abs(w));
    for (double b : l.bias) m = std::max(m, std::abs(b));
  }
  return m;
}

Matrix init_glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw ShapeError("init_glorot: dimensions must be positive");
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-limit, limit);
  return m;
}

Matrix init_glorot(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  return init_glorot(rows, cols, rng);
}

LayerStack make_stack(std::size_t in_width, std::span<const std::size_t> hidden,
                      std::size_t out_width, Activation hidden_act, Activation output_act,
                      Rng& rng) {
  LayerStack stack;
  std::size_t prev = in_width;
  for (std::size_t w : hidden) {
    stack.push_back({init_glorot(w, prev, rng), Vector(w, 0.0), hidden_act});
    prev = w;
  }
  stack.push_back({init_glorot(out_width, prev, rng), Vector(out_width, 0.0), output_act});
  return stack;
}

}  // namespace fairreg
