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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fairreg/error.hpp"
#include "fairreg/nn.hpp"
#include "support/oracles.hpp"

namespace fairreg {
namespace {

Layer make_layer(Matrix w, Activation act) {
  Layer l;
  l.bias.assign(w.rows(), 0.0);
  l.weights = std::move(w);
  l.activation = act;
  return l;
}

TEST(Forward, IdentityLayerPassesInputThrough) {
  const LayerStack net = {make_layer(Matrix::identity(2), Activation::kIdentity)};
  EXPECT_EQ(predict(net, Matrix{{1, 2}}), (Matrix{{1, 2}}));
}

TEST(Forward, ZeroSigmoidLayerGivesOneHalf) {
  const LayerStack net = {make_layer(Matrix(3, 2, 0.0), Activation::kSigmoid)};
  const Matrix out = predict(net, Matrix{{-7, 2}, {100, -3}});
  for (double v : out.values()) EXPECT_EQ(v, 0.5);
}

TEST(Forward, ReluClampsNegatives) {
  const LayerStack net = {make_layer(Matrix::identity(2), Activation::kReLU)};
  EXPECT_EQ(predict(net, Matrix{{-3, 5}}), (Matrix{{0, 5}}));
}

TEST(Forward, RejectsWrongInputWidth) {
  const LayerStack net = {make_layer(Matrix::identity(2), Activation::kReLU)};
  EXPECT_THROW(predict(net, Matrix{{1, 2, 3}}), ShapeError);
}

TEST(Forward, CacheHoldsEveryLayer) {
  Rng rng(3);
  const std::vector<std::size_t> hidden = {4, 3};
  const LayerStack net =
      make_stack(2, hidden, 1, Activation::kReLU, Activation::kSigmoid, rng);
  const ForwardResult fr = forward(net, Matrix{{0.5, -1.0}});
  ASSERT_EQ(fr.cache.pre.size(), 3u);
  ASSERT_EQ(fr.cache.post.size(), 3u);
  EXPECT_EQ(fr.cache.post.back(), fr.output);
  EXPECT_EQ(predict(net, Matrix{{0.5, -1.0}}), fr.output);
}

TEST(Backward, LinearScalarWeightGradientIsInput) {
  const LayerStack net = {make_layer(Matrix{{0.7}}, Activation::kIdentity)};
  const Matrix x{{2.5}};
  const ForwardResult fr = forward(net, x);
  const BackwardResult br = backward(net, fr.cache, Matrix{{1.0}});
  EXPECT_EQ(br.params[0].weights(0, 0), 2.5);
  EXPECT_EQ(br.params[0].bias[0], 1.0);
  EXPECT_EQ(br.input_grad(0, 0), 0.7);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(5);
  const std::vector<std::size_t> hidden = {6};
  const LayerStack net = make_stack(3, hidden, 2, Activation::kReLU, Activation::kIdentity, rng);
  Matrix x(4, 3);
  for (double& v : x.values()) v = rng.normal();
  const ForwardResult fr = forward(net, x);
  const BackwardResult br = backward(net, fr.cache, Matrix(4, 2, 0.0));
  for (const auto& g : br.params) {
    for (double v : g.weights.values()) EXPECT_EQ(v, 0.0);
    for (double v : g.bias) EXPECT_EQ(v, 0.0);
  }
  for (double v : br.input_grad.values()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, TwoLayerReluSigmoidMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const std::vector<std::size_t> hidden = {7};
    LayerStack net = make_stack(4, hidden, 2, Activation::kReLU, Activation::kSigmoid, rng);
    for (auto& l : net) {
      for (double& b : l.bias) b = rng.uniform(-0.5, 0.5);
    }
    Matrix x(5, 4), r(5, 2);
    for (double& v : x.values()) v = rng.normal();
    for (double& v : r.values()) v = rng.normal();
    const auto check = testing::check_gradients(net, x, r);
    EXPECT_LT(check.worst, 1e-4) << "seed " << seed;
    EXPECT_GT(check.checked, 0u);
  }
}

TEST(Grl, FlipsSign) {
  EXPECT_EQ(grl_backward(Matrix{{1, -2}}, 1.0), (Matrix{{-1, 2}}));
}

TEST(Grl, ZeroLambdaGivesZeros) {
  const Matrix g = grl_backward(Matrix{{1.5, -2}, {1e300, 3}}, 0.0);
  for (double v : g.values()) EXPECT_EQ(v, 0.0);
}

TEST(Grl, ScalesByLambda) {
  EXPECT_EQ(grl_backward(Matrix{{3}}, 0.5), (Matrix{{-1.5}}));
}

TEST(Grl, ExactForRepresentableLambda) {
  Rng rng(9);
  Matrix g(3, 4);
  for (double& v : g.values()) v = rng.normal();
  for (double lambda : {0.25, 2.0, 10.0}) {
    const Matrix out = grl_backward(g, lambda);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(out.values()[i], -lambda * g.values()[i]);
  }
  EXPECT_THROW(grl_backward(g, -1.0), DomainError);
}

TEST(MseLoss, ZeroOnExactPrediction) {
  const std::vector<double> p = {1.0, -2.0, 3.5};
  const LossResult r = mse_loss(p, p);
  EXPECT_EQ(r.value, 0.0);
  for (double g : r.grad) EXPECT_EQ(g, 0.0);
}

TEST(MseLoss, HandValues) {
  const std::vector<double> p0 = {0, 0}, t0 = {1, 3};
  EXPECT_DOUBLE_EQ(mse_loss(p0, t0).value, 5.0);
  const std::vector<double> p1 = {2}, t1 = {0};
  const LossResult r = mse_loss(p1, t1);
  EXPECT_DOUBLE_EQ(r.value, 4.0);
  ASSERT_EQ(r.grad.size(), 1u);
  EXPECT_DOUBLE_EQ(r.grad[0], 4.0);
}

TEST(MseLoss, RejectsMismatchedLengths) {
  const std::vector<double> p = {1, 2}, t = {1};
  EXPECT_THROW(mse_loss(p, t), ShapeError);
}

TEST(BceLoss, OneHalfGivesLn2) {
  const std::vector<double> p(6, 0.5);
  const std::vector<int> y = {0, 1, 1, 0, 1, 1};
  EXPECT_NEAR(bce_loss(p, y).value, std::log(2.0), 1e-15);
}

TEST(BceLoss, PerfectPredictionNearZero) {
  const std::vector<double> p = {0.0, 1.0, 1.0};
  const std::vector<int> y = {0, 1, 1};
  const LossResult r = bce_loss(p, y);
  EXPECT_GE(r.value, 0.0);
  EXPECT_LT(r.value, 1e-6);
  for (double g : r.grad) EXPECT_TRUE(std::isfinite(g));
}

TEST(BceLoss, DirectFormula) {
  const std::vector<double> p = {0.9};
  const std::vector<int> y = {0};
  EXPECT_NEAR(bce_loss(p, y).value, 2.302585092994046, 1e-12);
}

TEST(BceLoss, GradientMatchesFiniteDifference) {
  std::vector<double> p = {0.2, 0.7, 0.45, 0.99};
  const std::vector<int> y = {0, 1, 1, 0};
  const LossResult r = bce_loss(p, y);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double h = 1e-6, saved = p[i];
    p[i] = saved + h;
    const double up = bce_loss(p, y).value;
    p[i] = saved - h;
    const double down = bce_loss(p, y).value;
    p[i] = saved;
    EXPECT_LT(testing::relative_error(r.grad[i], (up - down) / (2 * h)), 1e-6);
  }
}

TEST(WassersteinPenalty, GroupMeanGap) {
  const std::vector<double> f = {1, 1, 3, 3};
  const std::vector<int> a = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(wasserstein_penalty(f, a)->value, 2.0);
}

TEST(WassersteinPenalty, EqualMeansGiveZero) {
  const std::vector<double> f = {1, 3, 2, 2};
  const std::vector<int> a = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(wasserstein_penalty(f, a)->value, 0.0);
}

TEST(WassersteinPenalty, SubgradientSignFollowsLargerMean) {
  const std::vector<double> f = {0, 4};
  const std::vector<int> a = {0, 1};
  const auto r = wasserstein_penalty(f, a);
  ASSERT_TRUE(r.has_value());
  EXPECT_DOUBLE_EQ(r->value, 4.0);
  EXPECT_EQ(r->grad, (std::vector<double>{-1.0, 1.0}));

  const std::vector<double> g = {5, 1, 1};
  const std::vector<int> b = {0, 1, 1};
  const auto s = wasserstein_penalty(g, b);
  EXPECT_EQ(s->grad, (std::vector<double>{1.0, -0.5, -0.5}));
}

TEST(WassersteinPenalty, SingleGroupBatchIsSkipped) {
  const std::vector<double> f = {1, 2};
  const std::vector<int> a = {1, 1};
  EXPECT_FALSE(wasserstein_penalty(f, a).has_value());
}

TEST(Optimizer, ZeroGradientIsNoOp) {
  for (OptimizerKind kind : {OptimizerKind::kSgd, OptimizerKind::kAdadelta}) {
    Rng rng(1);
    const std::vector<std::size_t> hidden = {3};
    LayerStack net = make_stack(2, hidden, 1, Activation::kReLU, Activation::kIdentity, rng);
    const LayerStack before = net;
    std::vector<LayerGrads> zero;
    for (const auto& l : net) {
      zero.push_back({Matrix(l.weights.rows(), l.weights.cols(), 0.0), Vector(l.bias.size())});
    }
    OptimizerState st(OptimizerConfig{kind, 1.0, 0.9, 1e-6});
    for (int i = 0; i < 3; ++i) optimizer_step(st, net, zero);
    EXPECT_EQ(net, before) << to_string(kind);
  }
}

TEST(Optimizer, SgdStep) {
  LayerStack net = {make_layer(Matrix{{1.0}}, Activation::kIdentity)};
  OptimizerState st(OptimizerConfig{OptimizerKind::kSgd, 0.1, 0.9, 1e-6});
  const std::vector<LayerGrads> g = {{Matrix{{2.0}}, Vector{0.0}}};
  optimizer_step(st, net, g);
  EXPECT_DOUBLE_EQ(net[0].weights(0, 0), 0.8);
}

TEST(Optimizer, AdadeltaFirstStep) {
  LayerStack net = {make_layer(Matrix{{0.0}}, Activation::kIdentity)};
  OptimizerState st(OptimizerConfig{OptimizerKind::kAdadelta, 1.0, 0.9, 1e-6});
  const std::vector<LayerGrads> g = {{Matrix{{1.0}}, Vector{0.0}}};
  optimizer_step(st, net, g);
  const double expected = -std::sqrt(1e-6 / (0.1 + 1e-6));
  EXPECT_NEAR(net[0].weights(0, 0), expected, 1e-15);
  EXPECT_NEAR(net[0].weights(0, 0), -3.1623e-3, 1e-7);
}

TEST(Optimizer, AdadeltaSecondStepFollowsRecurrence) {
  LayerStack net = {make_layer(Matrix{{0.0}}, Activation::kIdentity)};
  OptimizerState st(OptimizerConfig{OptimizerKind::kAdadelta, 0.5, 0.9, 1e-6});
  const std::vector<LayerGrads> g1 = {{Matrix{{1.0}}, Vector{0.0}}};
  const std::vector<LayerGrads> g2 = {{Matrix{{-2.0}}, Vector{0.0}}};
  optimizer_step(st, net, g1);
  optimizer_step(st, net, g2);
  double eg = 0.1, edx = 0.0, p = 0.0;
  double dx = -std::sqrt(edx + 1e-6) / std::sqrt(eg + 1e-6) * 1.0;
  edx = 0.9 * edx + 0.1 * dx * dx;
  p += 0.5 * dx;
  eg = 0.9 * eg + 0.1 * 4.0;
  dx = -std::sqrt(edx + 1e-6) / std::sqrt(eg + 1e-6) * -2.0;
  p += 0.5 * dx;
  EXPECT_NEAR(net[0].weights(0, 0), p, 1e-15);
}

TEST(ClipWeights, ClampsToBox) {
  LayerStack net = {make_layer(Matrix{{-1.0, 0.001, 1.0}}, Activation::kIdentity)};
  clip_weights(net, 0.005);
  EXPECT_EQ(net[0].weights, (Matrix{{-0.005, 0.001, 0.005}}));
  LayerStack one = {make_layer(Matrix{{0.3}}, Activation::kIdentity)};
  clip_weights(one, 0.2);
  EXPECT_EQ(one[0].weights(0, 0), 0.2);
}

TEST(ClipWeights, InsideBoxUnchangedAndIdempotent) {
  LayerStack net = {make_layer(Matrix{{-0.1, 0.05}}, Activation::kIdentity)};
  net[0].bias = {0.7};
  const LayerStack inside = net;
  clip_weights(net, 1.0);
  EXPECT_EQ(net, inside);
  clip_weights(net, 0.06);
  const LayerStack once = net;
  clip_weights(net, 0.06);
  EXPECT_EQ(net, once);
  EXPECT_LE(max_abs_param(net), 0.06);
  EXPECT_EQ(net[0].bias[0], 0.06);
  EXPECT_THROW(clip_weights(net, 0.0), DomainError);
}

TEST(InitGlorot, DeterministicAndBounded) {
  const Matrix a = init_glorot(20, 50, 42);
  EXPECT_EQ(a, init_glorot(20, 50, 42));
  EXPECT_NE(a, init_glorot(20, 50, 43));
  const double limit = std::sqrt(6.0 / 70.0);
  EXPECT_EQ(a.size(), 1000u);
  for (double v : a.values()) {
    EXPECT_LE(std::abs(v), limit);
  }
}

TEST(MlpModel, ValidateCatchesBrokenChains) {
  Rng rng(2);
  const std::vector<std::size_t> h = {4};
  MlpModel m;
  m.feature_map = make_stack(3, h, 5, Activation::kReLU, Activation::kReLU, rng);
  m.head = make_stack(5, {}, 1, Activation::kReLU, Activation::kIdentity, rng);
  EXPECT_NO_THROW(m.validate());
  m.adversary = make_stack(6, h, 1, Activation::kReLU, Activation::kSigmoid, rng);
  m.adversary_kind = AdversaryKind::kCrossEntropy;
  EXPECT_NO_THROW(m.validate());
  m.adversary_kind = AdversaryKind::kWassersteinCritic;
  EXPECT_ANY_THROW(m.validate());
  m.adversary_kind = AdversaryKind::kCrossEntropy;
  m.head = make_stack(4, {}, 1, Activation::kReLU, Activation::kIdentity, rng);
  EXPECT_THROW(m.validate(), ShapeError);
}

}  // namespace
}  // namespace fairreg
