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

// Independent reference computations used by the tests. None of these
// share code with the library paths they check.

#ifndef FAIRREG_TESTS_ORACLES_HPP_
#define FAIRREG_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fairreg/bounds.hpp"
#include "fairreg/nn.hpp"

namespace fairreg::testing {

// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
// potentials form). Returns the optimal total cost.
inline double min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cost[p[j] - 1][j - 1];
  return total;
}

// W1 between two empirical measures as an optimal transport problem:
// every atom of p is split into |q| equal pieces and every atom of q into
// |p| pieces, giving two uniform measures on n*m points, whose optimal
// coupling is a permutation.
inline double w1_by_assignment(const std::vector<double>& p, const std::vector<double>& q) {
  const std::size_t n = p.size(), m = q.size();
  std::vector<double> left, right;
  for (double x : p) left.insert(left.end(), m, x);
  for (double y : q) right.insert(right.end(), n, y);
  std::vector<std::vector<double>> cost(n * m, std::vector<double>(n * m));
  for (std::size_t i = 0; i < n * m; ++i) {
    for (std::size_t j = 0; j < n * m; ++j) cost[i][j] = std::abs(left[i] - right[j]);
  }
  return min_cost_assignment(cost) / static_cast<double>(n * m);
}

// I(A; Z | Y) as the expected KL divergence between p(a | z, y) and
// p(a | y), summed cell by cell.
inline double cmi_by_kl(const DiscreteJoint& j) {
  double total = 0.0;
  for (std::size_t y = 0; y < j.ny(); ++y) {
    double py = 0.0;
    std::vector<double> pay(j.na(), 0.0);
    for (std::size_t a = 0; a < j.na(); ++a) {
      for (std::size_t z = 0; z < j.nz(); ++z) {
        pay[a] += j.p(a, z, y);
        py += j.p(a, z, y);
      }
    }
    if (py <= 0.0) continue;
    for (std::size_t z = 0; z < j.nz(); ++z) {
      double pzy = 0.0;
      for (std::size_t a = 0; a < j.na(); ++a) pzy += j.p(a, z, y);
      if (pzy <= 0.0) continue;
      for (std::size_t a = 0; a < j.na(); ++a) {
        const double pazy = j.p(a, z, y);
        if (pazy <= 0.0) continue;
        total += pazy * std::log((pazy / pzy) / (pay[a] / py));
      }
    }
  }
  return total;
}

// Scalar probe loss sum_ij R_ij * out_ij; its output gradient is R.
inline double probe_loss(std::span<const Layer> layers, const Matrix& x, const Matrix& r) {
  const Matrix out = predict(layers, x);
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out.values()[i] * r.values()[i];
  return s;
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

struct GradCheck {
  std::size_t checked = 0;
  double worst = 0.0;
};

// Compares backward() with central differences of probe_loss for every
// weight, bias and input entry.
inline GradCheck check_gradients(LayerStack layers, const Matrix& x, const Matrix& r,
                                 double step = 1e-5) {
  const ForwardResult fr = forward(layers, x);
  const BackwardResult br = backward(layers, fr.cache, r);
  GradCheck out;
  auto probe = [&](double& slot, double analytic) {
    const double saved = slot;
    slot = saved + step;
    const double up = probe_loss(layers, x, r);
    slot = saved - step;
    const double down = probe_loss(layers, x, r);
    slot = saved;
    const double numeric = (up - down) / (2.0 * step);
    out.worst = std::max(out.worst, relative_error(analytic, numeric));
    ++out.checked;
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto w = layers[l].weights.values();
    for (std::size_t k = 0; k < w.size(); ++k) probe(w[k], br.params[l].weights.values()[k]);
    for (std::size_t k = 0; k < layers[l].bias.size(); ++k) {
      probe(layers[l].bias[k], br.params[l].bias[k]);
    }
  }
  Matrix xin = x;
  for (std::size_t k = 0; k < xin.size(); ++k) {
    double& slot = xin.values()[k];
    const double saved = slot;
    slot = saved + step;
    const double up = probe_loss(layers, xin, r);
    slot = saved - step;
    const double down = probe_loss(layers, xin, r);
    slot = saved;
    out.worst = std::max(out.worst, relative_error(br.input_grad.values()[k],
                                                   (up - down) / (2.0 * step)));
    ++out.checked;
  }
  return out;
}

}  // namespace fairreg::testing

#endif  // FAIRREG_TESTS_ORACLES_HPP_
