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

#include "fairreg/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "fairreg/error.hpp"

namespace fairreg {

double lower_bound_joint(double w1_labels, double w1_preds) {
  const double d = std::max(w1_labels - w1_preds, 0.0);
  return 0.5 * d * d;
}

double lower_bound_weighted(double alpha, double w1_labels, double w1_preds) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
  return std::min(alpha, 1.0 - alpha) * lower_bound_joint(w1_labels, w1_preds);
}

double upper_bound_gap(const BoundContext& ctx) {
  return 8.0 * ctx.m_bound * ctx.m_bound * ctx.tv_labels + 3.0 * ctx.m_bound * ctx.cond_discrepancy;
}

namespace {

// Bin index per sample: per distinct value when there are few, else pooled
// quantile cut points.
std::vector<std::size_t> assign_y_bins(std::span<const double> y, std::size_t y_bins) {
  std::set<double> distinct(y.begin(), y.end());
  std::vector<double> cuts;
  if (distinct.size() <= y_bins) {
    // cuts between consecutive distinct values: bin = rank of the value
    cuts.assign(std::next(distinct.begin()), distinct.end());
  } else {
    std::vector<double> sorted(y.begin(), y.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 1; k < y_bins; ++k) {
      cuts.push_back(sorted[k * sorted.size() / y_bins]);
    }
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  }
  std::vector<std::size_t> bin(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    bin[i] = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), y[i]) -
                                      cuts.begin());
  }
  return bin;
}

}  // namespace

double conditional_discrepancy(const GroupedPredictions& gp, std::size_t y_bins) {
  if (y_bins == 0) throw DomainError("y_bins must be >= 1");
  if (gp.group_size(0) == 0 || gp.group_size(1) == 0) {
    throw DomainError("conditional_discrepancy needs both groups");
  }
  const std::vector<std::size_t> bin = assign_y_bins(gp.target(), y_bins);
  const std::size_t nbins = *std::max_element(bin.begin(), bin.end()) + 1;

  std::vector<double> sum0(nbins, 0.0), sum1(nbins, 0.0);
  std::vector<std::size_t> n0(nbins, 0), n1(nbins, 0);
  for (std::size_t i = 0; i < gp.size(); ++i) {
    if (gp.group()[i] == 0) {
      sum0[bin[i]] += gp.pred()[i];
      ++n0[bin[i]];
    } else {
      sum1[bin[i]] += gp.pred()[i];
      ++n1[bin[i]];
    }
  }

  double weighted0 = 0.0, weighted1 = 0.0;
  double mass0 = 0.0, mass1 = 0.0;
  for (std::size_t b = 0; b < nbins; ++b) {
    if (n0[b] == 0 || n1[b] == 0) continue;
    const double diff = std::abs(sum0[b] / static_cast<double>(n0[b]) -
                                 sum1[b] / static_cast<double>(n1[b]));
    weighted0 += static_cast<double>(n0[b]) * diff;
    weighted1 += static_cast<double>(n1[b]) * diff;
    mass0 += static_cast<double>(n0[b]);
    mass1 += static_cast<double>(n1[b]);
  }
  if (mass0 == 0.0) throw DomainError("no label bin contains both groups");
  return std::min(weighted0 / mass0, weighted1 / mass1);
}

bool constant_predictor_check(std::span<const double> y, std::span<const int> a, double tol) {
  if (y.size() != a.size()) throw ShapeError("constant_predictor_check: length mismatch");
  double s1[2] = {0.0, 0.0}, s2[2] = {0.0, 0.0};
  std::size_t n[2] = {0, 0};
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (a[i] != 0 && a[i] != 1) throw DomainError("group label must be 0 or 1");
    s1[a[i]] += y[i];
    s2[a[i]] += y[i] * y[i];
    ++n[a[i]];
  }
  if (n[0] == 0 || n[1] == 0) throw DomainError("constant_predictor_check needs both groups");
  const double m0 = s1[0] / static_cast<double>(n[0]), m1 = s1[1] / static_cast<double>(n[1]);
  const double q0 = s2[0] / static_cast<double>(n[0]), q1 = s2[1] / static_cast<double>(n[1]);
  return std::abs(m0 - m1) <= tol && std::abs(q0 - q1) <= tol;
}

DiscreteJoint::DiscreteJoint(std::size_t na, std::size_t nz, std::size_t ny,
                             std::vector<double> probs)
    : na_(na), nz_(nz), ny_(ny), probs_(std::move(probs)) {
  if (na_ == 0 || nz_ == 0 || ny_ == 0) throw DomainError("joint table needs non-empty supports");
  if (probs_.size() != na_ * nz_ * ny_) throw DomainError("joint table has wrong size");
  double total = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) throw DomainError("joint table has invalid probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("joint table sums to " + std::to_string(total) + ", expected 1");
  }
}

DiscreteJoint DiscreteJoint::from_samples(std::span<const int> a, std::span<const int> z,
                                          std::span<const int> y, std::size_t na,
                                          std::size_t nz, std::size_t ny) {
  if (a.size() != z.size() || a.size() != y.size()) throw ShapeError("sample lengths differ");
  if (a.empty()) throw DomainError("no samples");
  std::vector<double> counts(na * nz * ny, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || z[i] < 0 || y[i] < 0 || static_cast<std::size_t>(a[i]) >= na ||
        static_cast<std::size_t>(z[i]) >= nz || static_cast<std::size_t>(y[i]) >= ny) {
      throw DomainError("sample " + std::to_string(i) + " outside the table support");
    }
    counts[(static_cast<std::size_t>(a[i]) * nz + static_cast<std::size_t>(z[i])) * ny +
           static_cast<std::size_t>(y[i])] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  for (double& c : counts) c /= n;
  // Renormalize away the rounding of the divisions.
  double total = 0.0;
  for (double c : counts) total += c;
  for (double& c : counts) c /= total;
  return DiscreteJoint(na, nz, ny, std::move(counts));
}

double conditional_entropy(const DiscreteJoint& j) {
  double h = 0.0;
  for (std::size_t z = 0; z < j.nz(); ++z) {
    for (std::size_t y = 0; y < j.ny(); ++y) {
      double pzy = 0.0;
      for (std::size_t a = 0; a < j.na(); ++a) pzy += j.p(a, z, y);
      if (pzy <= 0.0) continue;
      for (std::size_t a = 0; a < j.na(); ++a) {
        const double p = j.p(a, z, y);
        if (p > 0.0) h -= p * std::log(p / pzy);
      }
    }
  }
  return h;
}

double conditional_entropy_given_y(const DiscreteJoint& j) {
  double h = 0.0;
  for (std::size_t y = 0; y < j.ny(); ++y) {
    double py = 0.0;
    std::vector<double> pay(j.na(), 0.0);
    for (std::size_t a = 0; a < j.na(); ++a) {
      for (std::size_t z = 0; z < j.nz(); ++z) pay[a] += j.p(a, z, y);
      py += pay[a];
    }
    if (py <= 0.0) continue;
    for (double p : pay) {
      if (p > 0.0) h -= p * std::log(p / py);
    }
  }
  return h;
}

double conditional_mutual_information(const DiscreteJoint& j) {
  return conditional_entropy_given_y(j) - conditional_entropy(j);
}

std::array<Point, 2> FeasibleRegion::bottom_vertices() const {
  return {Point{(b_joint + a_gap) / 2.0, (b_joint - a_gap) / 2.0},
          Point{(b_joint - a_gap) / 2.0, (b_joint + a_gap) / 2.0}};
}

namespace {

// Half-plane n0*e0 + n1*e1 <= c.
struct HalfPlane {
  double n0, n1, c;
  double slack(const Point& p) const { return c - (n0 * p.e0 + n1 * p.e1); }
};

std::vector<Point> clip(const std::vector<Point>& poly, const HalfPlane& h) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& cur = poly[i];
    const Point& nxt = poly[(i + 1) % poly.size()];
    const double sc = h.slack(cur);
    const double sn = h.slack(nxt);
    if (sc >= 0.0) out.push_back(cur);
    if ((sc >= 0.0) != (sn >= 0.0)) {
      const double t = sc / (sc - sn);
      out.push_back({cur.e0 + t * (nxt.e0 - cur.e0), cur.e1 + t * (nxt.e1 - cur.e1)});
    }
  }
  return out;
}

}  // namespace

FeasibleRegion feasible_region(double a_gap, double b_joint, double err_cap) {
  if (!(a_gap >= 0.0) || !(b_joint >= 0.0)) throw DomainError("bounds must be non-negative");
  if (!(err_cap > std::max(a_gap, b_joint))) {
    throw DomainError("err_cap must exceed both the gap bound and the joint bound");
  }
  std::vector<Point> poly = {{0.0, 0.0}, {err_cap, 0.0}, {err_cap, err_cap}, {0.0, err_cap}};
  poly = clip(poly, {1.0, -1.0, a_gap});
  poly = clip(poly, {-1.0, 1.0, a_gap});
  poly = clip(poly, {-1.0, -1.0, -b_joint});

  // Degenerate clips (a_gap = 0, b_joint = 0) leave repeated vertices.
  const double tol = 1e-12 * std::max(1.0, err_cap);
  std::vector<Point> unique;
  for (const Point& p : poly) {
    if (unique.empty() || std::abs(unique.back().e0 - p.e0) > tol ||
        std::abs(unique.back().e1 - p.e1) > tol) {
      unique.push_back(p);
    }
  }
  while (unique.size() > 1 && std::abs(unique.front().e0 - unique.back().e0) <= tol &&
         std::abs(unique.front().e1 - unique.back().e1) <= tol) {
    unique.pop_back();
  }
  if (unique.empty()) throw DomainError("feasible region is empty");

  // Start at the lowest vertex (then leftmost) for a stable ordering.
  auto first = std::min_element(unique.begin(), unique.end(), [](const Point& l, const Point& r) {
    return l.e1 != r.e1 ? l.e1 < r.e1 : l.e0 < r.e0;
  });
  std::rotate(unique.begin(), first, unique.end());

  FeasibleRegion region;
  region.a_gap = a_gap;
  region.b_joint = b_joint;
  region.err_cap = err_cap;
  region.vertices = std::move(unique);
  return region;
}

}  // namespace fairreg
