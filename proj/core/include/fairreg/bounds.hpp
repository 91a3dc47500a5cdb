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

// Accuracy-disparity bounds for regression.
//
// For a predictor h with prediction Yhat and groups A in {0, 1}:
//
//   Err0 + Err1 >= 1/2 * [(W1(Y|A=0, Y|A=1) - W1(Yhat|A=0, Yhat|A=1))_+]^2
//
//   |Err0 - Err1| <= 8 M^2 TV(Y|A=0, Y|A=1)
//                    + 3 M min_a E_{D_a}[ |E[Yhat|Y=y,A=0] - E[Yhat|Y=y,A=1]| ]
//
// where M bounds |Y| and |Yhat|. The two bounds carve out the feasible
// region of (Err0, Err1) pairs returned by feasible_region().

#ifndef FAIRREG_BOUNDS_HPP_
#define FAIRREG_BOUNDS_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "fairreg/matrix.hpp"
#include "fairreg/metrics.hpp"

namespace fairreg {

struct BoundContext {
  double m_bound = 0.0;  // max(|y|, |yhat|) over the evaluated sample
  double alpha = 0.0;    // share of group 0
  double w1_labels = 0.0;
  double w1_preds = 0.0;
  double tv_labels = 0.0;
  double cond_discrepancy = 0.0;
};

inline constexpr std::size_t kDefaultYBins = 10;

double lower_bound_joint(double w1_labels, double w1_preds);

// Lower bound on the pooled error: min(alpha, 1 - alpha) * lower_bound_joint.
double lower_bound_weighted(double alpha, double w1_labels, double w1_preds);

double upper_bound_gap(const BoundContext& ctx);

// Estimate of min_a E_{D_a} |E[Yhat | y, A=0] - E[Yhat | y, A=1]|.
// Y is split into pooled quantile bins (one bin per value when Y has at
// most y_bins distinct values). Bins holding only one group are dropped
// and the remaining weights renormalized; if no bin holds both groups the
// estimate is undefined and a DomainError is thrown.
double conditional_discrepancy(const GroupedPredictions& gp, std::size_t y_bins = kDefaultYBins);

// True iff the first two label moments agree across groups within tol.
// Under that premise a constant predictor has equal group errors.
bool constant_predictor_check(std::span<const double> y, std::span<const int> a, double tol);

// Joint pmf p(a, z, y) over finite supports, a-major layout.
class DiscreteJoint {
 public:
  // Throws DomainError unless probs has na*nz*ny non-negative finite
  // entries summing to 1 within 1e-12.
  DiscreteJoint(std::size_t na, std::size_t nz, std::size_t ny, std::vector<double> probs);

  // Empirical pmf from integer-coded samples.
  static DiscreteJoint from_samples(std::span<const int> a, std::span<const int> z,
                                    std::span<const int> y, std::size_t na, std::size_t nz,
                                    std::size_t ny);

  std::size_t na() const { return na_; }
  std::size_t nz() const { return nz_; }
  std::size_t ny() const { return ny_; }
  double p(std::size_t a, std::size_t z, std::size_t y) const {
    return probs_[(a * nz_ + z) * ny_ + y];
  }

 private:
  std::size_t na_, nz_, ny_;
  std::vector<double> probs_;
};

// H(A | Z, Y) in nats.
double conditional_entropy(const DiscreteJoint& joint);
// H(A | Y) in nats.
double conditional_entropy_given_y(const DiscreteJoint& joint);
// I(A; Z | Y) = H(A | Y) - H(A | Z, Y).
double conditional_mutual_information(const DiscreteJoint& joint);

struct Point {
  double e0 = 0.0;
  double e1 = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct FeasibleRegion {
  double a_gap = 0.0;
  double b_joint = 0.0;
  double err_cap = 0.0;
  std::vector<Point> vertices;  // counter-clockwise

  // ((b+a)/2, (b-a)/2) and ((b-a)/2, (b+a)/2): where the lower-bound line
  // meets the two gap lines. Only vertices of the region when a <= b.
  std::array<Point, 2> bottom_vertices() const;
};

// {(e0, e1) : |e0 - e1| <= a_gap, e0 + e1 >= b_joint, 0 <= e0, e1 <= err_cap}.
// Requires a_gap, b_joint >= 0 and err_cap > max(a_gap, b_joint).
FeasibleRegion feasible_region(double a_gap, double b_joint, double err_cap);

}  // namespace fairreg

#endif  // FAIRREG_BOUNDS_HPP_
