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

#ifndef FAIRREG_METRICS_HPP_
#define FAIRREG_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fairreg/matrix.hpp"

namespace fairreg {

// Predictions, targets and binary group labels of one evaluation set.
// Construction checks equal lengths and group values in {0, 1}.
class GroupedPredictions {
 public:
  GroupedPredictions(Vector pred, Vector target, std::vector<int> group);

  const Vector& pred() const { return pred_; }
  const Vector& target() const { return target_; }
  const std::vector<int>& group() const { return group_; }
  std::size_t size() const { return pred_.size(); }
  std::size_t group_size(int a) const;

  // Values of pred / target restricted to group a.
  Vector pred_of(int a) const;
  Vector target_of(int a) const;

 private:
  Vector pred_;
  Vector target_;
  std::vector<int> group_;
};

struct MetricsReport {
  double err0 = 0.0;
  double err1 = 0.0;
  double err_gap = 0.0;
  double r2 = 0.0;
  std::optional<double> accuracy;  // set when the target is binary
  double w1_labels = 0.0;          // W1(y | A=0, y | A=1)
  double w1_preds = 0.0;           // W1(yhat | A=0, yhat | A=1)
  double tv_labels = 0.0;
};

inline constexpr std::size_t kDefaultTvBins = 50;

// Mean squared error over samples of group a. Empty group is a DomainError.
double group_error(const GroupedPredictions& gp, int a);

// |Err0 - Err1|.
double error_gap(const GroupedPredictions& gp);

// 1 - SS_res / SS_tot. Needs n >= 2 and non-constant target.
double r2_score(std::span<const double> pred, std::span<const double> target);

// Fraction of samples with (pred >= 0.5) == target.
double binary_accuracy(std::span<const double> pred, std::span<const double> target);

// Exact W1 between two empirical distributions with L1 ground cost, as the
// integral of |F_p^-1(u) - F_q^-1(u)| over u in [0, 1].
double wasserstein1d_exact(std::span<const double> p, std::span<const double> q);

// Histogram estimate of the total variation distance. Inputs with at most
// `bins` distinct pooled values are binned per value (exact); otherwise
// equal-width bins over the pooled range are used.
double tv_histogram(std::span<const double> p, std::span<const double> q,
                    std::size_t bins = kDefaultTvBins);

// True when every target is exactly 0 or 1.
bool is_binary(std::span<const double> values);

// All report fields for one evaluation set.
MetricsReport compute_metrics(const GroupedPredictions& gp, std::size_t tv_bins = kDefaultTvBins);

}  // namespace fairreg

#endif  // FAIRREG_METRICS_HPP_
