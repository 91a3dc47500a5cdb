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

#include "fairreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "fairreg/error.hpp"

namespace fairreg {

GroupedPredictions::GroupedPredictions(Vector pred, Vector target, std::vector<int> group)
    : pred_(std::move(pred)), target_(std::move(target)), group_(std::move(group)) {
  if (pred_.size() != target_.size() || pred_.size() != group_.size()) {
    throw ShapeError("grouped predictions: pred/target/group lengths differ");
  }
  for (std::size_t i = 0; i < group_.size(); ++i) {
    if (group_[i] != 0 && group_[i] != 1) {
      throw DomainError("group label at row " + std::to_string(i) + " is " +
                        std::to_string(group_[i]) + ", expected 0 or 1");
    }
  }
}

std::size_t GroupedPredictions::group_size(int a) const {
  return static_cast<std::size_t>(std::count(group_.begin(), group_.end(), a));
}

Vector GroupedPredictions::pred_of(int a) const {
  Vector out;
  for (std::size_t i = 0; i < pred_.size(); ++i) {
    if (group_[i] == a) out.push_back(pred_[i]);
  }
  return out;
}

Vector GroupedPredictions::target_of(int a) const {
  Vector out;
  for (std::size_t i = 0; i < target_.size(); ++i) {
    if (group_[i] == a) out.push_back(target_[i]);
  }
  return out;
}

double group_error(const GroupedPredictions& gp, int a) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gp.size(); ++i) {
    if (gp.group()[i] != a) continue;
    const double d = gp.target()[i] - gp.pred()[i];
    sum += d * d;
    ++n;
  }
  if (n == 0) throw DomainError("group " + std::to_string(a) + " is empty");
  return sum / static_cast<double>(n);
}

double error_gap(const GroupedPredictions& gp) {
  return std::abs(group_error(gp, 0) - group_error(gp, 1));
}

double r2_score(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw ShapeError("r2_score: length mismatch");
  if (target.size() < 2) throw DomainError("r2_score needs at least two samples");
  double mean = 0.0;
  for (double t : target) mean += t;
  mean /= static_cast<double>(target.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    ss_res += (target[i] - pred[i]) * (target[i] - pred[i]);
    ss_tot += (target[i] - mean) * (target[i] - mean);
  }
  if (ss_tot == 0.0) throw DomainError("r2_score: target is constant");
  return 1.0 - ss_res / ss_tot;
}

double binary_accuracy(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw ShapeError("binary_accuracy: length mismatch");
  if (pred.empty()) throw DomainError("binary_accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double label = pred[i] >= 0.5 ? 1.0 : 0.0;
    if (label == target[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double wasserstein1d_exact(std::span<const double> p, std::span<const double> q) {
  if (p.empty() || q.empty()) throw DomainError("wasserstein1d_exact: empty sample");
  Vector a(p.begin(), p.end());
  Vector b(q.begin(), q.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Quantile step i of `a` covers [i*m, (i+1)*m) on the integer grid of
  // length n*m; step j of `b` covers [j*n, (j+1)*n).
  const std::uint64_t n = a.size();
  const std::uint64_t m = b.size();
  std::uint64_t pos = 0;
  std::size_t i = 0, j = 0;
  double acc = 0.0;
  while (i < n && j < m) {
    const std::uint64_t end_a = (i + 1) * m;
    const std::uint64_t end_b = (j + 1) * n;
    const std::uint64_t end = std::min(end_a, end_b);
    acc += std::abs(a[i] - b[j]) * static_cast<double>(end - pos);
    pos = end;
    if (end == end_a) ++i;
    if (end == end_b) ++j;
  }
  return acc / (static_cast<double>(n) * static_cast<double>(m));
}

double tv_histogram(std::span<const double> p, std::span<const double> q, std::size_t bins) {
  if (p.empty() || q.empty()) throw DomainError("tv_histogram: empty sample");
  if (bins == 0) throw DomainError("tv_histogram: bins must be >= 1");

  std::map<double, std::size_t> distinct;
  for (double v : p) distinct.emplace(v, 0);
  for (double v : q) distinct.emplace(v, 0);

  std::vector<double> hp, hq;
  if (distinct.size() <= bins) {
    std::size_t k = 0;
    for (auto& [value, index] : distinct) index = k++;
    hp.assign(distinct.size(), 0.0);
    hq.assign(distinct.size(), 0.0);
    for (double v : p) hp[distinct[v]] += 1.0;
    for (double v : q) hq[distinct[v]] += 1.0;
  } else {
    const double lo = distinct.begin()->first;
    const double hi = distinct.rbegin()->first;
    const double width = (hi - lo) / static_cast<double>(bins);
    auto bin_of = [&](double v) {
      auto k = static_cast<std::size_t>((v - lo) / width);
      return std::min(k, bins - 1);
    };
    hp.assign(bins, 0.0);
    hq.assign(bins, 0.0);
    for (double v : p) hp[bin_of(v)] += 1.0;
    for (double v : q) hq[bin_of(v)] += 1.0;
  }
  const double np = static_cast<double>(p.size());
  const double nq = static_cast<double>(q.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < hp.size(); ++k) sum += std::abs(hp[k] / np - hq[k] / nq);
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

bool is_binary(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

MetricsReport compute_metrics(const GroupedPredictions& gp, std::size_t tv_bins) {
  MetricsReport r;
  r.err0 = group_error(gp, 0);
  r.err1 = group_error(gp, 1);
  r.err_gap = std::abs(r.err0 - r.err1);
  r.r2 = r2_score(gp.pred(), gp.target());
  if (is_binary(gp.target())) r.accuracy = binary_accuracy(gp.pred(), gp.target());
  const Vector y0 = gp.target_of(0), y1 = gp.target_of(1);
  r.w1_labels = wasserstein1d_exact(y0, y1);
  r.w1_preds = wasserstein1d_exact(gp.pred_of(0), gp.pred_of(1));
  r.tv_labels = tv_histogram(y0, y1, tv_bins);
  return r;
}

}  // namespace fairreg
