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

// Training loops for the plain regressor and the two adversarial
// debiasing variants, evaluation against the disparity bounds, and the
// lambda sweep harness.
//
// All three algorithms share one step: g maps X to Z, the head h regresses
// y from Z under MSE. CENet adds a sigmoid adversary f([Z | y]) trained
// with BCE to predict the group; WassersteinNet adds a weight-clipped
// critic maximizing the group-mean gap of f([Z | y]). The adversary loss
// reaches g through a gradient reversal layer scaled by lambda, and all
// parameters move once per minibatch (simultaneous descent-ascent).

#ifndef FAIRREG_TRAIN_HPP_
#define FAIRREG_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairreg/bounds.hpp"
#include "fairreg/data.hpp"
#include "fairreg/metrics.hpp"
#include "fairreg/nn.hpp"

namespace fairreg {

enum class Algorithm { kPlain, kCENet, kWassersteinNet };

std::string_view to_string(Algorithm a);
// Accepts "plain", "cenet", "wasserstein" (case-insensitive).
Algorithm parse_algorithm(std::string_view name);

struct Architecture {
  std::vector<std::size_t> feature_hidden = {60};  // widths of g; last is |Z|
  std::vector<std::size_t> head_hidden;            // hidden widths of h
  Activation head_output = Activation::kSigmoid;
  std::vector<std::size_t> adversary_hidden = {60};
};

struct RunConfig {
  Algorithm algorithm = Algorithm::kPlain;
  double lambda = 0.0;
  std::size_t epochs = 50;
  std::size_t batch_size = 512;
  OptimizerConfig optimizer;
  Architecture architecture;
  double clip_c = 0.005;  // critic weight clipping
  std::uint64_t seed = 0;
  std::size_t y_bins = kDefaultYBins;
  std::size_t tv_bins = kDefaultTvBins;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  double err_gap = 0.0;         // on the test split
  double adversary_loss = 0.0;  // full-train BCE or critic gap; 0 for Plain
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochLog> log;
  // Train-split range used to scale y into [0, 1] for the adversary.
  double y_min = 0.0;
  double y_max = 1.0;
};

// Called after every parameter update with (epoch, step within epoch).
using StepObserver = std::function<void(std::size_t, std::size_t, const MlpModel&)>;

// Initializes g, h (and f) from the run seed. Initialization of g and h
// does not depend on the algorithm.
MlpModel init_model(const RunConfig& config, std::size_t input_width);

// Dispatches on config.algorithm.
TrainResult train(const RunConfig& config, const Dataset& train_set, const Dataset& test_set,
                  const StepObserver& observer = {});

TrainResult train_plain(const RunConfig& config, const Dataset& train_set,
                        const Dataset& test_set, const StepObserver& observer = {});
TrainResult train_cenet(const RunConfig& config, const Dataset& train_set,
                        const Dataset& test_set, const StepObserver& observer = {});
TrainResult train_wasserstein(const RunConfig& config, const Dataset& train_set,
                              const Dataset& test_set, const StepObserver& observer = {});

Vector predict(const MlpModel& model, const Matrix& x);

// Adversary loss of a trained model on a dataset: BCE for CENet, critic
// group-mean gap for WassersteinNet, 0 without adversary.
double adversary_loss(const MlpModel& model, const Dataset& data, double y_min, double y_max);

struct Evaluation {
  MetricsReport metrics;
  BoundContext context;
  double lower_bound = 0.0;           // on err0 + err1
  double lower_bound_weighted = 0.0;  // on the pooled error
  double upper_bound = 0.0;           // on err_gap
};

// Metrics plus both bounds for fixed predictions. Verifies the joint-error
// lower bound and W1(y_a, yhat_a) <= sqrt(err_a) for both groups, throwing
// std::logic_error if either is violated beyond rounding.
Evaluation evaluate_predictions(const GroupedPredictions& gp, std::size_t y_bins = kDefaultYBins,
                                std::size_t tv_bins = kDefaultTvBins);

Evaluation evaluate(const MlpModel& model, const Dataset& data, std::size_t y_bins = kDefaultYBins,
                    std::size_t tv_bins = kDefaultTvBins);

// Vertices for plotting: gap width = upper bound, joint level = lower bound.
FeasibleRegion feasible_region_for(const Evaluation& e);

struct SweepRow {
  Algorithm algorithm = Algorithm::kPlain;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::optional<Evaluation> result;
  std::string error;  // set when the cell failed

  bool ok() const { return result.has_value(); }
};

struct SweepAggregate {
  Algorithm algorithm = Algorithm::kPlain;
  double lambda = 0.0;
  std::size_t n_ok = 0;
  double r2_mean = 0.0, r2_std = 0.0;
  double err0_mean = 0.0, err0_std = 0.0;
  double err1_mean = 0.0, err1_std = 0.0;
  double err_gap_mean = 0.0, err_gap_std = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;  // lambda-major, seeds in the given order
  std::vector<SweepAggregate> aggregates;
};

// Trains and evaluates every (lambda, seed) cell, on up to `jobs` threads.
// A failing cell is recorded with its error; the sweep continues.
SweepTable lambda_sweep(const RunConfig& base, std::span<const double> lambdas,
                        std::span<const std::uint64_t> seeds, const Dataset& train_set,
                        const Dataset& test_set, std::size_t jobs = 1);

// Mean and sample standard deviation over the successful rows of one lambda.
std::vector<SweepAggregate> aggregate_sweep(std::span<const SweepRow> rows);

void write_epoch_log_csv(std::ostream& out, std::span<const EpochLog> log);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_sweep_aggregate_csv(std::ostream& out, std::span<const SweepAggregate> aggregates);

}  // namespace fairreg

#endif  // FAIRREG_TRAIN_HPP_
