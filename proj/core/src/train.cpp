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

#include "fairreg/train.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "fairreg/error.hpp"
#include "fairreg/format.hpp"
#include "fairreg/rng.hpp"

namespace fairreg {

namespace {

// Independent RNG streams per run; g/h initialization and batch order must
// not depend on whether an adversary exists.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kAdversaryStream = 2;
constexpr std::uint64_t kBatchStream = 3;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Matrix adversary_input(const Matrix& z, std::span<const double> y, double y_min, double y_max) {
  const double range = y_max - y_min;
  Matrix col(y.size(), 1);
  for (std::size_t i = 0; i < y.size(); ++i) col(i, 0) = range > 0.0 ? (y[i] - y_min) / range : 0.0;
  return z.hconcat(col);
}

void require_both_groups(const Dataset& d, const char* which) {
  for (int g : {0, 1}) {
    if (d.group_count(g) == 0) {
      throw DomainError(std::string(which) + " split has no rows of group " + std::to_string(g));
    }
  }
}

void check_finite(double v, const char* what, std::size_t epoch, std::size_t step) {
  if (!std::isfinite(v)) {
    throw TrainingError(std::string(what) + " became non-finite at epoch " +
                        std::to_string(epoch) + ", step " + std::to_string(step));
  }
}

double mse_of(const MlpModel& model, const Dataset& d) {
  const Vector pred = predict(model, d.x);
  return mse_loss(pred, d.y).value;
}

TrainResult run_training(const RunConfig& config, const Dataset& train_set,
                         const Dataset& test_set, const StepObserver& observer) {
  config.validate();
  train_set.validate();
  test_set.validate();
  if (train_set.size() == 0) throw DomainError("empty training set");
  if (train_set.x.cols() != test_set.x.cols()) {
    throw ShapeError("train and test feature widths differ");
  }
  require_both_groups(train_set, "train");
  require_both_groups(test_set, "test");

  TrainResult result;
  result.model = init_model(config, train_set.x.cols());
  MlpModel& model = result.model;
  const auto [ymin_it, ymax_it] = std::minmax_element(train_set.y.begin(), train_set.y.end());
  result.y_min = *ymin_it;
  result.y_max = *ymax_it;

  OptimizerState opt_g(config.optimizer), opt_h(config.optimizer), opt_f(config.optimizer);
  Rng batch_rng = Rng::stream(config.seed, kBatchStream);
  const std::size_t n = train_set.size();
  const std::size_t z_width = model.feature_width();
  std::vector<std::size_t> order(n);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    batch_rng.shuffle(std::span<std::size_t>(order));

    std::size_t step = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size, ++step) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix xb = train_set.x.select_rows(idx);
      Vector yb(idx.size());
      std::vector<int> ab(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        yb[i] = train_set.y[idx[i]];
        ab[i] = train_set.a[idx[i]];
      }

      ForwardResult fg = forward(model.feature_map, xb);
      ForwardResult fh = forward(model.head, fg.output);
      LossResult mse = mse_loss(fh.output.values(), yb);
      check_finite(mse.value, "regression loss", epoch, step);
      BackwardResult bh = backward(model.head, fh.cache, Matrix::column(mse.grad));
      Matrix dz = std::move(bh.input_grad);

      std::optional<BackwardResult> bf;
      if (model.adversary_kind != AdversaryKind::kNone) {
        ForwardResult ff = forward(model.adversary,
                                   adversary_input(fg.output, yb, result.y_min, result.y_max));
        // Loss minimized by f. The critic maximizes the gap, so it descends
        // on its negation.
        std::optional<LossResult> adv;
        if (model.adversary_kind == AdversaryKind::kCrossEntropy) {
          adv = bce_loss(ff.output.values(), ab);
        } else if (auto pen = wasserstein_penalty(ff.output.values(), ab)) {
          for (double& g : pen->grad) g = -g;
          pen->value = -pen->value;
          adv = std::move(pen);
        }
        if (adv) {
          check_finite(adv->value, "adversary loss", epoch, step);
          bf = backward(model.adversary, ff.cache, Matrix::column(adv->grad));
          const Matrix reversed = grl_backward(bf->input_grad.col_block(0, z_width), config.lambda);
          auto dzv = dz.values();
          auto rv = reversed.values();
          for (std::size_t i = 0; i < dzv.size(); ++i) dzv[i] += rv[i];
        }
      }
      BackwardResult bg = backward(model.feature_map, fg.cache, dz);

      optimizer_step(opt_g, model.feature_map, bg.params);
      optimizer_step(opt_h, model.head, bh.params);
      if (bf) {
        optimizer_step(opt_f, model.adversary, bf->params);
        if (model.adversary_kind == AdversaryKind::kWassersteinCritic) {
          clip_weights(model.adversary, config.clip_c);
        }
      }
      if (observer) observer(epoch, step, model);
    }

    EpochLog row;
    row.epoch = epoch;
    row.train_mse = mse_of(model, train_set);
    const Vector test_pred = predict(model, test_set.x);
    row.test_mse = mse_loss(test_pred, test_set.y).value;
    row.err_gap = error_gap(GroupedPredictions(test_pred, test_set.y, test_set.a));
    row.adversary_loss = adversary_loss(model, train_set, result.y_min, result.y_max);
    for (double v : {row.train_mse, row.test_mse, row.err_gap, row.adversary_loss}) {
      check_finite(v, "epoch metric", epoch, step);
    }
    result.log.push_back(row);
  }
  return result;
}

void require_algorithm(const RunConfig& config, Algorithm want) {
  if (config.algorithm != want) {
    throw ConfigError("run config selects algorithm '" + std::string(to_string(config.algorithm)) +
                      "', expected '" + std::string(to_string(want)) + "'");
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kPlain:
      return "plain";
    case Algorithm::kCENet:
      return "cenet";
    case Algorithm::kWassersteinNet:
      return "wasserstein";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "plain" || lower == "nodebias") return Algorithm::kPlain;
  if (lower == "cenet") return Algorithm::kCENet;
  if (lower == "wasserstein" || lower == "wassersteinnet") return Algorithm::kWassersteinNet;
  throw ConfigError("unknown algorithm '" + std::string(name) +
                    "' (expected plain, cenet or wasserstein)");
}

void RunConfig::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw ConfigError("run.lambda must be >= 0");
  if (batch_size == 0) throw ConfigError("run.batch_size must be positive");
  if (architecture.feature_hidden.empty()) {
    throw ConfigError("run.architecture.feature_hidden needs at least one layer");
  }
  auto positive = [](const std::vector<std::size_t>& widths, const char* field) {
    for (std::size_t w : widths) {
      if (w == 0) throw ConfigError(std::string(field) + " widths must be positive");
    }
  };
  positive(architecture.feature_hidden, "run.architecture.feature_hidden");
  positive(architecture.head_hidden, "run.architecture.head_hidden");
  positive(architecture.adversary_hidden, "run.architecture.adversary_hidden");
  if (architecture.head_output == Activation::kReLU) {
    throw ConfigError("run.architecture.head_output must be sigmoid or identity");
  }
  if (algorithm == Algorithm::kWassersteinNet && !(clip_c > 0.0 && std::isfinite(clip_c))) {
    throw ConfigError("run.clip must be positive");
  }
  if (y_bins == 0) throw ConfigError("run.y_bins must be positive");
  if (tv_bins == 0) throw ConfigError("run.tv_bins must be positive");
  try {
    optimizer.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("run.optimizer: ") + e.what());
  }
}

MlpModel init_model(const RunConfig& config, std::size_t input_width) {
  if (input_width == 0) throw ShapeError("model input width must be positive");
  const Architecture& arch = config.architecture;
  Rng init = Rng::stream(config.seed, kInitStream);
  MlpModel m;
  const std::span<const std::size_t> g_hidden(arch.feature_hidden.data(),
                                              arch.feature_hidden.size() - 1);
  m.feature_map = make_stack(input_width, g_hidden, arch.feature_hidden.back(), Activation::kReLU,
                             Activation::kReLU, init);
  m.head = make_stack(m.feature_width(), arch.head_hidden, 1, Activation::kReLU, arch.head_output,
                      init);
  if (config.algorithm != Algorithm::kPlain) {
    Rng adv = Rng::stream(config.seed, kAdversaryStream);
    const bool ce = config.algorithm == Algorithm::kCENet;
    m.adversary_kind = ce ? AdversaryKind::kCrossEntropy : AdversaryKind::kWassersteinCritic;
    m.adversary = make_stack(m.feature_width() + 1, arch.adversary_hidden, 1, Activation::kReLU,
                             ce ? Activation::kSigmoid : Activation::kIdentity, adv);
    if (!ce) clip_weights(m.adversary, config.clip_c);
  }
  m.validate();
  return m;
}

TrainResult train(const RunConfig& config, const Dataset& train_set, const Dataset& test_set,
                  const StepObserver& observer) {
  return run_training(config, train_set, test_set, observer);
}

TrainResult train_plain(const RunConfig& config, const Dataset& train_set,
                        const Dataset& test_set, const StepObserver& observer) {
  require_algorithm(config, Algorithm::kPlain);
  return run_training(config, train_set, test_set, observer);
}

TrainResult train_cenet(const RunConfig& config, const Dataset& train_set,
                        const Dataset& test_set, const StepObserver& observer) {
  require_algorithm(config, Algorithm::kCENet);
  return run_training(config, train_set, test_set, observer);
}

TrainResult train_wasserstein(const RunConfig& config, const Dataset& train_set,
                              const Dataset& test_set, const StepObserver& observer) {
  require_algorithm(config, Algorithm::kWassersteinNet);
  return run_training(config, train_set, test_set, observer);
}

Vector predict(const MlpModel& model, const Matrix& x) {
  Matrix out = predict(model.head, predict(model.feature_map, x));
  auto v = out.values();
  return Vector(v.begin(), v.end());
}

double adversary_loss(const MlpModel& model, const Dataset& data, double y_min, double y_max) {
  if (model.adversary_kind == AdversaryKind::kNone) return 0.0;
  const Matrix z = predict(model.feature_map, data.x);
  const Matrix out = predict(model.adversary, adversary_input(z, data.y, y_min, y_max));
  if (model.adversary_kind == AdversaryKind::kCrossEntropy) return bce_loss(out.values(), data.a).value;
  auto pen = wasserstein_penalty(out.values(), data.a);
  return pen ? pen->value : 0.0;
}

Evaluation evaluate_predictions(const GroupedPredictions& gp, std::size_t y_bins,
                                std::size_t tv_bins) {
  Evaluation e;
  e.metrics = compute_metrics(gp, tv_bins);
  BoundContext& c = e.context;
  for (double v : gp.target()) c.m_bound = std::max(c.m_bound, std::abs(v));
  for (double v : gp.pred()) c.m_bound = std::max(c.m_bound, std::abs(v));
  c.alpha = static_cast<double>(gp.group_size(0)) / static_cast<double>(gp.size());
  c.w1_labels = e.metrics.w1_labels;
  c.w1_preds = e.metrics.w1_preds;
  c.tv_labels = e.metrics.tv_labels;
  c.cond_discrepancy = conditional_discrepancy(gp, y_bins);
  e.lower_bound = lower_bound_joint(c.w1_labels, c.w1_preds);
  e.lower_bound_weighted = lower_bound_weighted(c.alpha, c.w1_labels, c.w1_preds);
  e.upper_bound = upper_bound_gap(c);

  // Both inequalities hold exactly on empirical distributions; a violation
  // beyond rounding means a bug upstream.
  const double tol = 1e-9 * std::max(1.0, e.metrics.err0 + e.metrics.err1 + e.lower_bound);
  if (e.metrics.err0 + e.metrics.err1 < e.lower_bound - tol) {
    throw std::logic_error("joint error below its Wasserstein lower bound");
  }
  for (int a : {0, 1}) {
    const double err = a == 0 ? e.metrics.err0 : e.metrics.err1;
    const double w1 = wasserstein1d_exact(gp.target_of(a), gp.pred_of(a));
    if (w1 > std::sqrt(err) + 1e-9 * std::max(1.0, c.m_bound)) {
      throw std::logic_error("W1(y, yhat) exceeds sqrt(err) for group " + std::to_string(a));
    }
  }
  return e;
}

Evaluation evaluate(const MlpModel& model, const Dataset& data, std::size_t y_bins,
                    std::size_t tv_bins) {
  data.validate();
  return evaluate_predictions(GroupedPredictions(predict(model, data.x), data.y, data.a), y_bins,
                              tv_bins);
}

FeasibleRegion feasible_region_for(const Evaluation& e) {
  const double a = e.upper_bound;
  const double b = e.lower_bound;
  double cap = 1.5 * std::max({a, b, e.metrics.err0, e.metrics.err1});
  if (!(cap > 0.0)) cap = 1.0;
  return feasible_region(a, b, cap);
}

std::vector<SweepAggregate> aggregate_sweep(std::span<const SweepRow> rows) {
  std::vector<SweepAggregate> out;
  std::vector<std::pair<Algorithm, double>> keys;
  for (const SweepRow& r : rows) {
    auto key = std::make_pair(r.algorithm, r.lambda);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [alg, lambda] : keys) {
    std::vector<double> r2, e0, e1, gap;
    for (const SweepRow& r : rows) {
      if (r.algorithm != alg || r.lambda != lambda || !r.ok()) continue;
      r2.push_back(r.result->metrics.r2);
      e0.push_back(r.result->metrics.err0);
      e1.push_back(r.result->metrics.err1);
      gap.push_back(r.result->metrics.err_gap);
    }
    SweepAggregate a;
    a.algorithm = alg;
    a.lambda = lambda;
    a.n_ok = r2.size();
    a.r2_mean = mean_of(r2);
    a.r2_std = sample_std(r2);
    a.err0_mean = mean_of(e0);
    a.err0_std = sample_std(e0);
    a.err1_mean = mean_of(e1);
    a.err1_std = sample_std(e1);
    a.err_gap_mean = mean_of(gap);
    a.err_gap_std = sample_std(gap);
    out.push_back(a);
  }
  return out;
}

SweepTable lambda_sweep(const RunConfig& base, std::span<const double> lambdas,
                        std::span<const std::uint64_t> seeds, const Dataset& train_set,
                        const Dataset& test_set, std::size_t jobs) {
  if (lambdas.empty() || seeds.empty()) throw ConfigError("sweep needs lambdas and seeds");
  SweepTable table;
  for (double lambda : lambdas) {
    for (std::uint64_t seed : seeds) {
      SweepRow row;
      row.algorithm = base.algorithm;
      row.lambda = lambda;
      row.seed = seed;
      table.rows.push_back(row);
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < table.rows.size(); i = next++) {
      SweepRow& row = table.rows[i];
      try {
        RunConfig cfg = base;
        cfg.lambda = row.lambda;
        cfg.seed = row.seed;
        TrainResult tr = train(cfg, train_set, test_set);
        row.result = evaluate(tr.model, test_set, cfg.y_bins, cfg.tv_bins);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, table.rows.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  table.aggregates = aggregate_sweep(table.rows);
  return table;
}

void write_epoch_log_csv(std::ostream& out, std::span<const EpochLog> log) {
  out << "epoch,train_mse,test_mse,err_gap,adversary_loss\n";
  for (const EpochLog& r : log) {
    out << r.epoch << ',' << format_double(r.train_mse) << ',' << format_double(r.test_mse) << ','
        << format_double(r.err_gap) << ',' << format_double(r.adversary_loss) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "algorithm,lambda,seed,r2,err0,err1,err_gap,w1_labels,w1_preds,tv_labels,lower_bound,"
         "upper_bound,status\n";
  for (const SweepRow& r : rows) {
    out << to_string(r.algorithm) << ',' << format_double(r.lambda) << ',' << r.seed;
    if (r.ok()) {
      const Evaluation& e = *r.result;
      for (double v : {e.metrics.r2, e.metrics.err0, e.metrics.err1, e.metrics.err_gap,
                       e.metrics.w1_labels, e.metrics.w1_preds, e.metrics.tv_labels, e.lower_bound,
                       e.upper_bound}) {
        out << ',' << format_double(v);
      }
      out << ",ok\n";
    } else {
      for (int k = 0; k < 9; ++k) out << ",nan";
      out << ',' << csv_field("error: " + r.error) << '\n';
    }
  }
}

void write_sweep_aggregate_csv(std::ostream& out, std::span<const SweepAggregate> aggregates) {
  out << "algorithm,lambda,n_ok,r2_mean,r2_std,err0_mean,err0_std,err1_mean,err1_std,"
         "err_gap_mean,err_gap_std\n";
  for (const SweepAggregate& a : aggregates) {
    out << to_string(a.algorithm) << ',' << format_double(a.lambda) << ',' << a.n_ok;
    for (double v : {a.r2_mean, a.r2_std, a.err0_mean, a.err0_std, a.err1_mean, a.err1_std,
                     a.err_gap_mean, a.err_gap_std}) {
      out << ',' << format_double(v);
    }
    out << '\n';
  }
}

}  // namespace fairreg
