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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Run with no arguments, or with criterion numbers to run
// a subset (e.g. `fairreg_acceptance 2 7`).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "fairreg/bounds.hpp"
#include "fairreg/format.hpp"
#include "fairreg/metrics.hpp"
#include "fairreg/nn.hpp"
#include "fairreg/train.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace fairreg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "fairreg_acceptance";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Activation random_activation(Rng& rng) {
  switch (rng.below(3)) {
    case 0:
      return Activation::kReLU;
    case 1:
      return Activation::kSigmoid;
    default:
      return Activation::kIdentity;
  }
}

LayerStack random_mlp(Rng& rng, std::size_t in_width, std::size_t out_width, Activation out_act,
                      double scale) {
  const std::size_t depth = 1 + rng.below(3);
  LayerStack net;
  std::size_t width = in_width;
  for (std::size_t l = 0; l < depth; ++l) {
    const bool last = l + 1 == depth;
    const std::size_t out = last ? out_width : 1 + rng.below(20);
    Layer layer;
    layer.weights = init_glorot(out, width, rng);
    for (double& w : layer.weights.values()) w *= scale;
    layer.bias.resize(out);
    for (double& b : layer.bias) b = rng.uniform(-0.5, 0.5) * scale;
    layer.activation = last ? out_act : random_activation(rng);
    net.push_back(std::move(layer));
    width = out;
  }
  return net;
}

// 1. Analytic gradients against central differences.
Outcome gradient_correctness() {
  Rng rng(101);
  double worst = 0.0;
  std::size_t entries = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t in = 1 + rng.below(20);
    LayerStack net = random_mlp(rng, in, 1 + rng.below(20), random_activation(rng), 1.0);
    const std::size_t batch = 1 + rng.below(8);
    Matrix x(batch, in), r(batch, net.back().out_width());
    for (double& v : x.values()) v = rng.normal();
    for (double& v : r.values()) v = rng.normal();
    const auto check = testing::check_gradients(net, x, r, 1e-5);
    worst = std::max(worst, check.worst);
    entries += check.checked;
  }
  return {worst < 1e-4,
          "50 nets, " + std::to_string(entries) + " entries, worst rel err " + fmt(worst)};
}

// 2. Exact W1 against an assignment-based transport oracle; triangle rule.
Outcome transport_oracle() {
  Rng rng(202);
  auto sample = [&](std::size_t max_n) {
    std::vector<double> v(1 + rng.below(max_n));
    const bool ties = rng.below(2) == 0;
    for (double& x : v) x = ties ? static_cast<double>(rng.below(5)) : rng.normal() * 3.0;
    return v;
  };
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto p = sample(6), q = sample(6);
    worst = std::max(worst, std::abs(wasserstein1d_exact(p, q) - testing::w1_by_assignment(p, q)));
  }
  std::size_t tri = 0;
  for (int t = 0; t < 200; ++t) {
    const auto p = sample(16), q = sample(16), s = sample(16);
    const double lhs = wasserstein1d_exact(p, q);
    const double rhs = wasserstein1d_exact(p, s) + wasserstein1d_exact(s, q);
    if (lhs > rhs + 1e-9) ++tri;
  }
  return {worst <= 1e-9 && tri == 0, "max |W1 - oracle| " + fmt(worst) + " over 200 pairs, " +
                                         std::to_string(tri) + " triangle violations"};
}

// 3. Joint-error lower bound and W1 <= sqrt(err) on random models/data.
Outcome joint_lower_bound() {
  Rng rng(303);
  std::size_t violations = 0, w1_violations = 0, active = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 100; ++t) {
    SyntheticSpec spec;
    spec.n0 = 10 + rng.below(200);
    spec.n1 = 10 + rng.below(200);
    spec.feature_dim = 1 + rng.below(6);
    spec.label_mean_shift = rng.uniform(-3.0, 3.0);
    spec.label_scale0 = rng.uniform(0.2, 2.0);
    spec.label_scale1 = rng.uniform(0.2, 2.0);
    spec.noise_scale0 = rng.uniform(0.05, 1.0);
    spec.noise_scale1 = rng.uniform(0.05, 1.0);
    spec.seed = rng.next_u64();
    const Dataset d = gen_synthetic(spec);
    const LayerStack h =
        random_mlp(rng, spec.feature_dim, 1, Activation::kIdentity, rng.uniform(0.05, 2.0));
    const Matrix out = predict(h, d.x);
    const GroupedPredictions gp(out.col(0), d.y, d.a);
    const double e0 = group_error(gp, 0), e1 = group_error(gp, 1);
    const double lb = lower_bound_joint(wasserstein1d_exact(gp.target_of(0), gp.target_of(1)),
                                        wasserstein1d_exact(gp.pred_of(0), gp.pred_of(1)));
    if (lb > 0.0) ++active;
    min_slack = std::min(min_slack, e0 + e1 - lb);
    if (e0 + e1 < lb - 1e-9) ++violations;
    for (int a : {0, 1}) {
      const double w = wasserstein1d_exact(gp.target_of(a), gp.pred_of(a));
      if (w > std::sqrt(a == 0 ? e0 : e1) + 1e-9) ++w1_violations;
    }
  }
  return {violations == 0 && w1_violations == 0,
          std::to_string(violations) + " bound violations, " + std::to_string(w1_violations) +
              " W1<=sqrt(err) violations, " + std::to_string(active) +
              " cases with positive bound, min slack " + fmt(min_slack)};
}

// 4. Error-gap upper bound on binary-label fixtures.
Outcome gap_upper_bound() {
  Rng rng(404);
  std::size_t violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 100; ++t) {
    Vector pred, target;
    std::vector<int> group;
    const double p1[2] = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
    const double slope[2] = {rng.uniform(-1, 2), rng.uniform(-1, 2)};
    const double offset[2] = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const double noise = rng.uniform(0.0, 0.8);
    for (int a : {0, 1}) {
      const std::size_t n = 4 + rng.below(200);
      for (std::size_t i = 0; i < n; ++i) {
        // The first two rows of each group pin both label values.
        const double y = i < 2 ? static_cast<double>(i) : (rng.uniform() < p1[a] ? 1.0 : 0.0);
        target.push_back(y);
        pred.push_back(slope[a] * y + offset[a] + noise * rng.normal());
        group.push_back(a);
      }
    }
    const Evaluation e = evaluate_predictions(GroupedPredictions(pred, target, group));
    min_slack = std::min(min_slack, e.upper_bound - e.metrics.err_gap);
    if (e.metrics.err_gap > e.upper_bound + 1e-9) ++violations;
  }
  return {violations == 0,
          std::to_string(violations) + " violations in 100 fixtures, min slack " + fmt(min_slack)};
}

// 5. Pooled-mean constant predictor on moment-matched groups.
Outcome constant_predictor() {
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticSpec spec;
    spec.n0 = 500;
    spec.n1 = 1;
    spec.seed = seed;
    spec.noise_scale0 = 0.3 + 0.1 * static_cast<double>(seed);
    const Dataset d = gen_synthetic(spec);
    Vector y0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.a[i] == 0) y0.push_back(d.y[i]);
    }
    double m0 = 0.0;
    for (double v : y0) m0 += v;
    m0 /= static_cast<double>(y0.size());
    // Group 1 is group 0 reflected about its mean: same mean and second
    // moment, different distribution whenever group 0 is skewed.
    Vector y = y0;
    std::vector<int> a(y0.size(), 0);
    for (double v : y0) {
      y.push_back(2.0 * m0 - v);
      a.push_back(1);
    }
    if (!constant_predictor_check(y, a, 1e-9)) return {false, "moment check rejected a matched pair"};
    double c = 0.0;
    for (double v : y) c += v;
    c /= static_cast<double>(y.size());
    const GroupedPredictions gp(Vector(y.size(), c), y, a);
    worst = std::max(worst, error_gap(gp));
    ++checked;
  }
  return {worst < 1e-9, std::to_string(checked) + " sample pairs, max err_gap " + fmt(worst)};
}

// 6. CENet adversary loss floor when Z carries no more than Y.
Outcome equilibrium_floor() {
  Rng rng(606);
  Dataset d;
  const std::size_t n = 4000;
  d.x = Matrix(n, 1);
  d.feature_names = {"x"};
  for (std::size_t i = 0; i < n; ++i) {
    const int y = rng.uniform() < 0.5 ? 1 : 0;
    const int a = rng.uniform() < (y ? 0.7 : 0.2) ? 1 : 0;
    d.x(i, 0) = y;  // X = Y, so any Z = g(X) depends on Y alone
    d.y.push_back(y);
    d.a.push_back(a);
  }
  const auto [tr, te] = split(d, 0.3, 1);
  RunConfig c;
  c.algorithm = Algorithm::kCENet;
  c.lambda = 1.0;
  c.epochs = 30;
  c.batch_size = 128;
  c.optimizer.learning_rate = 1.0;
  c.architecture.feature_hidden = {2};
  c.architecture.adversary_hidden = {8};
  c.seed = 3;
  const TrainResult r = train(c, tr, te);
  std::vector<int> yi(tr.y.begin(), tr.y.end());
  const DiscreteJoint joint = DiscreteJoint::from_samples(tr.a, yi, yi, 2, 2, 2);
  const double floor = conditional_entropy(joint);
  const double bce = r.log.back().adversary_loss;
  return {std::abs(bce - floor) <= 0.02,
          "adversary BCE " + fmt(bce) + " nats, H(A|Y) " + fmt(floor) + ", |diff| " +
              fmt(std::abs(bce - floor))};
}

// 7. TV of the Adult group x label table, ingested through the CLI.
Outcome adult_tv() {
  const fs::path csv = fs::path(FAIRREG_TEST_DATA_DIR) / "adult_label_counts.csv";
  const cli::json doc = cli::cmd_bounds(csv, kDefaultYBins, kDefaultTvBins);
  const double tv = doc["metrics"]["tv_labels"].get<double>();
  return {std::abs(tv - 0.19890) <= 1e-4, "tv_labels " + fmt(tv)};
}

cli::ExperimentConfig mitigation_config(const fs::path& out) {
  cli::ExperimentConfig cfg =
      cli::load_config(fs::path(FAIRREG_CONFIG_DIR) / "mitigation_sweep.json");
  cfg.output_dir = out;
  return cfg;
}

// 8. Gap falls and R^2 holds up along the lambda sweep.
Outcome mitigation_trend() {
  const fs::path out = work_dir() / "mitigation";
  fs::remove_all(out);
  const cli::ExperimentConfig cfg = mitigation_config(out);
  const auto [tr, te] = cli::load_experiment_data(cfg);
  const SweepTable t = lambda_sweep(cfg.run, cfg.sweep->lambdas, cfg.sweep->seeds, tr, te,
                                    cfg.sweep->jobs);
  const SweepAggregate* at0 = nullptr;
  const SweepAggregate* at10 = nullptr;
  std::string trend;
  for (const auto& a : t.aggregates) {
    if (a.lambda == 0.0) at0 = &a;
    if (a.lambda == 10.0) at10 = &a;
    trend += " l=" + fmt(a.lambda) + ":gap " + fmt(a.err_gap_mean) + "/r2 " + fmt(a.r2_mean);
  }
  if (!at0 || !at10 || at0->n_ok != 10 || at10->n_ok != 10) {
    return {false, "sweep incomplete:" + trend};
  }
  const double gap_cut = 1.0 - at10->err_gap_mean / at0->err_gap_mean;
  const double r2_drop = 1.0 - at10->r2_mean / at0->r2_mean;
  return {gap_cut >= 0.5 && r2_drop <= 0.3,
          "gap reduced " + fmt(100 * gap_cut) + "%, R2 drop " + fmt(100 * r2_drop) + "%;" + trend};
}

// 9. lambda = 0 leaves the (g, h) trajectory identical to Plain.
Outcome zero_lambda_equivalence() {
  const cli::ExperimentConfig cfg = mitigation_config(work_dir() / "unused");
  const auto [tr, te] = cli::load_experiment_data(cfg);
  RunConfig base = cfg.run;
  base.epochs = 5;
  base.lambda = 0.0;
  std::size_t steps = 0;
  bool same = true;
  for (Algorithm algo : {Algorithm::kCENet, Algorithm::kWassersteinNet}) {
    for (std::uint64_t seed : {0u, 1u}) {
      base.seed = seed;
      base.algorithm = Algorithm::kPlain;
      std::vector<std::pair<LayerStack, LayerStack>> plain;
      train(base, tr, te, [&](std::size_t, std::size_t, const MlpModel& m) {
        plain.emplace_back(m.feature_map, m.head);
      });
      RunConfig c = base;
      c.algorithm = algo;
      std::size_t i = 0;
      train(c, tr, te, [&](std::size_t, std::size_t, const MlpModel& m) {
        if (i >= plain.size() || !(plain[i].first == m.feature_map) ||
            !(plain[i].second == m.head)) {
          same = false;
        }
        ++i;
      });
      same = same && i == plain.size();
      steps += i;
    }
  }
  return {same, std::to_string(steps) + " parameter updates compared bit for bit"};
}

// 10. Byte-identical output files on repeated runs of every subcommand.
Outcome determinism() {
  const fs::path root = work_dir() / "determinism";
  fs::remove_all(root);
  const std::string config = (fs::path(FAIRREG_CONFIG_DIR) / "mitigation_sweep.json").string();
  const std::string adult = (fs::path(FAIRREG_TEST_DATA_DIR) / "adult_label_counts.csv").string();
  auto run_all = [&](const fs::path& dir, const std::string& jobs) {
    std::vector<std::vector<std::string>> cmds = {
        {"sweep", config, "-o", (dir / "sweep").string(), "-j", jobs},
        {"bounds", adult, "--out", (dir / "bounds.json").string()},
        {"gen-synth", "--out", (dir / "synth.csv").string(), "--n-per-group", "300",
         "--proxy-shift", "1", "--seed", "4"},
    };
    for (const char* algo : {"plain", "cenet", "wasserstein"}) {
      cmds.push_back({"train", config, "--algorithm", algo, "--lambda", "1", "-o",
                      (dir / algo).string()});
    }
    for (auto& c : cmds) {
      c.insert(c.begin(), "fairreg");
      std::ostringstream out, err;
      const int code = cli::run_cli(c, out, err);
      if (code != cli::kExitOk) return c[1] + " exited " + std::to_string(code) + ": " + err.str();
    }
    return std::string();
  };
  // Sweep cells run on two threads, so completion order varies between passes.
  for (const char* dir : {"a", "b"}) {
    const std::string e = run_all(root / dir, "2");
    if (!e.empty()) return {false, e};
  }
  std::size_t compared = 0;
  std::vector<std::string> diffs;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), root / "a");
    ++compared;
    if (!fs::exists(root / "b" / rel) || slurp(entry.path()) != slurp(root / "b" / rel)) {
      diffs.push_back(rel.string());
    }
  }
  std::string detail = std::to_string(compared) + " files compared";
  for (const auto& d : diffs) detail += ", differs: " + d;
  return {diffs.empty() && compared == 11, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<Criterion> criteria = {
      {1, "gradient_correctness", 30, gradient_correctness},
      {2, "transport_oracle", 30, transport_oracle},
      {3, "joint_error_lower_bound", 0, joint_lower_bound},
      {4, "error_gap_upper_bound", 0, gap_upper_bound},
      {5, "constant_predictor_parity", 0, constant_predictor},
      {6, "adversary_equilibrium_floor", 60, equilibrium_floor},
      {7, "adult_label_tv", 0, adult_tv},
      {8, "mitigation_trend", 600, mitigation_trend},
      {9, "zero_lambda_equivalence", 0, zero_lambda_equivalence},
      {10, "determinism", 0, determinism},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += " (over the " + fmt(c.budget_s) + " s budget)";
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %-28s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
