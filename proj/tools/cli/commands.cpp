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

#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "fairreg/error.hpp"
#include "fairreg/format.hpp"

namespace fairreg::cli {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

fs::path prepare_output_dir(const ExperimentConfig& config) {
  const fs::path dir = resolve_output_dir(config);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw DataError("cannot create output directory '" + dir.string() + "'");
  }
  return dir;
}

json dataset_json(const Dataset& train_set, const Dataset& test_set) {
  json warnings = json::array();
  for (const auto* part : {&train_set, &test_set}) {
    for (const auto& w : part->warnings) warnings.push_back(w);
  }
  return {{"n_train", train_set.size()},
          {"n_test", test_set.size()},
          {"features", train_set.feature_names},
          {"warnings", warnings}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

void apply_overrides(ExperimentConfig& config, const Overrides& o) {
  if (o.output_dir) config.output_dir = *o.output_dir;
  if (o.algorithm) config.run.algorithm = parse_algorithm(*o.algorithm);
  if (o.lambda) config.run.lambda = *o.lambda;
  if (o.seed) config.run.seed = *o.seed;
  if (o.epochs) config.run.epochs = *o.epochs;
  if (o.jobs) {
    if (!config.sweep) throw ConfigError("--jobs given but the config has no sweep section");
    config.sweep->jobs = *o.jobs;
  }
  config.validate();
}

fs::path resolve_output_dir(const ExperimentConfig& config) {
  if (!config.output_dir.empty()) return config.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return kDefaultOutputDir;
}

json cmd_train(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const fs::path dir = prepare_output_dir(config);
  const auto [train_set, test_set] = load_experiment_data(config);
  const TrainResult result = train(config.run, train_set, test_set);
  const Evaluation test_eval =
      evaluate(result.model, test_set, config.run.y_bins, config.run.tv_bins);
  const Evaluation train_eval =
      evaluate(result.model, train_set, config.run.y_bins, config.run.tv_bins);

  json doc;
  doc["config"] = to_json(config);
  doc["dataset"] = dataset_json(train_set, test_set);
  doc["test"] = to_json(test_eval);
  doc["train"] = to_json(train_eval);
  doc["feasible_region"] = to_json(feasible_region_for(test_eval));
  doc["epoch_log"] = "epochs.csv";

  std::ostringstream csv;
  write_epoch_log_csv(csv, result.log);
  write_text(dir / "epochs.csv", csv.str());
  write_text(dir / "metrics.json", dump(doc));
  log << "test r2 " << format_double(test_eval.metrics.r2) << " err_gap "
      << format_double(test_eval.metrics.err_gap) << "\n"
      << "wrote " << (dir / "metrics.json").string() << "\n";
  return doc;
}

json cmd_sweep(const ExperimentConfig& config, std::ostream& log, bool& ok) {
  config.validate();
  if (!config.sweep) throw ConfigError("sweep: section missing from config");
  const fs::path dir = prepare_output_dir(config);
  const auto [train_set, test_set] = load_experiment_data(config);
  const SweepConfig& sw = *config.sweep;
  const SweepTable table =
      lambda_sweep(config.run, sw.lambdas, sw.seeds, train_set, test_set, sw.jobs);

  ok = true;
  for (const SweepRow& r : table.rows) {
    if (!r.ok()) {
      ok = false;
      log << "cell lambda=" << format_double(r.lambda) << " seed=" << r.seed
          << " failed: " << r.error << "\n";
    }
  }
  std::ostringstream rows, agg;
  write_sweep_csv(rows, table.rows);
  write_sweep_aggregate_csv(agg, table.aggregates);
  write_text(dir / "sweep.csv", rows.str());
  write_text(dir / "sweep_aggregate.csv", agg.str());

  json doc;
  doc["config"] = to_json(config);
  doc["dataset"] = dataset_json(train_set, test_set);
  doc["sweep_table"] = "sweep.csv";
  doc["aggregate_table"] = "sweep_aggregate.csv";
  std::size_t failed = 0;
  for (const SweepRow& r : table.rows) failed += r.ok() ? 0 : 1;
  doc["cells"] = table.rows.size();
  doc["failed_cells"] = failed;
  write_text(dir / "sweep.json", dump(doc));
  log << "wrote " << (dir / "sweep.csv").string() << " (" << table.rows.size() << " cells, "
      << failed << " failed)\n";
  return doc;
}

json cmd_bounds(const fs::path& csv, std::size_t y_bins, std::size_t tv_bins) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw DataError("cannot open '" + csv.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(csv.string() + ": empty file");
  const auto header = split_csv_record(line);
  auto column = [&](const char* name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw DataError(csv.string() + ": missing column '" + name + "'");
  };
  const std::size_t ip = column("pred"), it = column("target"), ig = column("group");

  Vector pred, target;
  std::vector<int> group;
  std::vector<std::string> problems;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_record(line);
    if (cells.size() != header.size()) {
      problems.push_back("row " + std::to_string(lineno) + ": expected " +
                         std::to_string(header.size()) + " fields, got " +
                         std::to_string(cells.size()));
      continue;
    }
    const auto p = parse_double(cells[ip]);
    const auto t = parse_double(cells[it]);
    const std::string_view g = trim(cells[ig]);
    if (!p || !std::isfinite(*p)) {
      problems.push_back("row " + std::to_string(lineno) + ": bad pred '" + cells[ip] + "'");
    } else if (!t || !std::isfinite(*t)) {
      problems.push_back("row " + std::to_string(lineno) + ": bad target '" + cells[it] + "'");
    } else if (g != "0" && g != "1") {
      problems.push_back("row " + std::to_string(lineno) + ": group must be 0 or 1, got '" +
                         cells[ig] + "'");
    } else {
      pred.push_back(*p);
      target.push_back(*t);
      group.push_back(g == "1" ? 1 : 0);
    }
  }
  if (!problems.empty()) {
    std::string msg = csv.string() + ": " + std::to_string(problems.size()) + " malformed row(s)";
    for (std::size_t i = 0; i < problems.size() && i < 20; ++i) msg += "\n  " + problems[i];
    if (problems.size() > 20) msg += "\n  ...";
    throw DataError(msg);
  }
  for (int g : {0, 1}) {
    if (std::find(group.begin(), group.end(), g) == group.end()) {
      throw DataError(csv.string() + ": column 'group' has no rows with value " +
                      std::to_string(g) + "; two groups are required");
    }
  }

  const GroupedPredictions gp(pred, target, group);
  const Evaluation e = evaluate_predictions(gp, y_bins, tv_bins);
  json doc = to_json(e);
  doc["input"] = {{"path", csv.generic_string()},
                  {"rows", gp.size()},
                  {"n0", gp.group_size(0)},
                  {"n1", gp.group_size(1)},
                  {"y_bins", y_bins},
                  {"tv_bins", tv_bins}};
  doc["feasible_region"] = to_json(feasible_region_for(e));
  return doc;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fair regression toolkit: train, sweep, audit bounds, generate data", "fairreg"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path;
  auto add_overrides = [&](CLI::App* sub, bool with_jobs) {
    sub->add_option("config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("-o,--output-dir", ov.output_dir, "Output directory");
    sub->add_option("--algorithm", ov.algorithm, "plain, cenet or wasserstein");
    sub->add_option("--lambda", ov.lambda, "Adversary weight");
    sub->add_option("--seed", ov.seed, "Run seed");
    sub->add_option("--epochs", ov.epochs, "Training epochs");
    if (with_jobs) sub->add_option("-j,--jobs", ov.jobs, "Worker threads");
  };
  CLI::App* train_cmd = app.add_subcommand("train", "Train one model and write metrics.json");
  add_overrides(train_cmd, false);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run the lambda x seed grid of a config");
  add_overrides(sweep_cmd, true);

  CLI::App* bounds_cmd = app.add_subcommand("bounds", "Audit a pred,target,group CSV");
  std::string bounds_csv;
  std::string bounds_out;
  std::size_t y_bins = kDefaultYBins, tv_bins = kDefaultTvBins;
  bounds_cmd->add_option("csv", bounds_csv, "Predictions CSV")->required();
  bounds_cmd->add_option("--y-bins", y_bins, "Label bins for the conditional term")
      ->check(CLI::PositiveNumber);
  bounds_cmd->add_option("--tv-bins", tv_bins, "Histogram bins for total variation")
      ->check(CLI::PositiveNumber);
  bounds_cmd->add_option("--out", bounds_out, "Write bounds.json here instead of stdout");

  CLI::App* synth_cmd = app.add_subcommand("gen-synth", "Write a synthetic two-group dataset");
  SyntheticSpec spec;
  std::optional<std::size_t> n_per_group;
  std::optional<double> proxy_shift;
  std::string synth_out;
  synth_cmd->add_option("--out", synth_out, "Output CSV")->required();
  synth_cmd->add_option("--n-per-group", n_per_group, "Rows per group");
  synth_cmd->add_option("--n0", spec.n0, "Rows of group 0");
  synth_cmd->add_option("--n1", spec.n1, "Rows of group 1");
  synth_cmd->add_option("--feature-dim", spec.feature_dim, "Feature count");
  synth_cmd->add_option("--label-mean-shift", spec.label_mean_shift, "Added to group 1 labels");
  synth_cmd->add_option("--label-scale0", spec.label_scale0);
  synth_cmd->add_option("--label-scale1", spec.label_scale1);
  synth_cmd->add_option("--noise-scale0", spec.noise_scale0);
  synth_cmd->add_option("--noise-scale1", spec.noise_scale1);
  synth_cmd->add_option("--proxy-shift", proxy_shift, "Append the noise proxy column");
  synth_cmd->add_option("--seed", spec.seed);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd || *sweep_cmd) {
      ExperimentConfig config = load_config(config_path);
      apply_overrides(config, ov);
      if (*train_cmd) {
        cmd_train(config, out);
        return kExitOk;
      }
      bool ok = true;
      cmd_sweep(config, out, ok);
      return ok ? kExitOk : kExitFailure;
    }
    if (*bounds_cmd) {
      const std::string text = dump(cmd_bounds(bounds_csv, y_bins, tv_bins));
      if (bounds_out.empty()) {
        out << text;
      } else {
        write_text(bounds_out, text);
      }
      return kExitOk;
    }
    if (*synth_cmd) {
      if (n_per_group) spec.n0 = spec.n1 = *n_per_group;
      spec.noise_proxy_shift = proxy_shift;
      try {
        spec.validate();
      } catch (const ConfigError& e) {
        err << "gen-synth: " << e.what() << "\n" << synth_cmd->help();
        return kExitUsage;
      }
      write_dataset_csv(synth_out, gen_synthetic(spec));
      out << "wrote " << synth_out << "\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace fairreg::cli
