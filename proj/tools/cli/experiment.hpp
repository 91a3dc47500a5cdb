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

// Experiment configuration files and the JSON documents written by the
// command-line tool.
//
// A config looks like
//
//   {
//     "dataset": {"synthetic": {"n_per_group": [4000, 4000], ...}},
//     "split": {"test_fraction": 0.3, "seed": 5},
//     "run": {"algorithm": "wasserstein", "lambda": 1.0, ...},
//     "sweep": {"lambdas": [0, 1], "seeds": [0, 1]},
//     "output_dir": "out"
//   }
//
// or with "dataset": {"path": "adult.csv", "target": "income",
// "group": "sex", "features": [...], "missing": "drop"}. Relative dataset
// paths resolve against the directory holding the config file. Unknown
// keys are rejected.

#ifndef FAIRREG_TOOLS_CLI_EXPERIMENT_HPP_
#define FAIRREG_TOOLS_CLI_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "fairreg/data.hpp"
#include "fairreg/train.hpp"
#include "json.hpp"

namespace fairreg::cli {

using nlohmann::json;

struct DatasetSource {
  std::optional<std::filesystem::path> path;
  DatasetSchema schema;  // used with path
  std::optional<SyntheticSpec> synthetic;
};

struct SplitConfig {
  double test_fraction = 0.3;
  std::uint64_t seed = 0;
};

struct SweepConfig {
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
  std::size_t jobs = 1;
};

struct ExperimentConfig {
  DatasetSource dataset;
  SplitConfig split;
  RunConfig run;
  std::optional<SweepConfig> sweep;
  std::filesystem::path output_dir;

  // Throws ConfigError naming the field.
  void validate() const;
};

// Field errors come back as ConfigError("<file>: run.lambda: ...").
// Syntax errors carry the line and column.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir);

// Round-trips through parse_config (with base_dir "") to the same config.
json to_json(const ExperimentConfig& config);
json to_json(const SyntheticSpec& spec);
json to_json(const Evaluation& e);
json to_json(const FeasibleRegion& region);

// Loads or generates the data, splits it, and (for CSV input) standardizes
// with train-split statistics.
std::pair<Dataset, Dataset> load_experiment_data(const ExperimentConfig& config);

}  // namespace fairreg::cli

#endif  // FAIRREG_TOOLS_CLI_EXPERIMENT_HPP_
