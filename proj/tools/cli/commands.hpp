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

#ifndef FAIRREG_TOOLS_CLI_COMMANDS_HPP_
#define FAIRREG_TOOLS_CLI_COMMANDS_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "experiment.hpp"

namespace fairreg::cli {

// Output directory used when neither --output-dir nor the config sets one.
inline constexpr const char* kOutputDirEnv = "FAIRREG_OUTPUT_DIR";
inline constexpr const char* kDefaultOutputDir = "fairreg_out";

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // data, training or I/O failure; also a failed sweep cell
  kExitUsage = 2,    // bad flags or config
};

// Command-line values that win over the config file.
struct Overrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::string> algorithm;
  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> jobs;
};

void apply_overrides(ExperimentConfig& config, const Overrides& o);

// Flag, then config, then $FAIRREG_OUTPUT_DIR, then kDefaultOutputDir.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

// train: metrics.json and epochs.csv. Returns the metrics document.
json cmd_train(const ExperimentConfig& config, std::ostream& log);

// sweep: sweep.csv, sweep_aggregate.csv and sweep.json. `ok` is cleared
// when any cell failed.
json cmd_sweep(const ExperimentConfig& config, std::ostream& log, bool& ok);

// bounds: audit of a predictions CSV with columns pred, target, group.
json cmd_bounds(const std::filesystem::path& csv, std::size_t y_bins, std::size_t tv_bins);

// Parses argv-style arguments (args[0] is the program name) and runs one
// subcommand. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fairreg::cli

#endif  // FAIRREG_TOOLS_CLI_COMMANDS_HPP_
