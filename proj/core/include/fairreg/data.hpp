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

#ifndef FAIRREG_DATA_HPP_
#define FAIRREG_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairreg/matrix.hpp"

namespace fairreg {

enum class ColumnKind { kNumeric, kCategorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
};

// How missing feature values are handled. Rows with a missing target or
// group are always dropped.
enum class MissingPolicy { kDrop, kMeanImpute };

struct DatasetSchema {
  // Empty means "every column except target and group", with kinds
  // inferred (numeric when every present value parses as a number).
  std::vector<ColumnSpec> features;
  std::string target;
  std::string group;
  MissingPolicy missing = MissingPolicy::kDrop;

  void validate() const;
};

struct RawColumn {
  ColumnSpec spec;
  Vector numeric;                    // kNumeric
  std::vector<std::string> strings;  // kCategorical
};

// Typed rows after missing-value handling.
struct RawTable {
  std::vector<RawColumn> columns;
  Vector y;
  std::vector<int> a;
  std::size_t dropped_rows = 0;
  std::size_t imputed_cells = 0;

  std::size_t rows() const { return y.size(); }
};

struct ColumnStats {
  double mean = 0.0;
  double std = 1.0;
};

struct Dataset {
  Matrix x;
  Vector y;
  std::vector<int> a;
  std::vector<std::string> feature_names;
  // Per column of x: the train-split statistics used to standardize it.
  // Empty for data that was not standardized.
  std::vector<ColumnStats> normalization;
  std::vector<std::string> warnings;

  std::size_t size() const { return y.size(); }
  std::size_t group_count(int g) const;
  Dataset subset(std::span<const std::size_t> indices) const;
  // Throws ShapeError when x, y, a disagree in length.
  void validate() const;
};

// Cells treated as missing: "", "?", "NA", "N/A", "nan", "NaN", "null".
bool is_missing_token(std::string_view cell);

RawTable load_csv(const std::filesystem::path& path, const DatasetSchema& schema);

// One-hot encodes categoricals and standardizes every resulting column with
// statistics of the rows in `fit_on` (population std). Columns with zero
// variance on those rows are dropped with a warning.
Dataset preprocess(const RawTable& raw, std::span<const std::size_t> fit_on);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// floor(n * test_fraction) rows go to test, the rest to train; both lists
// ascending. Deterministic in seed.
SplitIndices split_indices(std::size_t n, double test_fraction, std::uint64_t seed);

// Dataset split; warns (in each part's warnings) when a part lacks a group.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double test_fraction,
                                  std::uint64_t seed);

struct SyntheticSpec {
  std::size_t n0 = 1000;
  std::size_t n1 = 1000;
  std::size_t feature_dim = 5;
  double label_mean_shift = 0.0;  // added to group 1 labels
  double label_scale0 = 1.0;
  double label_scale1 = 1.0;
  double noise_scale0 = 0.5;
  double noise_scale1 = 0.5;
  std::uint64_t seed = 0;
  // When set, one extra feature column "proxy" is appended. For group 0 it
  // observes that row's label noise (plus 10% jitter); for group 1 it is
  // pure noise of the same scale centered at this shift. The conditional
  // distribution of the proxy given y then differs by group.
  std::optional<double> noise_proxy_shift;

  void validate() const;
};

// Rows: group 0 first, then group 1. Features standard normal; label
//   y = scale_a * <w, x> + shift_a + noise_a * N(0, 1)
// with w a seeded unit vector, shift_0 = 0, shift_1 = label_mean_shift.
Dataset gen_synthetic(const SyntheticSpec& spec);

// Columns: feature names..., y, a. Values written in shortest round-trip
// form, so read_dataset_csv reproduces the data bit for bit.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset_csv(const std::filesystem::path& path, const std::string& target = "y",
                         const std::string& group = "a");

}  // namespace fairreg

#endif  // FAIRREG_DATA_HPP_
