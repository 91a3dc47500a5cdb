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

#include "fairreg/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fairreg/error.hpp"
#include "fairreg/format.hpp"
#include "fairreg/rng.hpp"

namespace fairreg {

namespace {

constexpr std::uint64_t kSplitStream = 0x5d1e;
constexpr std::uint64_t kSyntheticStream = 0xda7a;

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct PendingRow {
  std::size_t line = 0;
  std::vector<std::string> cells;  // one per used feature column
  double y = 0.0;
  int a = 0;
};

}  // namespace

void DatasetSchema::validate() const {
  if (target.empty()) throw ConfigError("schema: target column not set");
  if (group.empty()) throw ConfigError("schema: group column not set");
  if (target == group) throw ConfigError("schema: target and group must differ");
  std::set<std::string> seen;
  for (const auto& f : features) {
    if (f.name == target || f.name == group) {
      throw ConfigError("schema: column '" + f.name + "' is both a feature and target/group");
    }
    if (!seen.insert(f.name).second) throw ConfigError("schema: duplicate feature '" + f.name + "'");
  }
}

bool is_missing_token(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || cell == "?" || cell == "NA" || cell == "N/A" || cell == "nan" ||
         cell == "NaN" || cell == "null";
}

std::size_t Dataset::group_count(int g) const {
  return static_cast<std::size_t>(std::count(a.begin(), a.end(), g));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.x = x.select_rows(indices);
  out.y.reserve(indices.size());
  out.a.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= y.size()) throw ShapeError("subset index out of range");
    out.y.push_back(y[i]);
    out.a.push_back(a[i]);
  }
  out.feature_names = feature_names;
  out.normalization = normalization;
  return out;
}

void Dataset::validate() const {
  if (x.rows() != y.size() || a.size() != y.size()) {
    throw ShapeError("dataset: x, y and a have different row counts");
  }
}

RawTable load_csv(const std::filesystem::path& path, const DatasetSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "': missing header row");
  std::vector<std::string> header = split_csv_record(line);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[std::string(trim(header[i]))] = i;

  auto column_index = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) {
      throw DataError("'" + path.string() + "': column '" + name + "' not found in header");
    }
    return it->second;
  };
  const std::size_t target_col = column_index(schema.target);
  const std::size_t group_col = column_index(schema.group);

  const bool infer = schema.features.empty();
  std::vector<ColumnSpec> specs = schema.features;
  if (infer) {
    for (const auto& h : header) {
      std::string name(trim(h));
      if (name != schema.target && name != schema.group) specs.push_back({name, ColumnKind::kNumeric});
    }
  }
  std::vector<std::size_t> feature_cols;
  for (const auto& s : specs) feature_cols.push_back(column_index(s.name));

  RawTable table;
  std::vector<PendingRow> rows;
  std::size_t line_no = 1;
  std::size_t data_lines = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++data_lines;
    std::vector<std::string> cells = split_csv_record(line);
    if (cells.size() != header.size()) {
      throw DataError("'" + path.string() + "' line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    }
    const std::string& gcell = cells[group_col];
    const std::string& ycell = cells[target_col];
    if (is_missing_token(gcell) || is_missing_token(ycell)) {
      ++table.dropped_rows;
      continue;
    }
    PendingRow row;
    row.line = line_no;
    const std::string_view g = trim(gcell);
    if (g == "0") {
      row.a = 0;
    } else if (g == "1") {
      row.a = 1;
    } else {
      throw DataError("'" + path.string() + "' line " + std::to_string(line_no) +
                      ": group column '" + schema.group + "' has value '" + std::string(g) +
                      "', expected 0 or 1");
    }
    auto y = parse_double(ycell);
    if (!y || !std::isfinite(*y)) {
      throw DataError("'" + path.string() + "' line " + std::to_string(line_no) +
                      ": target column '" + schema.target + "' value '" + ycell +
                      "' is not a number");
    }
    row.y = *y;
    for (std::size_t c : feature_cols) row.cells.push_back(cells[c]);
    rows.push_back(std::move(row));
  }
  if (data_lines == 0) throw DataError("'" + path.string() + "': no data rows");

  if (infer) {
    for (std::size_t f = 0; f < specs.size(); ++f) {
      bool numeric = true;
      for (const auto& r : rows) {
        if (!is_missing_token(r.cells[f]) && !parse_double(r.cells[f])) {
          numeric = false;
          break;
        }
      }
      specs[f].kind = numeric ? ColumnKind::kNumeric : ColumnKind::kCategorical;
    }
  }

  // Rows with missing features: dropped, except numeric cells under mean
  // imputation.
  std::vector<PendingRow> kept;
  for (auto& r : rows) {
    bool drop = false;
    for (std::size_t f = 0; f < specs.size() && !drop; ++f) {
      if (!is_missing_token(r.cells[f])) continue;
      if (schema.missing == MissingPolicy::kDrop || specs[f].kind == ColumnKind::kCategorical) {
        drop = true;
      }
    }
    if (drop) {
      ++table.dropped_rows;
    } else {
      kept.push_back(std::move(r));
    }
  }
  if (kept.empty()) throw DataError("'" + path.string() + "': every row has missing values");

  table.columns.resize(specs.size());
  for (std::size_t f = 0; f < specs.size(); ++f) {
    RawColumn& col = table.columns[f];
    col.spec = specs[f];
    if (col.spec.kind == ColumnKind::kCategorical) {
      for (const auto& r : kept) col.strings.emplace_back(trim(r.cells[f]));
      continue;
    }
    double sum = 0.0;
    std::size_t present = 0;
    col.numeric.assign(kept.size(), 0.0);
    std::vector<bool> missing(kept.size(), false);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (is_missing_token(kept[i].cells[f])) {
        missing[i] = true;
        continue;
      }
      auto v = parse_double(kept[i].cells[f]);
      if (!v || !std::isfinite(*v)) {
        throw DataError("'" + path.string() + "' line " + std::to_string(kept[i].line) +
                        ": column '" + col.spec.name + "' value '" + kept[i].cells[f] +
                        "' is not a number");
      }
      col.numeric[i] = *v;
      sum += *v;
      ++present;
    }
    if (present == 0) throw DataError("column '" + col.spec.name + "' has no values");
    const double mean = sum / static_cast<double>(present);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (missing[i]) {
        col.numeric[i] = mean;
        ++table.imputed_cells;
      }
    }
  }
  for (const auto& r : kept) {
    table.y.push_back(r.y);
    table.a.push_back(r.a);
  }
  return table;
}

Dataset preprocess(const RawTable& raw, std::span<const std::size_t> fit_on) {
  if (fit_on.empty()) throw DomainError("preprocess: no rows to fit normalization on");
  const std::size_t n = raw.rows();
  for (std::size_t i : fit_on) {
    if (i >= n) throw ShapeError("preprocess: fit index out of range");
  }

  std::vector<std::string> names;
  std::vector<Vector> columns;
  for (const RawColumn& col : raw.columns) {
    if (col.spec.kind == ColumnKind::kNumeric) {
      names.push_back(col.spec.name);
      columns.push_back(col.numeric);
      continue;
    }
    std::set<std::string> categories;
    for (std::size_t i : fit_on) categories.insert(col.strings[i]);
    for (const auto& cat : categories) {
      Vector ind(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) ind[i] = col.strings[i] == cat ? 1.0 : 0.0;
      names.push_back(col.spec.name + "=" + cat);
      columns.push_back(std::move(ind));
    }
  }

  Dataset ds;
  std::vector<std::size_t> keep;
  const double m = static_cast<double>(fit_on.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    double mean = 0.0;
    for (std::size_t i : fit_on) mean += columns[c][i];
    mean /= m;
    double var = 0.0;
    for (std::size_t i : fit_on) var += (columns[c][i] - mean) * (columns[c][i] - mean);
    const double sd = std::sqrt(var / m);
    if (!(sd > 0.0)) {
      ds.warnings.push_back("dropped zero-variance column '" + names[c] + "'");
      continue;
    }
    keep.push_back(c);
    ds.normalization.push_back({mean, sd});
  }
  if (keep.empty()) throw DataError("every feature column is constant on the training rows");

  ds.x = Matrix(n, keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const Vector& src = columns[keep[k]];
    const ColumnStats& s = ds.normalization[k];
    for (std::size_t i = 0; i < n; ++i) ds.x(i, k) = (src[i] - s.mean) / s.std;
    ds.feature_names.push_back(names[keep[k]]);
  }
  ds.y = raw.y;
  ds.a = raw.a;
  return ds;
}

SplitIndices split_indices(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie strictly between 0 and 1");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng = Rng::stream(seed, kSplitStream);
  rng.shuffle(std::span<std::size_t>(perm));
  // The epsilon keeps products such as 10 * 0.3 = 3.0000000000000004 and
  // 10 * 0.7 = 6.999... on the intended integer.
  const auto n_test =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction + 1e-9));
  SplitIndices out;
  out.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double test_fraction,
                                  std::uint64_t seed) {
  const SplitIndices idx = split_indices(dataset.size(), test_fraction, seed);
  std::pair<Dataset, Dataset> parts{dataset.subset(idx.train), dataset.subset(idx.test)};
  for (auto* part : {&parts.first, &parts.second}) {
    const char* which = part == &parts.first ? "train" : "test";
    for (int g : {0, 1}) {
      if (part->group_count(g) == 0) {
        part->warnings.push_back(std::string(which) + " split has no rows of group " +
                                 std::to_string(g));
      }
    }
  }
  return parts;
}

void SyntheticSpec::validate() const {
  if (n0 == 0 || n1 == 0) throw ConfigError("synthetic: n_per_group entries must be positive");
  if (feature_dim == 0) throw ConfigError("synthetic: feature_dim must be positive");
  for (double s : {label_scale0, label_scale1, noise_scale0, noise_scale1}) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("synthetic: scales must be positive");
  }
  if (!std::isfinite(label_mean_shift)) throw ConfigError("synthetic: label_mean_shift not finite");
  if (noise_proxy_shift && !std::isfinite(*noise_proxy_shift)) {
    throw ConfigError("synthetic: noise_proxy_shift not finite");
  }
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng = Rng::stream(spec.seed, kSyntheticStream);
  const std::size_t d = spec.feature_dim;
  Vector w(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& v : w) {
      v = rng.normal();
      norm += v * v;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& v : w) v /= norm;

  const bool proxy = spec.noise_proxy_shift.has_value();
  const std::size_t n = spec.n0 + spec.n1;
  Dataset ds;
  ds.x = Matrix(n, d + (proxy ? 1 : 0));
  ds.y.resize(n);
  ds.a.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int g = i < spec.n0 ? 0 : 1;
    const double scale = g == 0 ? spec.label_scale0 : spec.label_scale1;
    const double shift = g == 0 ? 0.0 : spec.label_mean_shift;
    const double sigma = g == 0 ? spec.noise_scale0 : spec.noise_scale1;
    double signal = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      ds.x(i, j) = rng.normal();
      signal += w[j] * ds.x(i, j);
    }
    const double noise = sigma * rng.normal();
    ds.y[i] = scale * signal + shift + noise;
    ds.a[i] = g;
    if (proxy) {
      const double jitter = rng.normal();
      ds.x(i, d) = g == 0 ? noise + 0.1 * sigma * jitter : *spec.noise_proxy_shift + sigma * jitter;
    }
  }
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  if (proxy) ds.feature_names.push_back("proxy");
  return ds;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset) {
  dataset.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  std::ostringstream buf;
  for (std::size_t j = 0; j < dataset.x.cols(); ++j) {
    const std::string name =
        j < dataset.feature_names.size() ? dataset.feature_names[j] : "x" + std::to_string(j);
    buf << quote_if_needed(name) << ',';
  }
  buf << "y,a\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t j = 0; j < dataset.x.cols(); ++j) buf << format_double(dataset.x(i, j)) << ',';
    buf << format_double(dataset.y[i]) << ',' << dataset.a[i] << '\n';
  }
  out << buf.str();
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

Dataset read_dataset_csv(const std::filesystem::path& path, const std::string& target,
                         const std::string& group) {
  DatasetSchema schema;
  schema.target = target;
  schema.group = group;
  RawTable raw = load_csv(path, schema);
  Dataset ds;
  ds.x = Matrix(raw.rows(), raw.columns.size());
  for (std::size_t j = 0; j < raw.columns.size(); ++j) {
    const RawColumn& col = raw.columns[j];
    if (col.spec.kind != ColumnKind::kNumeric) {
      throw DataError("'" + path.string() + "': column '" + col.spec.name + "' is not numeric");
    }
    for (std::size_t i = 0; i < raw.rows(); ++i) ds.x(i, j) = col.numeric[i];
    ds.feature_names.push_back(col.spec.name);
  }
  ds.y = std::move(raw.y);
  ds.a = std::move(raw.a);
  return ds;
}

}  // namespace fairreg
