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

#include "experiment.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "fairreg/error.hpp"

namespace fairreg::cli {

namespace {

// Reads one JSON object, remembering which keys were consumed so that
// typos surface as errors instead of silently falling back to defaults.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& field, const std::string& msg) {
    throw ConfigError(field + ": " + msg);
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    return as_number(*v, field(key));
  }

  std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    return as_uint(*v, field(key));
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(field(key), "expected a string");
    return v->get<std::string>();
  }

  std::vector<std::size_t> widths(const std::string& key, std::vector<std::size_t> fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_array()) fail(field(key), "expected an array of layer widths");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(as_uint((*v)[i], field(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  // A pair given either as [x0, x1] or as one number used for both.
  std::pair<double, double> pair(const std::string& key, std::pair<double, double> fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (v->is_number()) {
      const double x = as_number(*v, field(key));
      return {x, x};
    }
    if (!v->is_array() || v->size() != 2) fail(field(key), "expected a number or a pair");
    return {as_number((*v)[0], field(key) + "[0]"), as_number((*v)[1], field(key) + "[1]")};
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
  }

  static std::uint64_t as_uint(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) fail(where, "must be non-negative");
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d == std::floor(d) && d < 9.007199254740992e15) {
        return static_cast<std::uint64_t>(d);
      }
    }
    fail(where, "expected a non-negative integer");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Activation parse_activation(const std::string& s, const std::string& where) {
  if (s == "relu") return Activation::kReLU;
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "identity") return Activation::kIdentity;
  Section::fail(where, "unknown activation '" + s + "'");
}

OptimizerKind parse_optimizer(const std::string& s, const std::string& where) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adadelta") return OptimizerKind::kAdadelta;
  Section::fail(where, "unknown optimizer '" + s + "' (expected sgd or adadelta)");
}

MissingPolicy parse_missing(const std::string& s, const std::string& where) {
  if (s == "drop") return MissingPolicy::kDrop;
  if (s == "mean_impute") return MissingPolicy::kMeanImpute;
  Section::fail(where, "unknown policy '" + s + "' (expected drop or mean_impute)");
}

SyntheticSpec parse_synthetic(const json& j, const std::string& path) {
  Section s(j, path);
  SyntheticSpec spec;
  const auto n = s.get("n_per_group");
  if (n) {
    if (n->is_array()) {
      if (n->size() != 2) Section::fail(s.field("n_per_group"), "expected two counts");
      spec.n0 = Section::as_uint((*n)[0], s.field("n_per_group") + "[0]");
      spec.n1 = Section::as_uint((*n)[1], s.field("n_per_group") + "[1]");
    } else {
      spec.n0 = spec.n1 = Section::as_uint(*n, s.field("n_per_group"));
    }
  }
  spec.feature_dim = s.uint("feature_dim", spec.feature_dim);
  spec.label_mean_shift = s.number("label_mean_shift", spec.label_mean_shift);
  std::tie(spec.label_scale0, spec.label_scale1) =
      s.pair("label_scale", {spec.label_scale0, spec.label_scale1});
  std::tie(spec.noise_scale0, spec.noise_scale1) =
      s.pair("conditional_noise_scale", {spec.noise_scale0, spec.noise_scale1});
  spec.seed = s.uint("seed", spec.seed);
  if (const json* v = s.get("noise_proxy_shift"); v && !v->is_null()) {
    spec.noise_proxy_shift = Section::as_number(*v, s.field("noise_proxy_shift"));
  }
  s.finish();
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    Section::fail(path, e.what());
  }
  return spec;
}

DatasetSource parse_dataset(const json& j, const std::filesystem::path& base_dir) {
  Section s(j, "dataset");
  DatasetSource src;
  const bool has_path = s.has("path");
  const bool has_synth = s.has("synthetic");
  if (has_path == has_synth) {
    Section::fail("dataset", "exactly one of 'path' and 'synthetic' must be given");
  }
  if (has_synth) {
    src.synthetic = parse_synthetic(*s.get("synthetic"), "dataset.synthetic");
    s.finish();
    return src;
  }
  const std::filesystem::path p = s.string("path", "");
  if (p.empty()) Section::fail("dataset.path", "must not be empty");
  src.path = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  src.schema.target = s.string("target", "");
  src.schema.group = s.string("group", "");
  src.schema.missing = parse_missing(s.string("missing", "drop"), "dataset.missing");
  if (const json* f = s.get("features")) {
    if (!f->is_array()) Section::fail("dataset.features", "expected an array");
    for (std::size_t i = 0; i < f->size(); ++i) {
      const std::string where = "dataset.features[" + std::to_string(i) + "]";
      ColumnSpec col;
      if ((*f)[i].is_string()) {
        col.name = (*f)[i].get<std::string>();
      } else {
        Section fs((*f)[i], where);
        col.name = fs.string("name", "");
        const std::string kind = fs.string("kind", "numeric");
        if (kind == "categorical") {
          col.kind = ColumnKind::kCategorical;
        } else if (kind != "numeric") {
          Section::fail(where + ".kind", "expected numeric or categorical");
        }
        fs.finish();
      }
      src.schema.features.push_back(col);
    }
  }
  s.finish();
  try {
    src.schema.validate();
  } catch (const ConfigError& e) {
    Section::fail("dataset", e.what());
  }
  return src;
}

RunConfig parse_run(const json& j) {
  Section s(j, "run");
  RunConfig run;
  try {
    run.algorithm = parse_algorithm(s.string("algorithm", std::string(to_string(run.algorithm))));
  } catch (const ConfigError& e) {
    Section::fail("run.algorithm", e.what());
  }
  run.lambda = s.number("lambda", run.lambda);
  run.epochs = s.uint("epochs", run.epochs);
  run.batch_size = s.uint("batch_size", run.batch_size);
  run.clip_c = s.number("clip", run.clip_c);
  run.seed = s.uint("seed", run.seed);
  run.y_bins = s.uint("y_bins", run.y_bins);
  run.tv_bins = s.uint("tv_bins", run.tv_bins);
  if (const json* o = s.get("optimizer")) {
    Section os(*o, "run.optimizer");
    run.optimizer.kind = parse_optimizer(
        os.string("kind", std::string(to_string(run.optimizer.kind))), "run.optimizer.kind");
    run.optimizer.learning_rate = os.number("learning_rate", run.optimizer.learning_rate);
    run.optimizer.rho = os.number("rho", run.optimizer.rho);
    run.optimizer.eps = os.number("eps", run.optimizer.eps);
    os.finish();
  }
  if (const json* a = s.get("architecture")) {
    Section as(*a, "run.architecture");
    Architecture& arch = run.architecture;
    arch.feature_hidden = as.widths("feature_hidden", arch.feature_hidden);
    arch.head_hidden = as.widths("head_hidden", arch.head_hidden);
    arch.adversary_hidden = as.widths("adversary_hidden", arch.adversary_hidden);
    arch.head_output =
        parse_activation(as.string("head_output", std::string(to_string(arch.head_output))),
                         "run.architecture.head_output");
    as.finish();
  }
  s.finish();
  return run;
}

SweepConfig parse_sweep(const json& j) {
  Section s(j, "sweep");
  SweepConfig sw;
  const json* l = s.get("lambdas");
  if (!l || !l->is_array() || l->empty()) Section::fail("sweep.lambdas", "expected a non-empty array");
  for (std::size_t i = 0; i < l->size(); ++i) {
    sw.lambdas.push_back(Section::as_number((*l)[i], "sweep.lambdas[" + std::to_string(i) + "]"));
  }
  const json* sd = s.get("seeds");
  if (!sd || !sd->is_array() || sd->empty()) Section::fail("sweep.seeds", "expected a non-empty array");
  for (std::size_t i = 0; i < sd->size(); ++i) {
    sw.seeds.push_back(Section::as_uint((*sd)[i], "sweep.seeds[" + std::to_string(i) + "]"));
  }
  sw.jobs = s.uint("jobs", sw.jobs);
  s.finish();
  return sw;
}

json widths_json(const std::vector<std::size_t>& w) {
  json out = json::array();
  for (std::size_t v : w) out.push_back(v);
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (dataset.path.has_value() == dataset.synthetic.has_value()) {
    throw ConfigError("dataset: exactly one of 'path' and 'synthetic' must be given");
  }
  if (dataset.synthetic) dataset.synthetic->validate();
  if (dataset.path) dataset.schema.validate();
  if (!(split.test_fraction > 0.0 && split.test_fraction < 1.0)) {
    throw ConfigError("split.test_fraction must lie strictly between 0 and 1");
  }
  run.validate();
  if (sweep) {
    if (sweep->lambdas.empty()) throw ConfigError("sweep.lambdas must not be empty");
    if (sweep->seeds.empty()) throw ConfigError("sweep.seeds must not be empty");
    for (std::size_t i = 0; i < sweep->lambdas.size(); ++i) {
      const double l = sweep->lambdas[i];
      if (!std::isfinite(l) || l < 0.0) {
        throw ConfigError("sweep.lambdas[" + std::to_string(i) + "] must be >= 0");
      }
    }
    if (sweep->jobs == 0) throw ConfigError("sweep.jobs must be positive");
  }
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  Section s(doc, "");
  ExperimentConfig cfg;
  const json* d = s.get("dataset");
  if (!d) Section::fail("dataset", "missing");
  cfg.dataset = parse_dataset(*d, base_dir);
  if (const json* sp = s.get("split")) {
    Section ss(*sp, "split");
    cfg.split.test_fraction = ss.number("test_fraction", cfg.split.test_fraction);
    cfg.split.seed = ss.uint("seed", cfg.split.seed);
    ss.finish();
  }
  if (const json* r = s.get("run")) cfg.run = parse_run(*r);
  if (const json* sw = s.get("sweep")) cfg.sweep = parse_sweep(*sw);
  cfg.output_dir = s.string("output_dir", "");
  s.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    // The library message already carries "line L, column C".
    std::string msg = e.what();
    const auto pos = msg.find("parse error");
    throw ConfigError(path.string() + ": " + (pos == std::string::npos ? msg : msg.substr(pos)));
  }
  try {
    return parse_config(doc, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const SyntheticSpec& spec) {
  json j;
  j["n_per_group"] = {spec.n0, spec.n1};
  j["feature_dim"] = spec.feature_dim;
  j["label_mean_shift"] = spec.label_mean_shift;
  j["label_scale"] = {spec.label_scale0, spec.label_scale1};
  j["conditional_noise_scale"] = {spec.noise_scale0, spec.noise_scale1};
  j["seed"] = spec.seed;
  j["noise_proxy_shift"] =
      spec.noise_proxy_shift ? json(*spec.noise_proxy_shift) : json(nullptr);
  return j;
}

json to_json(const ExperimentConfig& config) {
  json j;
  json& d = j["dataset"];
  if (config.dataset.synthetic) {
    d["synthetic"] = to_json(*config.dataset.synthetic);
  } else {
    const DatasetSchema& sc = config.dataset.schema;
    d["path"] = config.dataset.path->generic_string();
    d["target"] = sc.target;
    d["group"] = sc.group;
    d["missing"] = sc.missing == MissingPolicy::kDrop ? "drop" : "mean_impute";
    if (!sc.features.empty()) {
      json f = json::array();
      for (const auto& c : sc.features) {
        f.push_back({{"name", c.name},
                     {"kind", c.kind == ColumnKind::kNumeric ? "numeric" : "categorical"}});
      }
      d["features"] = f;
    }
  }
  j["split"] = {{"test_fraction", config.split.test_fraction}, {"seed", config.split.seed}};
  const RunConfig& r = config.run;
  j["run"] = {
      {"algorithm", to_string(r.algorithm)},
      {"lambda", r.lambda},
      {"epochs", r.epochs},
      {"batch_size", r.batch_size},
      {"clip", r.clip_c},
      {"seed", r.seed},
      {"y_bins", r.y_bins},
      {"tv_bins", r.tv_bins},
      {"optimizer",
       {{"kind", to_string(r.optimizer.kind)},
        {"learning_rate", r.optimizer.learning_rate},
        {"rho", r.optimizer.rho},
        {"eps", r.optimizer.eps}}},
      {"architecture",
       {{"feature_hidden", widths_json(r.architecture.feature_hidden)},
        {"head_hidden", widths_json(r.architecture.head_hidden)},
        {"adversary_hidden", widths_json(r.architecture.adversary_hidden)},
        {"head_output", to_string(r.architecture.head_output)}}},
  };
  if (config.sweep) {
    j["sweep"] = {{"lambdas", config.sweep->lambdas},
                  {"seeds", config.sweep->seeds},
                  {"jobs", config.sweep->jobs}};
  }
  return j;
}

json to_json(const FeasibleRegion& region) {
  json v = json::array();
  for (const Point& p : region.vertices) v.push_back({p.e0, p.e1});
  return {{"gap_width", region.a_gap},
          {"joint_level", region.b_joint},
          {"err_cap", region.err_cap},
          {"vertices", v}};
}

json to_json(const Evaluation& e) {
  const MetricsReport& m = e.metrics;
  json metrics = {{"err0", m.err0},
                  {"err1", m.err1},
                  {"err_gap", m.err_gap},
                  {"r2", m.r2},
                  {"w1_labels", m.w1_labels},
                  {"w1_preds", m.w1_preds},
                  {"tv_labels", m.tv_labels}};
  metrics["accuracy"] = m.accuracy ? json(*m.accuracy) : json(nullptr);
  const BoundContext& c = e.context;
  json bounds = {{"lower_bound_joint", e.lower_bound},
                 {"lower_bound_weighted", e.lower_bound_weighted},
                 {"upper_bound_gap", e.upper_bound},
                 {"m_bound", c.m_bound},
                 {"alpha", c.alpha},
                 {"cond_discrepancy", c.cond_discrepancy}};
  return {{"metrics", metrics}, {"bounds", bounds}};
}

std::pair<Dataset, Dataset> load_experiment_data(const ExperimentConfig& config) {
  if (config.dataset.synthetic) {
    return split(gen_synthetic(*config.dataset.synthetic), config.split.test_fraction,
                 config.split.seed);
  }
  const RawTable raw = load_csv(*config.dataset.path, config.dataset.schema);
  const SplitIndices idx =
      split_indices(raw.rows(), config.split.test_fraction, config.split.seed);
  if (idx.train.empty()) throw DataError("split leaves no training rows");
  const Dataset full = preprocess(raw, idx.train);
  // Same seed, same partition as idx.
  auto parts = split(full, config.split.test_fraction, config.split.seed);
  parts.first.warnings.insert(parts.first.warnings.begin(), full.warnings.begin(),
                              full.warnings.end());
  return parts;
}

}  // namespace fairreg::cli
