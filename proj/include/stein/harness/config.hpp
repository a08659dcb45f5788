#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stein/error.hpp"
#include "stein/stein_t.hpp"

// Experiment configuration: an INI-style file with top-level keys followed by
// [model], [bound] and [output] blocks. See README for the grammar.

namespace stein::harness {

inline constexpr int kConfigSchema = 1;

enum class ModelKind { rademacher_sum, quadratic_form, occupancy, coverage, nearest_neighbor };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::rademacher_sum: return "rademacher_sum";
    case ModelKind::quadratic_form: return "quadratic_form";
    case ModelKind::occupancy: return "occupancy";
    case ModelKind::coverage: return "coverage";
    case ModelKind::nearest_neighbor: return "nearest_neighbor";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  for (auto k : {ModelKind::rademacher_sum, ModelKind::quadratic_form, ModelKind::occupancy,
                 ModelKind::coverage, ModelKind::nearest_neighbor})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown model kind '" + s + "'");
}

struct ModelBlock {
  ModelKind kind = ModelKind::rademacher_sum;
  // quadratic_form
  std::string matrix = "block";  // block | goe
  // occupancy
  double alpha = 1.0;
  // coverage and nearest_neighbor
  std::size_t dimension = 2;
  // coverage: eps = epsilon_scale * n^{-1/dimension}
  double epsilon_scale = 1.0;
  std::string estimator = "grid";  // grid | monte_carlo
  std::size_t resolution = 1024;
  std::size_t probes = 100000;
  std::uint64_t probe_seed = 0x5eed;
  // nearest_neighbor
  std::size_t k = 2;
  std::string functional = "kth_within_radius";
  double radius_scale = 1.0;  // radius = radius_scale * n^{-1/dimension}
  double p_moment = 0.0;      // 0 means infinity (bounded summands)
  // Raw key/value pairs as written, for the fingerprint.
  std::map<std::string, std::string> raw;
};

struct BoundOptions {
  std::string method = "auto";  // auto | theorem22
  VarianceLevel variance_level = VarianceLevel::given_X;
  double constant_C = 1.0;
  std::size_t outer_reps = 200;
  std::size_t inner_reps = 100;
  std::size_t third_moment_reps = 2000;
};

struct OutputOptions {
  std::string path;           // empty: standard output
  std::string format = "csv";  // csv | json
  bool timing = true;         // false writes wall_ms = 0 for byte-stable reruns
};

struct ExperimentConfig {
  int schema = kConfigSchema;
  std::uint64_t seed = 1;
  std::size_t replications = 10000;
  std::vector<std::size_t> n_grid;
  unsigned threads = 1;
  std::size_t bootstrap_resamples = 200;
  ModelBlock model;
  BoundOptions bound;
  OutputOptions output;
};

inline void validate(const ExperimentConfig& c) {
  if (c.schema != kConfigSchema) throw ConfigError("unsupported config schema " + std::to_string(c.schema));
  if (c.n_grid.empty()) throw ConfigError("n_grid must not be empty");
  for (std::size_t i = 1; i < c.n_grid.size(); ++i)
    if (c.n_grid[i] <= c.n_grid[i - 1]) throw ConfigError("n_grid must be strictly increasing");
  if (c.n_grid.front() == 0) throw ConfigError("n_grid entries must be positive");
  if (c.replications < 100) throw ConfigError("replications must be at least 100");
  if (c.bootstrap_resamples < 2) throw ConfigError("bootstrap_resamples must be at least 2");
  if (c.threads == 0) throw ConfigError("threads must be positive");
  if (c.output.format != "csv" && c.output.format != "json")
    throw ConfigError("output format must be csv or json");
  if (c.bound.method != "auto" && c.bound.method != "theorem22")
    throw ConfigError("bound method must be auto or theorem22");
  if (c.bound.variance_level != VarianceLevel::given_X)
    throw ConfigError("only the given_X variance level has an estimator");
  if (!(c.bound.constant_C > 0.0)) throw ConfigError("constant_C must be positive");
  if (c.bound.outer_reps < 2 || c.bound.inner_reps < 2 || c.bound.third_moment_reps < 2)
    throw ConfigError("bound replication counts must be at least 2");
  const auto& m = c.model;
  if (m.matrix != "block" && m.matrix != "goe") throw ConfigError("matrix must be block or goe");
  if (!(m.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (m.kind == ModelKind::coverage || m.kind == ModelKind::nearest_neighbor) {
    if (m.dimension < 1 || m.dimension > 3) throw ConfigError("dimension must be 1, 2 or 3");
    if (m.estimator != "grid" && m.estimator != "monte_carlo")
      throw ConfigError("estimator must be grid or monte_carlo");
    if (m.resolution == 0 || m.probes == 0) throw ConfigError("estimator budget must be positive");
    if (!(m.epsilon_scale > 0.0) || !(m.radius_scale > 0.0)) throw ConfigError("scales must be positive");
  }
  if (m.kind == ModelKind::nearest_neighbor) {
    if (m.k == 0) throw ConfigError("k must be at least 1");
    if (m.dimension > 2) throw ConfigError("nearest-neighbor models support dimension 1 or 2");
    if (m.p_moment != 0.0 && m.p_moment < 8.0) throw ConfigError("p_moment must be 0 (infinity) or >= 8");
  }
}

namespace detail {

template <class T>
T get_as(const boost::property_tree::ptree& t, const std::string& key, T fallback) {
  const auto v = t.get_optional<std::string>(key);
  if (!v) return fallback;
  std::istringstream in(*v);
  T out{};
  in >> out;
  if (in.fail() || !(in >> std::ws).eof()) throw ConfigError("bad value for '" + key + "': '" + *v + "'");
  return out;
}

inline std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    std::istringstream one(item);
    long long v = 0;
    if (!(one >> v) || !(one >> std::ws).eof() || v <= 0) throw ConfigError("bad n_grid entry '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("bad boolean '" + s + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  boost::property_tree::ptree t;
  try {
    boost::property_tree::read_ini(in, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  static const std::vector<std::string> top = {"schema", "seed", "replications", "n_grid", "threads",
                                               "bootstrap_resamples"};
  static const std::map<std::string, std::vector<std::string>> blocks = {
      {"model",
       {"kind", "matrix", "alpha", "dimension", "epsilon_scale", "estimator", "resolution", "probes",
        "probe_seed", "k", "functional", "radius_scale", "p_moment"}},
      {"bound", {"method", "variance_level", "constant_C", "outer_reps", "inner_reps", "third_moment_reps"}},
      {"output", {"path", "format", "timing"}}};
  for (const auto& [key, child] : t) {
    const auto b = blocks.find(key);
    if (child.empty() && b == blocks.end()) {
      if (std::find(top.begin(), top.end(), key) == top.end()) throw ConfigError("unknown key '" + key + "'");
      continue;
    }
    if (b == blocks.end()) throw ConfigError("unknown block [" + key + "]");
    for (const auto& [k, v] : child)
      if (std::find(b->second.begin(), b->second.end(), k) == b->second.end())
        throw ConfigError("unknown key '" + k + "' in [" + key + "]");
  }

  ExperimentConfig c;
  c.schema = detail::get_as<int>(t, "schema", kConfigSchema);
  c.seed = detail::get_as<std::uint64_t>(t, "seed", c.seed);
  c.replications = detail::get_as<std::size_t>(t, "replications", c.replications);
  c.threads = detail::get_as<unsigned>(t, "threads", c.threads);
  c.bootstrap_resamples = detail::get_as<std::size_t>(t, "bootstrap_resamples", c.bootstrap_resamples);
  if (const auto g = t.get_optional<std::string>("n_grid")) c.n_grid = detail::parse_size_list(*g);

  const auto empty = boost::property_tree::ptree{};
  const auto& m = t.get_child("model", empty);
  if (!m.get_optional<std::string>("kind")) throw ConfigError("[model] needs a kind");
  auto& mb = c.model;
  mb.kind = parse_model_kind(m.get<std::string>("kind"));
  mb.matrix = m.get<std::string>("matrix", mb.matrix);
  mb.alpha = detail::get_as<double>(m, "alpha", mb.alpha);
  mb.dimension = detail::get_as<std::size_t>(m, "dimension", mb.dimension);
  mb.epsilon_scale = detail::get_as<double>(m, "epsilon_scale", mb.epsilon_scale);
  mb.estimator = m.get<std::string>("estimator", mb.estimator);
  mb.resolution = detail::get_as<std::size_t>(m, "resolution", mb.resolution);
  mb.probes = detail::get_as<std::size_t>(m, "probes", mb.probes);
  mb.probe_seed = detail::get_as<std::uint64_t>(m, "probe_seed", mb.probe_seed);
  mb.k = detail::get_as<std::size_t>(m, "k", mb.k);
  mb.functional = m.get<std::string>("functional", mb.functional);
  mb.radius_scale = detail::get_as<double>(m, "radius_scale", mb.radius_scale);
  mb.p_moment = detail::get_as<double>(m, "p_moment", mb.p_moment);
  for (const auto& [k, v] : m) mb.raw[k] = v.data();

  const auto& b = t.get_child("bound", empty);
  c.bound.method = b.get<std::string>("method", c.bound.method);
  if (const auto v = b.get_optional<std::string>("variance_level")) {
    try {
      c.bound.variance_level = parse_variance_level(*v);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  c.bound.constant_C = detail::get_as<double>(b, "constant_C", c.bound.constant_C);
  c.bound.outer_reps = detail::get_as<std::size_t>(b, "outer_reps", c.bound.outer_reps);
  c.bound.inner_reps = detail::get_as<std::size_t>(b, "inner_reps", c.bound.inner_reps);
  c.bound.third_moment_reps = detail::get_as<std::size_t>(b, "third_moment_reps", c.bound.third_moment_reps);

  const auto& o = t.get_child("output", empty);
  c.output.path = o.get<std::string>("path", c.output.path);
  c.output.format = o.get<std::string>("format", c.output.format);
  if (const auto v = o.get_optional<std::string>("timing")) c.output.timing = detail::parse_bool(*v);

  validate(c);
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in);
}

/// FNV-1a over the model block's sorted key=value lines.
inline std::uint64_t model_fingerprint(const ModelBlock& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : m.raw) feed(k + "=" + v + "\n");
  return h;
}

}  // namespace stein::harness
