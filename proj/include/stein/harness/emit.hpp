#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "stein/error.hpp"
#include "stein/harness/experiment.hpp"

// Record persistence. CSV carries the fixed column set; JSON carries every
// field of a record and round-trips exactly.

namespace stein::harness {

inline constexpr int kRecordSchema = 1;

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "model",        "n",           "replications",        "seed",
      "delta_hat",    "delta_se_proxy", "bound_total",      "bound_variance_term",
      "bound_third_moment_term", "sigma2", "sigma2_provenance", "variance_level",
      "modulo_C",     "wall_ms"};
  return cols;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw IoError("bad number '" + s + "'");
  }
  if (used != s.size()) throw IoError("bad number '" + s + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw IoError("bad integer '" + s + "'");
  }
  if (used != s.size()) throw IoError("bad integer '" + s + "'");
  return v;
}

inline std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

inline std::string to_csv(const std::vector<ExperimentRecord>& records) {
  std::ostringstream out;
  const auto& cols = csv_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << "\n";
  for (const auto& r : records) {
    out << r.model << ',' << r.n << ',' << r.replications << ',' << r.seed << ',' << detail::fmt(r.delta.w1) << ','
        << detail::fmt(r.delta_se_proxy) << ',' << detail::fmt(r.bound.total) << ','
        << detail::fmt(r.bound.variance_term) << ',' << detail::fmt(r.bound.third_moment_term) << ','
        << detail::fmt(r.sigma2) << ',' << to_string(r.sigma2_provenance) << ','
        << to_string(r.bound.variance_level) << ',' << (r.bound.modulo_constant ? "true" : "false") << ','
        << detail::fmt(r.wall_ms) << "\n";
  }
  return out.str();
}

/// Parses the CSV columns back; fields outside the column set keep defaults.
inline std::vector<ExperimentRecord> from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty records file");
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  if (header != csv_columns()) throw IoError("unexpected CSV header");
  std::vector<ExperimentRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream l(line);
    std::string cell;
    while (std::getline(l, cell, ',')) f.push_back(cell);
    if (f.size() != header.size()) throw IoError("wrong field count on line " + std::to_string(lineno));
    ExperimentRecord r;
    r.model = f[0];
    r.n = detail::parse_u64(f[1]);
    r.replications = detail::parse_u64(f[2]);
    r.seed = detail::parse_u64(f[3]);
    r.delta.w1 = detail::parse_double(f[4]);
    r.delta.sample_size = r.replications;
    r.delta_se_proxy = detail::parse_double(f[5]);
    r.bound.total = detail::parse_double(f[6]);
    r.bound.variance_term = detail::parse_double(f[7]);
    r.bound.third_moment_term = detail::parse_double(f[8]);
    r.sigma2 = detail::parse_double(f[9]);
    r.sigma2_provenance = parse_provenance(f[10]);
    r.bound.variance_level = parse_variance_level(f[11]);
    if (f[12] != "true" && f[12] != "false") throw IoError("bad modulo_C on line " + std::to_string(lineno));
    r.bound.modulo_constant = f[12] == "true";
    r.wall_ms = detail::parse_double(f[13]);
    out.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::json to_json_value(const ExperimentRecord& r) {
  return {{"model", r.model},
          {"n", r.n},
          {"replications", r.replications},
          {"seed", r.seed},
          {"delta_hat", r.delta.w1},
          {"delta_sample_size", r.delta.sample_size},
          {"standardization", to_string(r.delta.standardization)},
          {"mean_used", r.delta.mean_used},
          {"std_used", r.delta.std_used},
          {"delta_se_proxy", r.delta_se_proxy},
          {"bound_total", r.bound.total},
          {"bound_variance_term", r.bound.variance_term},
          {"bound_third_moment_term", r.bound.third_moment_term},
          {"bound_sigma2", r.bound.sigma2},
          {"variance_level", to_string(r.bound.variance_level)},
          {"modulo_C", r.bound.modulo_constant},
          {"constant_C", r.bound.constant_C},
          {"sigma2", r.sigma2},
          {"sigma2_provenance", to_string(r.sigma2_provenance)},
          {"wall_ms", r.wall_ms},
          {"fingerprint", detail::hex64(r.fingerprint)}};
}

inline std::string to_json(const std::vector<ExperimentRecord>& records) {
  nlohmann::json doc = {{"schema_version", kRecordSchema}, {"records", nlohmann::json::array()}};
  for (const auto& r : records) doc["records"].push_back(to_json_value(r));
  return doc.dump(2) + "\n";
}

inline std::vector<ExperimentRecord> from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("records JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("schema_version", -1) != kRecordSchema)
    throw IoError("records JSON has an unsupported schema_version");
  std::vector<ExperimentRecord> out;
  try {
    for (const auto& j : doc.at("records")) {
      ExperimentRecord r;
      r.model = j.at("model").get<std::string>();
      r.n = j.at("n").get<std::size_t>();
      r.replications = j.at("replications").get<std::size_t>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.delta.w1 = j.at("delta_hat").get<double>();
      r.delta.sample_size = j.at("delta_sample_size").get<std::size_t>();
      r.delta.standardization = j.at("standardization").get<std::string>() == "known_moments"
                                    ? StandardizationMode::known_moments
                                    : StandardizationMode::empirical_moments;
      r.delta.mean_used = j.at("mean_used").get<double>();
      r.delta.std_used = j.at("std_used").get<double>();
      r.delta_se_proxy = j.at("delta_se_proxy").get<double>();
      r.bound.total = j.at("bound_total").get<double>();
      r.bound.variance_term = j.at("bound_variance_term").get<double>();
      r.bound.third_moment_term = j.at("bound_third_moment_term").get<double>();
      r.bound.sigma2 = j.at("bound_sigma2").get<double>();
      r.bound.variance_level = parse_variance_level(j.at("variance_level").get<std::string>());
      r.bound.modulo_constant = j.at("modulo_C").get<bool>();
      r.bound.constant_C = j.at("constant_C").get<double>();
      r.sigma2 = j.at("sigma2").get<double>();
      r.sigma2_provenance = parse_provenance(j.at("sigma2_provenance").get<std::string>());
      r.wall_ms = j.at("wall_ms").get<double>();
      r.fingerprint = std::stoull(j.at("fingerprint").get<std::string>(), nullptr, 16);
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("records JSON: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(e.what());
  }
  return out;
}

inline std::string emit(const std::vector<ExperimentRecord>& records, const std::string& format) {
  if (format == "csv") return to_csv(records);
  if (format == "json") return to_json(records);
  throw ConfigError("unknown output format '" + format + "'");
}

/// Detects the format from the first non-blank character.
inline std::vector<ExperimentRecord> parse_records(const std::string& text) {
  const auto pos = text.find_first_not_of(" \t\r\n");
  if (pos != std::string::npos && text[pos] == '{') return from_json(text);
  return from_csv(text);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline bool operator==(const ExperimentRecord& a, const ExperimentRecord& b) {
  return a.model == b.model && a.n == b.n && a.replications == b.replications && a.seed == b.seed &&
         a.delta.w1 == b.delta.w1 && a.delta.sample_size == b.delta.sample_size &&
         a.delta.standardization == b.delta.standardization && a.delta.mean_used == b.delta.mean_used &&
         a.delta.std_used == b.delta.std_used && a.delta_se_proxy == b.delta_se_proxy &&
         a.bound.total == b.bound.total && a.bound.variance_term == b.bound.variance_term &&
         a.bound.third_moment_term == b.bound.third_moment_term && a.bound.sigma2 == b.bound.sigma2 &&
         a.bound.variance_level == b.bound.variance_level && a.bound.modulo_constant == b.bound.modulo_constant &&
         a.bound.constant_C == b.bound.constant_C && a.sigma2 == b.sigma2 &&
         a.sigma2_provenance == b.sigma2_provenance && a.wall_ms == b.wall_ms && a.fingerprint == b.fingerprint;
}

}  // namespace stein::harness
