#pragma once

// Flat JSON run configuration. Every key is typed and validated up front;
// errors name the offending key. See run_config_schema() for the key list.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "scanstat/block_factor.hpp"
#include "scanstat/distribution.hpp"
#include "scanstat/errors.hpp"
#include "scanstat/parallel.hpp"
#include "scanstat/pipeline.hpp"

namespace scanstat {

struct RunConfig {
  std::string model = "minesweeper";  // minesweeper | identity | ma
  std::string distribution = "bernoulli";
  double p = 0.5;
  std::int64_t trials = 1;
  double mean = 0.0;
  double variance = 1.0;
  std::vector<double> coeffs;
  // Source lattice size; alternatively the derived size via cols / rows.
  std::size_t source_cols = 0;
  std::size_t source_rows = 0;
  std::size_t m1 = 3;
  std::size_t m2 = 3;
  std::vector<double> thresholds;
  std::uint64_t iter = 100000;
  std::uint64_t sim_replicas = 100000;
  std::uint64_t seed = 0;
  double confidence_z = 1.96;
  LSelection l_mode = LSelection::boundary;
  unsigned threads = 1;
  std::string output;
};

inline const char* run_config_schema() {
  return R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "scanstat run configuration",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "model": {"enum": ["minesweeper", "identity", "ma"]},
    "distribution": {"enum": ["bernoulli", "binomial", "poisson", "gaussian"]},
    "p": {"type": "number", "minimum": 0, "maximum": 1},
    "trials": {"type": "integer", "minimum": 1},
    "mean": {"type": "number"},
    "variance": {"type": "number", "exclusiveMinimum": 0},
    "coeffs": {"type": "array", "items": {"type": "number"}, "minItems": 1},
    "source_cols": {"type": "integer", "minimum": 1},
    "source_rows": {"type": "integer", "minimum": 1},
    "cols": {"type": "integer", "minimum": 1, "description": "derived field width; source_cols = cols + c1 - 1"},
    "rows": {"type": "integer", "minimum": 1, "description": "derived field height; source_rows = rows + c2 - 1"},
    "m1": {"type": "integer", "minimum": 1},
    "m2": {"type": "integer", "minimum": 1},
    "thresholds": {"type": "array", "items": {"type": "number"}},
    "n_min": {"type": "number"},
    "n_max": {"type": "number"},
    "n_step": {"type": "number", "exclusiveMinimum": 0},
    "iter": {"type": "integer", "minimum": 1000},
    "sim_replicas": {"type": "integer", "minimum": 1},
    "seed": {"type": "integer", "minimum": 0},
    "confidence_z": {"type": "number", "exclusiveMinimum": 0},
    "l_mode": {"enum": ["boundary", "optimize"]},
    "threads": {"type": "integer", "minimum": 1},
    "output": {"type": "string"}
  }
})";
}

namespace detail {

using nlohmann::json;

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model",       "distribution", "p",          "trials",     "mean",   "variance", "coeffs",
      "source_cols", "source_rows",  "cols",       "rows",       "m1",     "m2",       "thresholds",
      "n_min",       "n_max",        "n_step",     "iter",       "sim_replicas", "seed", "confidence_z",
      "l_mode",      "threads",      "output"};
  return keys;
}

inline double get_number(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(key, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
  return d;
}

inline std::int64_t get_integer(const json& j, const std::string& key, std::int64_t min) {
  const auto& v = j.at(key);
  std::int64_t value = 0;
  if (v.is_number_integer()) {
    value = v.get<std::int64_t>();
  } else if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) {
    value = static_cast<std::int64_t>(v.get<double>());
  } else {
    throw ConfigError(key, "must be an integer");
  }
  if (value < min) throw ConfigError(key, "must be >= " + std::to_string(min));
  return value;
}

inline std::string get_string(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(key, "must be a string");
  return v.get<std::string>();
}

inline std::vector<double> get_numbers(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(key, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(key, "must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline std::size_t model_c(const std::string& model, const std::vector<double>& coeffs, int axis) {
  if (model == "minesweeper") return 3;
  if (model == "ma") return axis == 1 ? coeffs.size() : 1;
  return 1;
}

}  // namespace detail

inline LSelection parse_l_mode(const std::string& text, const std::string& key = "l_mode") {
  if (text == "boundary") return LSelection::boundary;
  if (text == "optimize") return LSelection::optimize;
  throw ConfigError(key, "must be 'boundary' or 'optimize', got '" + text + "'");
}

/// Builds the transform and geometry named by the config.
inline ExperimentSpec to_spec(const RunConfig& cfg) {
  ExperimentSpec s;
  if (cfg.model == "minesweeper") {
    s.transform = minesweeper_transform();
    s.geometry = minesweeper_geometry(cfg.source_cols, cfg.source_rows);
  } else if (cfg.model == "identity") {
    s.transform = identity_transform();
    s.geometry = identity_geometry(cfg.source_cols, cfg.source_rows);
  } else {
    s.transform = ma_transform(cfg.coeffs);
    s.geometry = ma_geometry(cfg.coeffs.size() - 1, cfg.source_cols, cfg.source_rows);
  }
  if (cfg.distribution == "bernoulli") {
    s.distribution = Bernoulli{cfg.p};
  } else if (cfg.distribution == "binomial") {
    s.distribution = Binomial{cfg.trials, cfg.p};
  } else if (cfg.distribution == "poisson") {
    s.distribution = Poisson{cfg.mean};
  } else {
    s.distribution = Gaussian{cfg.mean, cfg.variance};
  }
  s.m1 = cfg.m1;
  s.m2 = cfg.m2;
  s.thresholds = cfg.thresholds;
  s.iterations = cfg.iter;
  s.z = cfg.confidence_z;
  s.seed = cfg.seed;
  s.l_mode = cfg.l_mode;
  s.threads = cfg.threads;
  return s;
}

/// Cross-key checks; module preconditions are re-raised against the key that controls them.
inline void validate(const RunConfig& cfg) {
  if (cfg.model != "minesweeper" && cfg.model != "identity" && cfg.model != "ma") {
    throw ConfigError("model", "must be one of minesweeper, identity, ma");
  }
  if (cfg.model == "ma" && cfg.coeffs.empty()) throw ConfigError("coeffs", "required for the ma model");
  if (cfg.model != "ma" && !cfg.coeffs.empty()) throw ConfigError("coeffs", "only used by the ma model");
  const std::string& d = cfg.distribution;
  if (d != "bernoulli" && d != "binomial" && d != "poisson" && d != "gaussian") {
    throw ConfigError("distribution", "must be one of bernoulli, binomial, poisson, gaussian");
  }
  if ((d == "bernoulli" || d == "binomial") && !(cfg.p >= 0.0 && cfg.p <= 1.0)) {
    throw ConfigError("p", "must lie in [0, 1]");
  }
  if (d == "binomial" && cfg.trials < 1) throw ConfigError("trials", "must be >= 1");
  if (d == "poisson" && !(cfg.mean > 0.0)) throw ConfigError("mean", "must be > 0 for poisson");
  if (d == "gaussian" && !(cfg.variance > 0.0)) throw ConfigError("variance", "must be > 0");
  if (cfg.source_cols < 1) throw ConfigError("source_cols", "required (or give cols)");
  if (cfg.source_rows < 1) throw ConfigError("source_rows", "required (or give rows)");
  if (cfg.m1 < 1) throw ConfigError("m1", "must be >= 1");
  if (cfg.m2 < 1) throw ConfigError("m2", "must be >= 1");
  if (cfg.iter < 1000) throw ConfigError("iter", "must be >= 1000");
  if (cfg.sim_replicas < 1) throw ConfigError("sim_replicas", "replicas must be ≥ 1");
  if (!(cfg.confidence_z > 0.0)) throw ConfigError("confidence_z", "must be > 0");
  if (cfg.threads < 1) throw ConfigError("threads", "must be >= 1");

  const ExperimentSpec spec = to_spec(cfg);
  if (integer_scan(spec)) {
    for (double n : cfg.thresholds)
      if (std::floor(n) != n) throw ConfigError("thresholds", "must be integers for an integer-valued model");
  }
  const std::size_t c1 = spec.geometry.c1(), c2 = spec.geometry.c2();
  if (cfg.source_cols < c1) throw ConfigError("source_cols", "smaller than the block-factor window");
  if (cfg.source_rows < c2) throw ConfigError("source_rows", "smaller than the block-factor window");
  if (cfg.m1 > spec.geometry.derived_cols()) throw ConfigError("m1", "window wider than the derived field");
  if (cfg.m2 > spec.geometry.derived_rows()) throw ConfigError("m2", "window taller than the derived field");
  try {
    validate(spec);
  } catch (const GeometryError& e) {
    const std::string what = e.what();
    std::string key = "geometry";
    if (what.rfind("m1", 0) == 0) key = "m1";
    if (what.rfind("m2", 0) == 0) key = "m2";
    if (what.rfind("source_cols", 0) == 0) key = "source_cols";
    if (what.rfind("source_rows", 0) == 0) key = "source_rows";
    throw ConfigError(key, what);
  } catch (const ParameterError& e) {
    throw ConfigError(cfg.model == "ma" ? "coeffs" : "distribution", e.what());
  }
}

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::get_integer;
  using detail::get_number;
  using detail::get_string;
  if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");
  for (const auto& item : j.items())
    if (!detail::known_keys().count(item.key())) throw ConfigError(item.key(), "unknown key");

  RunConfig cfg;
  if (j.contains("model")) cfg.model = get_string(j, "model");
  if (cfg.model == "ma") {
    cfg.distribution = "gaussian";
    cfg.m2 = 1;
  }
  if (j.contains("distribution")) cfg.distribution = get_string(j, "distribution");
  if (j.contains("p")) cfg.p = get_number(j, "p");
  if (j.contains("trials")) cfg.trials = get_integer(j, "trials", 1);
  if (cfg.distribution == "poisson") cfg.mean = 1.0;
  if (j.contains("mean")) cfg.mean = get_number(j, "mean");
  if (j.contains("variance")) cfg.variance = get_number(j, "variance");
  if (j.contains("coeffs")) cfg.coeffs = detail::get_numbers(j, "coeffs");
  if (j.contains("m1")) cfg.m1 = static_cast<std::size_t>(get_integer(j, "m1", 1));
  if (j.contains("m2")) cfg.m2 = static_cast<std::size_t>(get_integer(j, "m2", 1));

  const auto size_key = [&](const char* source_key, const char* derived_key, int axis) -> std::size_t {
    if (j.contains(source_key) && j.contains(derived_key)) {
      throw ConfigError(derived_key, std::string("give either ") + source_key + " or " + derived_key);
    }
    if (j.contains(source_key)) return static_cast<std::size_t>(get_integer(j, source_key, 1));
    if (j.contains(derived_key)) {
      return static_cast<std::size_t>(get_integer(j, derived_key, 1)) + detail::model_c(cfg.model, cfg.coeffs, axis) -
             1;
    }
    if (axis == 2 && cfg.model == "ma") return 1;
    throw ConfigError(source_key, "required (or give " + std::string(derived_key) + ")");
  };
  cfg.source_cols = size_key("source_cols", "cols", 1);
  cfg.source_rows = size_key("source_rows", "rows", 2);

  if (j.contains("thresholds")) {
    if (j.contains("n_min") || j.contains("n_max")) throw ConfigError("thresholds", "give thresholds or n_min/n_max");
    cfg.thresholds = detail::get_numbers(j, "thresholds");
  } else if (j.contains("n_min") || j.contains("n_max")) {
    if (!j.contains("n_min")) throw ConfigError("n_min", "required together with n_max");
    if (!j.contains("n_max")) throw ConfigError("n_max", "required together with n_min");
    const double lo = get_number(j, "n_min"), hi = get_number(j, "n_max");
    const double step = j.contains("n_step") ? get_number(j, "n_step") : 1.0;
    if (!(step > 0.0)) throw ConfigError("n_step", "must be > 0");
    if (hi < lo) throw ConfigError("n_max", "must be >= n_min");
    for (std::int64_t k = 0; lo + static_cast<double>(k) * step <= hi + 1e-9 * step; ++k)
      cfg.thresholds.push_back(lo + static_cast<double>(k) * step);
  }
  if (j.contains("iter")) cfg.iter = static_cast<std::uint64_t>(get_integer(j, "iter", 0));
  if (j.contains("sim_replicas")) cfg.sim_replicas = static_cast<std::uint64_t>(get_integer(j, "sim_replicas", 0));
  if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(get_integer(j, "seed", 0));
  if (j.contains("confidence_z")) cfg.confidence_z = get_number(j, "confidence_z");
  if (j.contains("l_mode")) cfg.l_mode = parse_l_mode(get_string(j, "l_mode"));
  cfg.threads = j.contains("threads") ? static_cast<unsigned>(get_integer(j, "threads", 1)) : default_thread_count();
  if (j.contains("output")) cfg.output = get_string(j, "output");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

/// The resolved configuration, as written into table metadata.
inline nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["model"] = cfg.model;
  j["distribution"] = cfg.distribution;
  if (cfg.distribution == "bernoulli" || cfg.distribution == "binomial") j["p"] = cfg.p;
  if (cfg.distribution == "binomial") j["trials"] = cfg.trials;
  if (cfg.distribution == "poisson" || cfg.distribution == "gaussian") j["mean"] = cfg.mean;
  if (cfg.distribution == "gaussian") j["variance"] = cfg.variance;
  if (!cfg.coeffs.empty()) j["coeffs"] = cfg.coeffs;
  j["source_cols"] = cfg.source_cols;
  j["source_rows"] = cfg.source_rows;
  j["m1"] = cfg.m1;
  j["m2"] = cfg.m2;
  j["thresholds"] = cfg.thresholds;
  j["iter"] = cfg.iter;
  j["sim_replicas"] = cfg.sim_replicas;
  j["seed"] = cfg.seed;
  j["confidence_z"] = cfg.confidence_z;
  j["l_mode"] = to_string(cfg.l_mode);
  j["threads"] = cfg.threads;
  if (!cfg.output.empty()) j["output"] = cfg.output;
  return j;
}

}  // namespace scanstat
