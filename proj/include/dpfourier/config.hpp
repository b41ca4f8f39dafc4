//
// Copyright 2026 The dpfourier Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// JSON experiment configuration.
//
//   {"sweeps": [ {sweep}, ... ]}   or a single {sweep} object
//
// A sweep's keys are listed in default_sweep_json(). "density" is either a
// path (relative to the config file) to a density JSON, or an inline
// density object. Inline "trig" objects without "coefficients" and
// "packing" objects without "theta" are generated from their "seed".

#pragma once

#include "experiments.hpp"
#include "io.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace dpfourier {

enum class SweepKind
{
  Rate,
  Adaptivity
};

struct SweepSpec
{
  ExperimentConfig cfg;
  SweepKind kind = SweepKind::Rate;
  nlohmann::json density_json; // as materialized
};

inline nlohmann::json
default_sweep_json()
{
  return {
    { "name", "sweep" },
    { "experiment", "rate" },
    { "density",
      { { "kind", "trig" },
        { "d", 1 },
        { "beta", 1.0 },
        { "L", 2.0 },
        { "M", 64 },
        { "seed", 1 } } },
    { "mode", "oracle-beta" },
    { "beta", 1.0 },
    { "d", 1 },
    { "n", { 256, 1024, 4096 } },
    { "rho", { 10.0 } },
    { "replicates", 20 },
    { "seed", 0 },
    { "cutoff_rule", "adaptive" },
    { "constants",
      { { "mode", "practical" }, { "C", 1.0 }, { "a", 1.0 }, { "eps", 0.5 } } },
    { "cutoff_grid", nlohmann::json::array() },
    { "regress_on", "auto" },
    { "record_timing", false },
    { "cell_time_limit_ms", 0 },
    { "threads", 0 },
    { "disable_noise", false },
  };
}

//! Builds a density from an inline or stored JSON description, generating
//! trig coefficients or packing bits when absent.
inline DensitySpec
make_density_from_json(const nlohmann::json& j)
{
  if (!j.is_object() || !j.contains("kind"))
    throw UsageError("density: expected an object with 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  static const std::set<std::string> trig_keys{ "kind", "d",    "beta",
                                                "L",    "M",    "seed",
                                                "coefficients", "min_value" };
  static const std::set<std::string> packing_keys{
    "kind", "d", "m", "beta", "L", "seed", "theta", "halved_h",
    "a",    "gamma", "delta", "h"
  };
  static const std::set<std::string> uniform_keys{ "kind", "d" };
  const auto& allowed = kind == "trig"      ? trig_keys
                        : kind == "packing" ? packing_keys
                                            : uniform_keys;
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw UsageError("density: unknown key '" + key + "' for kind '" + kind +
                       "'");
  if (kind == "trig" && !j.contains("coefficients")) {
    Rng rng = make_rng(j.value("seed", std::uint64_t{ 1 }), 0x7269);
    return make_trig_density(j.value("beta", 1.0), j.value("L", 2.0),
                             j.value("M", 16), j.value("d", 1), rng);
  }
  if (kind == "packing" && !j.contains("theta")) {
    const int m = j.value("m", 4);
    const int d = j.value("d", 1);
    Rng rng = make_rng(j.value("seed", std::uint64_t{ 1 }), 0x7061);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::uint8_t> theta(ipow(static_cast<std::size_t>(m), d));
    for (auto& t : theta)
      t = coin(rng) ? 1 : 0;
    return make_packing_density(std::move(theta), m, j.value("beta", 1.0), d,
                                j.value("L", 2.0), j.value("halved_h", false));
  }
  return j.get<DensitySpec>();
}

namespace detail {

template<class T>
bool
read_key(const nlohmann::json& j,
         const char* key,
         T& out,
         std::vector<std::string>& errors)
{
  if (!j.contains(key))
    return false;
  try {
    out = j.at(key).get<T>();
    return true;
  } catch (const nlohmann::json::exception&) {
    errors.push_back(std::string("'") + key + "' has the wrong type");
    return false;
  }
}

} // namespace detail

//! Parses one sweep; every problem found is reported in one UsageError.
inline SweepSpec
parse_sweep(const nlohmann::json& j, const std::filesystem::path& base_dir)
{
  std::vector<std::string> errors;
  SweepSpec spec;
  ExperimentConfig& cfg = spec.cfg;
  if (!j.is_object())
    throw UsageError("sweep must be a JSON object");

  const auto defaults = default_sweep_json();
  for (const auto& [key, _] : j.items())
    if (!defaults.contains(key))
      errors.push_back("unknown key '" + key + "'");

  detail::read_key(j, "name", cfg.name, errors);

  std::string experiment = "rate";
  detail::read_key(j, "experiment", experiment, errors);
  if (experiment == "rate")
    spec.kind = SweepKind::Rate;
  else if (experiment == "adaptivity")
    spec.kind = SweepKind::Adaptivity;
  else
    errors.push_back("'experiment' must be rate or adaptivity, got '" +
                     experiment + "'");

  std::string mode = "oracle-beta";
  detail::read_key(j, "mode", mode, errors);
  if (auto m = estimator_mode_from_string(mode))
    cfg.mode = *m;
  else
    errors.push_back("'mode' must be oracle-beta, lepskii or penalized-bias, "
                     "got '" + mode + "'");

  double beta = 0.0;
  if (detail::read_key(j, "beta", beta, errors))
    cfg.beta = beta;

  bool have_density = false;
  if (!j.contains("density")) {
    errors.push_back("'density' is required");
  } else {
    try {
      const auto& dj = j.at("density");
      if (dj.is_string()) {
        cfg.density_ref = dj.get<std::string>();
        spec.density_json = read_json_file(base_dir / cfg.density_ref);
      } else {
        spec.density_json = dj;
      }
      cfg.density = make_density_from_json(spec.density_json);
      spec.density_json = cfg.density;
      have_density = true;
    } catch (const std::exception& e) {
      errors.push_back(std::string("density: ") + e.what());
    }
  }
  cfg.d = have_density ? density_dim(cfg.density) : 1;
  detail::read_key(j, "d", cfg.d, errors);

  detail::read_key(j, "n", cfg.ns, errors);
  detail::read_key(j, "rho", cfg.rhos, errors);
  detail::read_key(j, "replicates", cfg.replicates, errors);
  detail::read_key(j, "seed", cfg.seed, errors);

  std::string rule = "adaptive";
  detail::read_key(j, "cutoff_rule", rule, errors);
  try {
    cfg.cutoff_rule = cutoff_rule_from_string(rule);
  } catch (const UsageError& e) {
    errors.push_back(e.what());
  }

  if (j.contains("constants")) {
    const auto& c = j.at("constants");
    static const std::set<std::string> keys{ "mode", "C", "a", "eps", "L" };
    if (!c.is_object()) {
      errors.push_back("'constants' must be an object");
    } else {
      for (const auto& [key, _] : c.items())
        if (!keys.count(key))
          errors.push_back("unknown key 'constants." + key + "'");
      std::string cmode = "practical";
      detail::read_key(c, "mode", cmode, errors);
      double a = 1.0, eps = 0.5, L = 2.0, C = 1.0;
      detail::read_key(c, "a", a, errors);
      detail::read_key(c, "eps", eps, errors);
      detail::read_key(c, "L", L, errors);
      if (cmode == "theory") {
        cfg.penalty = PenaltyConfig::theory(cfg.d, L, eps, a);
        if (detail::read_key(c, "C", C, errors))
          cfg.penalty.C = C;
      } else if (cmode == "practical") {
        detail::read_key(c, "C", C, errors);
        cfg.penalty = PenaltyConfig::practical(C, a, eps);
        cfg.penalty.L = L;
      } else {
        errors.push_back("'constants.mode' must be theory or practical");
      }
    }
  }

  detail::read_key(j, "cutoff_grid", cfg.cutoff_grid, errors);

  std::string regress = "auto";
  detail::read_key(j, "regress_on", regress, errors);
  if (regress == "auto")
    cfg.regress_on = RegressOn::Auto;
  else if (regress == "n")
    cfg.regress_on = RegressOn::N;
  else if (regress == "n_sqrt_rho")
    cfg.regress_on = RegressOn::NSqrtRho;
  else if (regress == "none")
    cfg.regress_on = RegressOn::None;
  else
    errors.push_back("'regress_on' must be auto, n, n_sqrt_rho or none");

  detail::read_key(j, "record_timing", cfg.record_timing, errors);
  detail::read_key(j, "cell_time_limit_ms", cfg.cell_time_limit_ms, errors);
  detail::read_key(j, "threads", cfg.threads, errors);
  detail::read_key(j, "disable_noise", cfg.disable_noise, errors);

  if (have_density)
    for (auto& v : cfg.violations())
      errors.push_back(std::move(v));
  if (spec.kind == SweepKind::Adaptivity &&
      cfg.mode == EstimatorMode::OracleBeta)
    errors.push_back("adaptivity sweeps need mode lepskii or penalized-bias");

  if (!errors.empty()) {
    std::string msg = "invalid sweep '" + cfg.name + "':";
    for (const auto& e : errors)
      msg += "\n  - " + e;
    throw UsageError(msg);
  }
  return spec;
}

//! Every sweep in a config document; errors from all sweeps are combined.
inline std::vector<SweepSpec>
parse_experiment_config(const nlohmann::json& doc,
                        const std::filesystem::path& base_dir)
{
  std::vector<nlohmann::json> raw;
  if (doc.is_object() && doc.contains("sweeps")) {
    for (const auto& [key, _] : doc.items())
      if (key != "sweeps")
        throw UsageError("config: unknown top-level key '" + key + "'");
    if (!doc.at("sweeps").is_array() || doc.at("sweeps").empty())
      throw UsageError("config: 'sweeps' must be a non-empty array");
    for (const auto& s : doc.at("sweeps"))
      raw.push_back(s);
  } else {
    raw.push_back(doc);
  }
  std::vector<SweepSpec> out;
  std::string combined;
  std::set<std::string> names;
  for (const auto& s : raw) {
    try {
      out.push_back(parse_sweep(s, base_dir));
      if (!names.insert(out.back().cfg.name).second)
        combined += "\nduplicate sweep name '" + out.back().cfg.name + "'";
    } catch (const UsageError& e) {
      combined += std::string("\n") + e.what();
    }
  }
  if (!combined.empty())
    throw UsageError("invalid experiment config:" + combined);
  return out;
}

inline std::vector<SweepSpec>
load_experiment_config(const std::filesystem::path& path)
{
  return parse_experiment_config(read_json_file(path), path.parent_path());
}

} // namespace dpfourier
