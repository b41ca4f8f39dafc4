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

#pragma once

#include "fourier.hpp"
#include "privacy.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace dpfourier {

//! A (possibly private) projection estimate at cut-off M.
struct ProjectionEstimate
{
  CoefficientGrid coeffs;
  std::size_t n = 0;
  std::optional<PrivacyBudget> rho_spent; // empty: non-private
  NoiseScale sigma;

  int cutoff() const { return coeffs.cutoff(); }
  int dim() const { return coeffs.dim(); }
  bool is_private() const { return rho_spent.has_value(); }
};

//! Which cut-off formula an experiment or selection uses.
//!  - Theorem: M + 1 = min{floor((n/2^d)^(1/(2b+d))), floor((n sqrt(rho)/2^d)^(1/(b+d)))}
//!  - Adaptive: M = min{floor(n^(1/(2b+d))), floor((n sqrt(rho))^(1/(b+d)))}
//! The two differ by the 2^d factor and the "+1"; both are used in practice.
enum class CutoffRule
{
  Theorem,
  Adaptive
};

inline std::string
to_string(CutoffRule rule)
{
  return rule == CutoffRule::Theorem ? "thm" : "adaptive";
}

inline CutoffRule
cutoff_rule_from_string(const std::string& s)
{
  if (s == "thm" || s == "theorem")
    return CutoffRule::Theorem;
  if (s == "adaptive")
    return CutoffRule::Adaptive;
  throw UsageError("unknown cut-off rule '" + s + "' (expected thm|adaptive)");
}

namespace detail {
inline void
check_rate_args(double n, double rho, double beta, int d)
{
  if (!(n >= 1.0) || !(rho > 0.0) || !(beta > 0.0) || d < 1)
    throw UsageError("need n >= 1, rho > 0, beta > 0, d >= 1");
}
} // namespace detail

//! Cut-off of the fixed-smoothness upper bound, clamped to M >= 0.
inline int
optimal_cutoff_thm(double n, double rho, double beta, int d)
{
  detail::check_rate_args(n, rho, beta, d);
  const double scale = std::pow(2.0, d);
  const long long sampling = floor_root(n / scale, 2.0 * beta + d);
  const long long privacy = floor_root(n * std::sqrt(rho) / scale, beta + d);
  return static_cast<int>(std::max(0LL, std::min(sampling, privacy) - 1));
}

//! Cut-off M_{n,rho}(beta) used by the adaptive procedures; never below 1.
inline int
optimal_cutoff_adaptive_form(double n, double rho, double beta, int d)
{
  detail::check_rate_args(n, rho, beta, d);
  const long long sampling = floor_root(n, 2.0 * beta + d);
  const long long privacy = floor_root(n * std::sqrt(rho), beta + d);
  return static_cast<int>(std::max(1LL, std::min(sampling, privacy)));
}

inline int
optimal_cutoff(CutoffRule rule, double n, double rho, double beta, int d)
{
  return rule == CutoffRule::Theorem
           ? optimal_cutoff_thm(n, rho, beta, d)
           : optimal_cutoff_adaptive_form(n, rho, beta, d);
}

//! Projection estimate from precomputed empirical coefficients (at any
//! cut-off >= M): restrict, then add calibrated Gaussian noise when a
//! budget is given. The charge is recorded in `ledger`.
inline ProjectionEstimate
fit_from_coefficients(const CoefficientGrid& empirical,
                      std::size_t n,
                      int cutoff,
                      const std::optional<PrivacyBudget>& budget,
                      Rng& rng,
                      BudgetLedger& ledger,
                      const std::string& label = "fit")
{
  if (n < 1)
    throw UsageError("fit: sample size must be >= 1");
  if (cutoff > empirical.cutoff())
    throw UsageError("fit: empirical coefficients computed at a smaller "
                     "cut-off than requested");
  ProjectionEstimate est;
  est.n = n;
  est.coeffs = project(empirical, cutoff);
  if (budget) {
    est.sigma = sigma_for_cutoff(n, *budget, cutoff, empirical.dim());
    ledger.charge(label + " M=" + std::to_string(cutoff), *budget);
    est.coeffs = add_noise(est.coeffs, est.sigma, rng);
    est.rho_spent = budget;
  }
  return est;
}

//! f~_M (no budget) or f^_M (with budget).
inline ProjectionEstimate
fit(const PointSet& data,
    int cutoff,
    const std::optional<PrivacyBudget>& budget,
    Rng& rng,
    BudgetLedger& ledger)
{
  if (data.empty())
    throw UsageError("fit: empty data");
  return fit_from_coefficients(empirical_coefficients(data, cutoff),
                               data.size(), cutoff, budget, rng, ledger);
}

struct RateQuery
{
  double n;
  double rho;
  double beta;
  int d;
};

enum class Regime
{
  Sampling,
  Privacy
};

struct RateValue
{
  double value;
  double sampling_term;
  double privacy_term;
  Regime regime;
};

//! r_{n,rho}(beta) = max{n^(-2b/(2b+d)), (n sqrt(rho))^(-2b/(b+d))}.
inline RateValue
theoretical_rate(const RateQuery& q)
{
  detail::check_rate_args(q.n, q.rho, q.beta, q.d);
  const double sampling = std::pow(q.n, -2.0 * q.beta / (2.0 * q.beta + q.d));
  const double privacy =
    std::pow(q.n * std::sqrt(q.rho), -2.0 * q.beta / (q.beta + q.d));
  const bool priv = privacy > sampling;
  return { priv ? privacy : sampling, sampling, privacy,
           priv ? Regime::Privacy : Regime::Sampling };
}

inline void
to_json(nlohmann::json& j, const ProjectionEstimate& est)
{
  to_json(j, est.coeffs);
  j["n"] = est.n;
  j["rho_spent"] = est.rho_spent ? nlohmann::json(est.rho_spent->rho())
                                 : nlohmann::json(nullptr);
  j["sigma"] = est.sigma.sigma();
}

inline void
from_json(const nlohmann::json& j, ProjectionEstimate& est)
{
  from_json(j, est.coeffs);
  est.n = j.value("n", std::size_t{ 0 });
  if (j.contains("rho_spent") && !j.at("rho_spent").is_null())
    est.rho_spent = PrivacyBudget(j.at("rho_spent").get<double>());
  else
    est.rho_spent.reset();
  est.sigma = NoiseScale(j.value("sigma", 0.0));
}

} // namespace dpfourier
