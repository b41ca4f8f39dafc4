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

#include "estimator.hpp"
#include "fourier.hpp"
#include "privacy.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dpfourier {

//! Decreasing smoothness grid beta_m = (k_n - m) eps / log n, m = 0..k_n-1,
//! with k_n = floor((log n)^2 / eps).
struct BetaGrid
{
  double eps = 0.5;
  double n = 0.0;
  std::size_t k_n = 0;
  std::vector<double> betas;
  //! The grid-risk series bound is only established for eps <= 1/2.
  bool series_bound_applies = true;
};

inline BetaGrid
build_beta_grid(double n, double eps)
{
  if (!(n >= 3.0))
    throw UsageError("build_beta_grid: need n >= 3");
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw UsageError("build_beta_grid: need eps > 0");
  const double log_n = std::log(n);
  BetaGrid grid;
  grid.eps = eps;
  grid.n = n;
  // The relative slack keeps exact cases such as n = e^2 from flooring to
  // one below because log(exp(2)) is off by an ulp.
  grid.k_n = static_cast<std::size_t>(
    std::floor(log_n * log_n / eps * (1.0 + 1e-12)));
  grid.series_bound_applies = eps <= 0.5;
  grid.betas.reserve(grid.k_n);
  const double step = eps / log_n;
  for (std::size_t m = 0; m < grid.k_n; ++m)
    grid.betas.push_back(static_cast<double>(grid.k_n - m) * step);
  return grid;
}

//! Threshold constants of the risk-penalized (Lepskii) rule:
//! r* = C (log n)^a r_{n,rho'}(beta).
struct PenaltyConfig
{
  double C = 1.0;
  double a = 1.0;
  double eps = 0.5;
  bool theory_mode = false;
  double L = 2.0;

  //! Constants satisfying the hypotheses of the risk bound:
  //! a >= 1 and C >= max(8 L^2, 2^(2d+9)).
  static PenaltyConfig theory(int d, double L = 2.0, double eps = 0.5,
                              double a = 1.0)
  {
    PenaltyConfig cfg;
    cfg.theory_mode = true;
    cfg.L = L;
    cfg.eps = eps;
    cfg.a = a;
    cfg.C = std::max(8.0 * L * L, std::pow(2.0, 2 * d + 9));
    return cfg;
  }

  static PenaltyConfig practical(double C, double a = 1.0, double eps = 0.5)
  {
    PenaltyConfig cfg;
    cfg.C = C;
    cfg.a = a;
    cfg.eps = eps;
    return cfg;
  }

  void validate(int d) const
  {
    if (!(C >= 1.0))
      throw UsageError("penalty constant C must be >= 1");
    if (!(a > 0.0))
      throw UsageError("penalty exponent a must be > 0");
    if (!(eps > 0.0))
      throw UsageError("grid step eps must be > 0");
    if (theory_mode) {
      if (a < 1.0)
        throw UsageError("theory mode requires a >= 1");
      if (C < std::max(8.0 * L * L, std::pow(2.0, 2 * d + 9)))
        throw UsageError("theory mode requires C >= max(8 L^2, 2^(2d+9))");
    }
  }
};

//! One candidate model in a selection.
struct CandidateRecord
{
  std::size_t index = 0;
  double beta = std::numeric_limits<double>::quiet_NaN(); // Lepskii only
  int cutoff = 0;
  // Lepskii: squared distances to candidates l >= index and their thresholds.
  std::vector<double> distances;
  std::vector<double> thresholds;
  bool evaluated = false;
  // Penalized bias: B^2(M), penalties and the minimized criterion.
  double bias_sq = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double criterion = 0.0;
  bool accepted = false;
};

struct SelectionTrace
{
  std::string rule; // "lepskii" | "penalized-bias"
  std::vector<CandidateRecord> candidates;
  std::size_t selected = 0;
  double rho_total = 0.0;
  double rho_per_candidate = 0.0;
  double rho_spent = 0.0;
  double rho_unspent = 0.0;
  bool noise_disabled = false;
  std::vector<std::string> warnings;
  BudgetLedger ledger; // one charge per candidate fit
};

//! Test hooks for the selection rules.
struct SelectionOptions
{
  //! Skip the Gaussian noise; the result is then not private and nothing is
  //! charged. Only meant for exercising the decision logic.
  bool disable_noise = false;
  //! When set, receives every candidate estimate in candidate order.
  std::vector<ProjectionEstimate>* keep_candidates = nullptr;
};

namespace detail {

//! Empirical coefficients at the largest cut-off, then one fit per
//! candidate (in candidate order, so noise draws are reproducible).
inline std::vector<ProjectionEstimate>
fit_candidates(const PointSet& data,
               const std::vector<int>& cutoffs,
               const PrivacyBudget& per_candidate,
               const SelectionOptions& opts,
               Rng& rng,
               BudgetLedger& ledger,
               const std::string& label)
{
  const int max_cutoff = *std::max_element(cutoffs.begin(), cutoffs.end());
  const CoefficientGrid empirical = empirical_coefficients(data, max_cutoff);
  std::vector<ProjectionEstimate> fits;
  fits.reserve(cutoffs.size());
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    std::optional<PrivacyBudget> budget;
    if (!opts.disable_noise)
      budget = per_candidate;
    fits.push_back(fit_from_coefficients(empirical, data.size(), cutoffs[i],
                                         budget, rng, ledger,
                                         label + "[" + std::to_string(i) + "]"));
  }
  return fits;
}

} // namespace detail

//! Replays the Lepskii decision from recorded distances and thresholds:
//! the first evaluated candidate whose distances are all within threshold,
//! or the last candidate when none is.
inline std::size_t
replay_lepskii(const SelectionTrace& trace)
{
  for (const auto& c : trace.candidates) {
    if (!c.evaluated)
      continue;
    bool ok = true;
    for (std::size_t j = 0; j < c.distances.size(); ++j)
      ok = ok && c.distances[j] <= c.thresholds[j];
    if (ok)
      return c.index;
  }
  return trace.candidates.empty() ? 0 : trace.candidates.size() - 1;
}

//! Risk-penalized selection over the beta grid.
//!
//! Each candidate beta_m gets its own private fit at cut-off
//! M_{n,rho'}(beta_m) with rho' = rho eps / (log n)^2; the selected index is
//! the smallest m with ||f^_m - f^_l||^2 <= C (log n)^a r_{n,rho'}(beta_l)
//! for every l >= m. Total spend is k_n rho' <= rho; the rest is reported
//! as unspent.
inline std::pair<ProjectionEstimate, SelectionTrace>
lepskii_select(const PointSet& data,
               const PrivacyBudget& rho,
               const PenaltyConfig& cfg,
               Rng& rng,
               const SelectionOptions& opts = {})
{
  if (data.empty())
    throw UsageError("lepskii_select: empty data");
  const int d = data.dim();
  cfg.validate(d);
  const double n = static_cast<double>(data.size());
  if (n < 3.0)
    throw UsageError("lepskii_select: need n >= 3");

  const BetaGrid grid = build_beta_grid(n, cfg.eps);
  const double log_n = std::log(n);
  SelectionTrace trace;
  trace.rule = "lepskii";
  trace.noise_disabled = opts.disable_noise;
  trace.rho_total = rho.rho();
  if (cfg.theory_mode && !grid.series_bound_applies)
    trace.warnings.push_back("eps > 1/2: grid-risk series bound not covered");
  if (grid.k_n == 0)
    throw UsageError("lepskii_select: empty beta grid (eps too large)");

  const PrivacyBudget rho_prime(rho.rho() * cfg.eps / (log_n * log_n));
  trace.rho_per_candidate = rho_prime.rho();

  std::vector<int> cutoffs(grid.k_n);
  for (std::size_t m = 0; m < grid.k_n; ++m)
    cutoffs[m] = optimal_cutoff_adaptive_form(n, rho_prime.rho(),
                                              grid.betas[m], d);

  BudgetLedger ledger(rho);
  auto fits = detail::fit_candidates(data, cutoffs, rho_prime, opts, rng,
                                     ledger, "lepskii");

  const double log_factor = cfg.C * std::pow(log_n, cfg.a);
  std::vector<double> threshold(grid.k_n);
  for (std::size_t l = 0; l < grid.k_n; ++l)
    threshold[l] =
      log_factor *
      theoretical_rate({ n, rho_prime.rho(), grid.betas[l], d }).value;

  trace.candidates.resize(grid.k_n);
  for (std::size_t m = 0; m < grid.k_n; ++m) {
    auto& c = trace.candidates[m];
    c.index = m;
    c.beta = grid.betas[m];
    c.cutoff = cutoffs[m];
  }

  std::size_t selected = grid.k_n - 1;
  for (std::size_t m = 0; m < grid.k_n; ++m) {
    auto& c = trace.candidates[m];
    c.evaluated = true;
    bool ok = true;
    for (std::size_t l = m; l < grid.k_n; ++l) {
      const double dist =
        l == m ? 0.0 : l2_distance_sq(fits[m].coeffs, fits[l].coeffs);
      c.distances.push_back(dist);
      c.thresholds.push_back(threshold[l]);
      if (dist > threshold[l]) {
        ok = false;
        break;
      }
    }
    c.accepted = ok;
    if (ok) {
      selected = m;
      break;
    }
  }

  trace.selected = selected;
  trace.rho_spent = ledger.spent();
  trace.ledger = ledger;
  trace.rho_unspent = rho.rho() - trace.rho_spent;
  if (opts.keep_candidates)
    *opts.keep_candidates = fits;
  return { std::move(fits[selected]), std::move(trace) };
}

//! Lambda1(M) = 96 (2M+1)^d / n + 96 (2M+1)^(2d) / (n^2 rho').
inline double
penalty_lambda1(int cutoff, double n, double rho_prime, int d)
{
  if (!(rho_prime > 0.0))
    throw UsageError("penalty_lambda1: rho' must be > 0");
  const double dim = std::pow(2.0 * cutoff + 1.0, d);
  return 96.0 * dim / n + 96.0 * dim * dim / (n * n * rho_prime);
}

//! Lambda2(M) = Lambda1(M) + 16 (2M+1)^(2d) / (n^2 rho').
inline double
penalty_lambda2(int cutoff, double n, double rho_prime, int d)
{
  const double dim = std::pow(2.0 * cutoff + 1.0, d);
  return penalty_lambda1(cutoff, n, rho_prime, d) +
         16.0 * dim * dim / (n * n * rho_prime);
}

//! {1, 2, 4, ..., 2^J} with J the largest exponent such that
//! (2 * 2^J + 1)^d <= n; {1} when no exponent qualifies.
inline std::vector<int>
dyadic_cutoff_grid(std::size_t n, int d)
{
  if (d < 1)
    throw UsageError("dyadic_cutoff_grid: need d >= 1");
  auto fits = [&](long long m) {
    // (2m+1)^d <= n without overflow
    long double v = 1.0L;
    for (int i = 0; i < d; ++i) {
      v *= static_cast<long double>(2 * m + 1);
      if (v > static_cast<long double>(n))
        return false;
    }
    return true;
  };
  std::vector<int> out{ 1 };
  long long m = 2;
  while (m < (1LL << 30) && fits(m)) {
    out.push_back(static_cast<int>(m));
    m *= 2;
  }
  return out;
}

//! Penalized estimated-bias selection over a collection of cut-offs.
//!
//! rho' = rho / |grid|, each f^_M fit with sigma_M at rho'.
//! B^2(M) = max_{M' in grid} { ||proj_{M'}(f^_M) - f^_{M'}||^2 - Lambda1(M') }
//! and M^ = argmin_M { B^2(M) + Lambda2(M) }, ties to the smallest M.
inline std::pair<ProjectionEstimate, SelectionTrace>
penalized_bias_select(const PointSet& data,
                      const PrivacyBudget& rho,
                      std::vector<int> grid,
                      Rng& rng,
                      const SelectionOptions& opts = {})
{
  if (data.empty())
    throw UsageError("penalized_bias_select: empty data");
  if (grid.empty())
    throw UsageError("penalized_bias_select: empty cut-off grid");
  for (int m : grid)
    if (m < 0)
      throw UsageError("penalized_bias_select: negative cut-off");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const int d = data.dim();
  const double n = static_cast<double>(data.size());
  const PrivacyBudget rho_prime = rho.split(grid.size());

  SelectionTrace trace;
  trace.rule = "penalized-bias";
  trace.noise_disabled = opts.disable_noise;
  trace.rho_total = rho.rho();
  trace.rho_per_candidate = rho_prime.rho();
  if (std::pow(2.0 * grid.back() + 1.0, d) > n)
    trace.warnings.push_back("(2 max M + 1)^d > n");

  BudgetLedger ledger(rho);
  auto fits = detail::fit_candidates(data, grid, rho_prime, opts, rng, ledger,
                                     "penalized-bias");

  std::vector<double> lambda1(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    lambda1[i] = penalty_lambda1(grid[i], n, rho_prime.rho(), d);

  trace.candidates.resize(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double bias_sq = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.size(); ++j) {
      double dist = 0.0;
      if (i != j) {
        // ||proj_{M'}(f_M) - f_{M'}||^2: the projected grid has cut-off M'.
        dist = l2_distance_sq(project(fits[i].coeffs, grid[j]), fits[j].coeffs);
      }
      bias_sq = std::max(bias_sq, dist - lambda1[j]);
    }
    auto& c = trace.candidates[i];
    c.index = i;
    c.cutoff = grid[i];
    c.evaluated = true;
    c.bias_sq = bias_sq;
    c.lambda1 = lambda1[i];
    c.lambda2 = penalty_lambda2(grid[i], n, rho_prime.rho(), d);
    c.criterion = bias_sq + c.lambda2;
    if (c.criterion < trace.candidates[best].criterion)
      best = i;
  }
  trace.candidates[best].accepted = true;
  trace.selected = best;
  trace.rho_spent = ledger.spent();
  trace.ledger = ledger;
  trace.rho_unspent = rho.rho() - trace.rho_spent;
  if (opts.keep_candidates)
    *opts.keep_candidates = fits;
  return { std::move(fits[best]), std::move(trace) };
}

//! Replays argmin of the recorded criteria (ties to the smallest M).
inline std::size_t
replay_penalized_bias(const SelectionTrace& trace)
{
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.candidates.size(); ++i)
    if (trace.candidates[i].criterion < trace.candidates[best].criterion)
      best = i;
  return best;
}

inline void
to_json(nlohmann::json& j, const CandidateRecord& c)
{
  j = nlohmann::json{ { "index", c.index },
                      { "M", c.cutoff },
                      { "evaluated", c.evaluated },
                      { "accepted", c.accepted } };
  if (!std::isnan(c.beta)) {
    j["beta"] = c.beta;
    j["distances"] = c.distances;
    j["thresholds"] = c.thresholds;
  } else {
    j["bias_sq"] = c.bias_sq;
    j["lambda1"] = c.lambda1;
    j["lambda2"] = c.lambda2;
    j["criterion"] = c.criterion;
  }
}

inline void
to_json(nlohmann::json& j, const SelectionTrace& t)
{
  j = nlohmann::json{ { "rule", t.rule },
                      { "selected", t.selected },
                      { "selected_M", t.candidates.empty()
                                        ? 0
                                        : t.candidates[t.selected].cutoff },
                      { "rho_total", t.rho_total },
                      { "rho_per_candidate", t.rho_per_candidate },
                      { "rho_spent", t.rho_spent },
                      { "rho_unspent", t.rho_unspent },
                      { "noise_disabled", t.noise_disabled },
                      { "warnings", t.warnings },
                      { "candidates", t.candidates } };
}

} // namespace dpfourier
