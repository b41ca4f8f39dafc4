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

#include "adaptive.hpp"
#include "densities.hpp"
#include "estimator.hpp"
#include "fourier.hpp"
#include "privacy.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace dpfourier {

//! Integrated squared error, averaged over the lattice of the given
//! resolution, between the truth and Re f^.
inline double
ise_quadrature(const ProjectionEstimate& estimate,
               const DensitySpec& truth,
               int resolution = 0)
{
  const int d = density_dim(truth);
  if (estimate.dim() != d)
    throw UsageError("ise: dimension mismatch");
  if (resolution <= 0)
    resolution = lattice_resolution(d);
  double total = 0.0;
  std::size_t count = 0;
  for_each_lattice_point(d, resolution, [&](std::span<const double> x) {
    const double diff = density_value(truth, x) - evaluate(estimate.coeffs, x);
    total += diff * diff;
    ++count;
  });
  return total / static_cast<double>(count);
}

//! ||f - f^_M||^2 for one estimate. Exact (Parseval over the union of
//! supports, complex coefficients) when the truth has a finite Fourier
//! expansion; lattice quadrature of |f - Re f^|^2 otherwise.
inline double
mise(const ProjectionEstimate& estimate, const DensitySpec& truth)
{
  if (estimate.dim() != density_dim(truth))
    throw UsageError("mise: dimension mismatch");
  if (auto coeffs = density_coefficients(truth))
    return l2_distance_sq(*coeffs, estimate.coeffs);
  return ise_quadrature(estimate, truth);
}

//! Ordinary least squares y = intercept + slope x.
struct SlopeFit
{
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  //! NaN with fewer than three points.
  double std_error = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 0;
};

//! Absent with fewer than two points or no spread in x.
inline std::optional<SlopeFit>
ols_slope(const std::vector<double>& x, const std::vector<double>& y)
{
  if (x.size() != y.size())
    throw UsageError("ols_slope: length mismatch");
  const std::size_t n = x.size();
  if (n < 2)
    return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0)
    return std::nullopt;
  SlopeFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.std_error = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

inline double
median(std::vector<double> v)
{
  if (v.empty())
    return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

enum class EstimatorMode
{
  OracleBeta,
  Lepskii,
  PenalizedBias
};

inline std::string
to_string(EstimatorMode m)
{
  switch (m) {
    case EstimatorMode::OracleBeta:
      return "oracle-beta";
    case EstimatorMode::Lepskii:
      return "lepskii";
    case EstimatorMode::PenalizedBias:
      return "penalized-bias";
  }
  return "?";
}

inline std::optional<EstimatorMode>
estimator_mode_from_string(const std::string& s)
{
  if (s == "oracle-beta" || s == "oracle")
    return EstimatorMode::OracleBeta;
  if (s == "lepskii")
    return EstimatorMode::Lepskii;
  if (s == "penalized-bias")
    return EstimatorMode::PenalizedBias;
  return std::nullopt;
}

enum class RegressOn
{
  Auto,
  N,
  NSqrtRho,
  None
};

//! One sweep over (n, rho) cells.
struct ExperimentConfig
{
  std::string name = "sweep";
  DensitySpec density = UniformDensity{ 1 };
  std::string density_ref; // path the density was loaded from, if any
  EstimatorMode mode = EstimatorMode::OracleBeta;
  std::optional<double> beta;
  int d = 1;
  std::vector<std::size_t> ns;
  std::vector<double> rhos;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  CutoffRule cutoff_rule = CutoffRule::Adaptive;
  PenaltyConfig penalty = PenaltyConfig::practical(1.0, 1.0, 0.5);
  //! Penalized-bias cut-off collection; empty means the dyadic grid.
  std::vector<int> cutoff_grid;
  RegressOn regress_on = RegressOn::Auto;
  //! When false the wall_ms column is written as 0 so output is
  //! byte-reproducible.
  bool record_timing = false;
  //! 0 disables the per-cell time guard.
  double cell_time_limit_ms = 0.0;
  //! 0 uses std::thread::hardware_concurrency().
  unsigned threads = 0;
  //! Test hook: run the selection rules without noise.
  bool disable_noise = false;

  //! Every violated invariant, not just the first.
  std::vector<std::string> violations() const
  {
    std::vector<std::string> out;
    if (replicates < 1)
      out.push_back("replicates must be >= 1");
    if (ns.empty())
      out.push_back("n list must be non-empty");
    for (auto n : ns)
      if (n < 3)
        out.push_back("every n must be >= 3 (got " + std::to_string(n) + ")");
    if (rhos.empty())
      out.push_back("rho list must be non-empty");
    for (double r : rhos)
      if (!(r > 0.0) || !std::isfinite(r))
        out.push_back("every rho must be positive and finite");
    if (mode == EstimatorMode::OracleBeta && !beta)
      out.push_back("oracle-beta mode requires beta");
    if (beta && !(*beta > 0.0))
      out.push_back("beta must be > 0");
    if (d != density_dim(density))
      out.push_back("d does not match the density dimension");
    try {
      penalty.validate(d);
    } catch (const UsageError& e) {
      out.push_back(e.what());
    }
    for (int m : cutoff_grid)
      if (m < 0)
        out.push_back("cut-off grid entries must be >= 0");
    return out;
  }

  //! Throws a UsageError naming every violation.
  void check() const
  {
    const auto v = violations();
    if (v.empty())
      return;
    std::string msg = "invalid experiment config '" + name + "':";
    for (const auto& s : v)
      msg += "\n  - " + s;
    throw UsageError(msg);
  }

  std::vector<int> penalized_grid(std::size_t n) const
  {
    return cutoff_grid.empty() ? dyadic_cutoff_grid(n, d) : cutoff_grid;
  }
};

//! One row of the experiment CSV.
struct ExperimentRecord
{
  std::size_t n = 0;
  double rho = 0.0;
  double beta_nominal = std::numeric_limits<double>::quiet_NaN();
  int d = 1;
  std::string mode;
  long long replicate = 0; // -1 marks a skipped-cell row
  int selected_M = 0;
  double rho_spent = 0.0;
  double mise = 0.0;
  double wall_ms = 0.0;
};

inline constexpr const char* kCsvHeader =
  "n,rho,beta_nominal,d,mode,replicate,selected_M,rho_spent,mise,wall_ms";

inline std::string
format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void
write_records_csv(std::ostream& os, const std::vector<ExperimentRecord>& rows)
{
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.n << ',' << format_double(r.rho) << ','
       << format_double(r.beta_nominal) << ',' << r.d << ',' << r.mode << ','
       << r.replicate << ',' << r.selected_M << ','
       << format_double(r.rho_spent) << ',' << format_double(r.mise) << ','
       << format_double(r.wall_ms) << '\n';
  }
}

namespace detail {

//! Runs task(i) for i in [0, count) on up to `threads` workers. Results are
//! written by index, so the outcome is independent of scheduling. Tasks not
//! started before `deadline` (if any) are skipped; returns how many ran.
template<class Task>
std::vector<char>
run_indexed(std::size_t count,
            unsigned threads,
            std::optional<std::chrono::steady_clock::time_point> deadline,
            Task&& task)
{
  std::vector<char> ran(count, 0);
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::atomic<std::size_t> next{ 0 };
  std::mutex err_mu;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count)
        return;
      if (deadline && std::chrono::steady_clock::now() > *deadline)
        continue;
      try {
        task(i);
        ran[i] = 1;
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!error)
          error = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(worker);
    for (auto& t : pool)
      t.join();
  }
  if (error)
    std::rethrow_exception(error);
  return ran;
}

inline std::uint64_t
replicate_stream(std::size_t cell, std::size_t replicate)
{
  return (static_cast<std::uint64_t>(cell) << 32) ^ replicate;
}

} // namespace detail

//! Everything one replicate produced.
struct ReplicateOutcome
{
  ExperimentRecord adaptive; // the configured estimator
  std::optional<ExperimentRecord> oracle;
  std::vector<double> candidate_mise; // penalized-bias fixed-M MISEs
  std::vector<int> candidate_cutoffs;
  int oracle_cutoff = 0;
};

//! sample -> estimate -> MISE for one replicate of one cell. With
//! `with_oracle`, also fits the oracle-beta estimator on the same sample
//! with the full budget.
inline ReplicateOutcome
run_replicate(const ExperimentConfig& cfg,
              std::size_t cell,
              std::size_t n,
              double rho,
              std::size_t replicate,
              bool with_oracle)
{
  const auto start = std::chrono::steady_clock::now();
  Rng rng = make_rng(cfg.seed, detail::replicate_stream(cell, replicate));
  const PointSet data = rejection_sample(cfg.density, n, rng);
  const PrivacyBudget budget(rho);
  const double beta_nominal =
    cfg.beta.value_or(std::numeric_limits<double>::quiet_NaN());

  ReplicateOutcome out;
  ExperimentRecord& rec = out.adaptive;
  rec.n = n;
  rec.rho = rho;
  rec.beta_nominal = beta_nominal;
  rec.d = cfg.d;
  rec.mode = to_string(cfg.mode);
  rec.replicate = static_cast<long long>(replicate);

  SelectionOptions opts;
  opts.disable_noise = cfg.disable_noise;
  std::vector<ProjectionEstimate> candidates;
  switch (cfg.mode) {
    case EstimatorMode::OracleBeta: {
      BudgetLedger ledger(budget);
      const int m = optimal_cutoff(cfg.cutoff_rule, static_cast<double>(n),
                                   rho, *cfg.beta, cfg.d);
      auto est = fit(data, m, budget, rng, ledger);
      rec.selected_M = m;
      rec.rho_spent = ledger.spent();
      rec.mise = mise(est, cfg.density);
      break;
    }
    case EstimatorMode::Lepskii: {
      auto [est, trace] = lepskii_select(data, budget, cfg.penalty, rng, opts);
      rec.selected_M = est.cutoff();
      rec.rho_spent = trace.rho_spent;
      rec.mise = mise(est, cfg.density);
      if (cfg.beta) {
        const double rho_prime = trace.rho_per_candidate;
        out.oracle_cutoff = optimal_cutoff_adaptive_form(
          static_cast<double>(n), rho_prime, *cfg.beta, cfg.d);
      }
      break;
    }
    case EstimatorMode::PenalizedBias: {
      opts.keep_candidates = &candidates;
      auto [est, trace] = penalized_bias_select(
        data, budget, cfg.penalized_grid(n), rng, opts);
      rec.selected_M = est.cutoff();
      rec.rho_spent = trace.rho_spent;
      rec.mise = mise(est, cfg.density);
      for (const auto& c : candidates) {
        out.candidate_mise.push_back(mise(c, cfg.density));
        out.candidate_cutoffs.push_back(c.cutoff());
      }
      break;
    }
  }
  const auto mid = std::chrono::steady_clock::now();
  if (cfg.record_timing)
    rec.wall_ms =
      std::chrono::duration<double, std::milli>(mid - start).count();

  if (with_oracle && cfg.beta) {
    ExperimentRecord orc = rec;
    orc.mode = to_string(EstimatorMode::OracleBeta);
    BudgetLedger ledger(budget);
    const int m = optimal_cutoff(cfg.cutoff_rule, static_cast<double>(n), rho,
                                 *cfg.beta, cfg.d);
    auto est = fit(data, m, budget, rng, ledger);
    orc.selected_M = m;
    orc.rho_spent = ledger.spent();
    orc.mise = mise(est, cfg.density);
    orc.wall_ms = cfg.record_timing
                    ? std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - mid)
                        .count()
                    : 0.0;
    if (cfg.mode == EstimatorMode::OracleBeta || out.oracle_cutoff == 0)
      out.oracle_cutoff = m;
    out.oracle = orc;
  }
  return out;
}

//! Per-cell aggregates.
struct CellSummary
{
  std::size_t n = 0;
  double rho = 0.0;
  std::size_t completed = 0;
  bool skipped = false;
  double mean_mise = std::numeric_limits<double>::quiet_NaN();
  double median_mise = std::numeric_limits<double>::quiet_NaN();
  double median_selected_M = std::numeric_limits<double>::quiet_NaN();
};

struct RateExperimentResult
{
  std::vector<ExperimentRecord> records;
  std::vector<CellSummary> cells;
  RegressOn regressed_on = RegressOn::None;
  std::optional<SlopeFit> slope; // absent when undefined
};

namespace detail {

inline RegressOn
resolve_regression(const ExperimentConfig& cfg)
{
  if (cfg.regress_on != RegressOn::Auto)
    return cfg.regress_on;
  if (cfg.rhos.size() == 1 && cfg.ns.size() > 1)
    return RegressOn::N;
  if (cfg.ns.size() == 1 && cfg.rhos.size() > 1)
    return RegressOn::NSqrtRho;
  return RegressOn::None;
}

inline std::optional<std::chrono::steady_clock::time_point>
cell_deadline(const ExperimentConfig& cfg)
{
  if (cfg.cell_time_limit_ms <= 0.0)
    return std::nullopt;
  return std::chrono::steady_clock::now() +
         std::chrono::duration_cast<std::chrono::steady_clock::duration>(
           std::chrono::duration<double, std::milli>(cfg.cell_time_limit_ms));
}

inline ExperimentRecord
skipped_row(const ExperimentConfig& cfg, std::size_t n, double rho)
{
  ExperimentRecord r;
  r.n = n;
  r.rho = rho;
  r.beta_nominal = cfg.beta.value_or(std::numeric_limits<double>::quiet_NaN());
  r.d = cfg.d;
  r.mode = to_string(cfg.mode) + ":skipped";
  r.replicate = -1;
  r.selected_M = -1;
  r.mise = std::numeric_limits<double>::quiet_NaN();
  return r;
}

} // namespace detail

//! Runs R replicates of sample -> estimate -> MISE for each (n, rho) cell
//! (n outer, rho inner) and regresses log(mean MISE) on log n or on
//! log(n sqrt(rho)).
inline RateExperimentResult
run_rate_experiment(const ExperimentConfig& cfg)
{
  cfg.check();
  RateExperimentResult result;
  std::size_t cell = 0;
  std::vector<double> xs, ys;
  result.regressed_on = detail::resolve_regression(cfg);
  for (std::size_t n : cfg.ns) {
    for (double rho : cfg.rhos) {
      std::vector<ReplicateOutcome> outcomes(cfg.replicates);
      const auto ran = detail::run_indexed(
        cfg.replicates, cfg.threads, detail::cell_deadline(cfg),
        [&](std::size_t r) {
          outcomes[r] = run_replicate(cfg, cell, n, rho, r, false);
        });
      CellSummary summary;
      summary.n = n;
      summary.rho = rho;
      std::vector<double> mises, cutoffs;
      for (std::size_t r = 0; r < cfg.replicates; ++r) {
        if (!ran[r]) {
          summary.skipped = true;
          continue;
        }
        result.records.push_back(outcomes[r].adaptive);
        mises.push_back(outcomes[r].adaptive.mise);
        cutoffs.push_back(outcomes[r].adaptive.selected_M);
      }
      if (summary.skipped)
        result.records.push_back(detail::skipped_row(cfg, n, rho));
      summary.completed = mises.size();
      if (!mises.empty()) {
        double total = 0.0;
        for (double m : mises)
          total += m;
        summary.mean_mise = total / static_cast<double>(mises.size());
        summary.median_mise = median(mises);
        summary.median_selected_M = median(cutoffs);
        if (summary.mean_mise > 0.0) {
          if (result.regressed_on == RegressOn::N) {
            xs.push_back(std::log(static_cast<double>(n)));
            ys.push_back(std::log(summary.mean_mise));
          } else if (result.regressed_on == RegressOn::NSqrtRho) {
            xs.push_back(std::log(static_cast<double>(n) * std::sqrt(rho)));
            ys.push_back(std::log(summary.mean_mise));
          }
        }
      }
      result.cells.push_back(summary);
      ++cell;
    }
  }
  if (result.regressed_on != RegressOn::None)
    result.slope = ols_slope(xs, ys);
  return result;
}

//! Per-cell comparison of an adaptive rule against the oracle-beta
//! estimator fitted on the same sample with the same total budget.
struct AdaptivityComparison
{
  std::size_t n = 0;
  double rho = 0.0;
  std::size_t completed = 0;
  double median_adaptive_mise = std::numeric_limits<double>::quiet_NaN();
  double median_oracle_mise = std::numeric_limits<double>::quiet_NaN();
  double ratio_to_oracle = std::numeric_limits<double>::quiet_NaN();
  //! Penalized-bias only: min over M in the grid of the median MISE of the
  //! fixed-M estimator at budget rho / |grid|.
  double median_best_fixed_mise = std::numeric_limits<double>::quiet_NaN();
  int best_fixed_M = -1;
  double ratio_to_best_fixed = std::numeric_limits<double>::quiet_NaN();
  double median_selected_M = std::numeric_limits<double>::quiet_NaN();
  int oracle_M = 0;
  //! Share of replicates with oracle_M / 4 <= selected M <= 4 oracle_M.
  double within_factor4 = std::numeric_limits<double>::quiet_NaN();
};

struct AdaptivityExperimentResult
{
  std::vector<ExperimentRecord> records;
  std::vector<AdaptivityComparison> comparisons;
};

inline AdaptivityExperimentResult
run_adaptivity_experiment(const ExperimentConfig& cfg)
{
  cfg.check();
  if (cfg.mode == EstimatorMode::OracleBeta)
    throw UsageError("adaptivity experiment needs lepskii or penalized-bias");
  AdaptivityExperimentResult result;
  std::size_t cell = 0;
  for (std::size_t n : cfg.ns) {
    for (double rho : cfg.rhos) {
      std::vector<ReplicateOutcome> outcomes(cfg.replicates);
      const auto ran = detail::run_indexed(
        cfg.replicates, cfg.threads, detail::cell_deadline(cfg),
        [&](std::size_t r) {
          outcomes[r] = run_replicate(cfg, cell, n, rho, r, true);
        });
      AdaptivityComparison cmp;
      cmp.n = n;
      cmp.rho = rho;
      std::vector<double> adaptive, oracle, selected;
      std::vector<std::vector<double>> per_candidate;
      std::vector<int> candidate_cutoffs;
      std::size_t within = 0;
      bool skipped = false;
      for (std::size_t r = 0; r < cfg.replicates; ++r) {
        if (!ran[r]) {
          skipped = true;
          continue;
        }
        const auto& o = outcomes[r];
        result.records.push_back(o.adaptive);
        if (o.oracle)
          result.records.push_back(*o.oracle);
        adaptive.push_back(o.adaptive.mise);
        if (o.oracle)
          oracle.push_back(o.oracle->mise);
        selected.push_back(o.adaptive.selected_M);
        cmp.oracle_M = o.oracle_cutoff;
        if (o.oracle_cutoff > 0) {
          const double s = o.adaptive.selected_M;
          if (4.0 * s >= o.oracle_cutoff && s <= 4.0 * o.oracle_cutoff)
            ++within;
        }
        if (per_candidate.size() < o.candidate_mise.size())
          per_candidate.resize(o.candidate_mise.size());
        for (std::size_t i = 0; i < o.candidate_mise.size(); ++i)
          per_candidate[i].push_back(o.candidate_mise[i]);
        if (candidate_cutoffs.empty())
          candidate_cutoffs = o.candidate_cutoffs;
      }
      if (skipped)
        result.records.push_back(detail::skipped_row(cfg, n, rho));
      cmp.completed = adaptive.size();
      cmp.median_adaptive_mise = median(adaptive);
      cmp.median_oracle_mise = median(oracle);
      cmp.ratio_to_oracle = cmp.median_adaptive_mise / cmp.median_oracle_mise;
      cmp.median_selected_M = median(selected);
      if (cmp.completed > 0)
        cmp.within_factor4 =
          static_cast<double>(within) / static_cast<double>(cmp.completed);
      for (std::size_t i = 0; i < per_candidate.size(); ++i) {
        const double med = median(per_candidate[i]);
        if (cmp.best_fixed_M < 0 || med < cmp.median_best_fixed_mise) {
          cmp.median_best_fixed_mise = med;
          cmp.best_fixed_M = candidate_cutoffs[i];
        }
      }
      cmp.ratio_to_best_fixed =
        cmp.median_adaptive_mise / cmp.median_best_fixed_mise;
      result.comparisons.push_back(cmp);
      ++cell;
    }
  }
  return result;
}

//! Monte-Carlo check of P(Z >= (1 + delta) D sigma^2) <=
//! max{exp(-D delta^2 / 4), exp(-D delta / 2)} for Z a sum of D squared
//! N(0, sigma^2).
struct Chi2TailResult
{
  std::size_t degrees = 0;
  double delta = 0.0;
  std::size_t replicates = 0;
  double empirical = 0.0;
  double bound = 0.0;
  double margin = 0.0; // 4 sqrt(bound / R) + 4 / R
  bool passed = false;
};

inline Chi2TailResult
chi2_tail_check(std::size_t degrees,
                double delta,
                std::size_t replicates,
                Rng& rng,
                double sigma = 1.0)
{
  if (degrees < 1)
    throw UsageError("chi2_tail_check: need D >= 1");
  if (!(delta > 0.0))
    throw UsageError("chi2_tail_check: need delta > 0");
  if (replicates < 10000)
    throw UsageError("chi2_tail_check: need R >= 10^4");
  std::normal_distribution<double> normal(0.0, sigma);
  const double threshold = (1.0 + delta) * degrees * sigma * sigma;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < replicates; ++r) {
    double z = 0.0;
    for (std::size_t i = 0; i < degrees; ++i) {
      const double g = normal(rng);
      z += g * g;
    }
    if (z >= threshold)
      ++hits;
  }
  Chi2TailResult out;
  out.degrees = degrees;
  out.delta = delta;
  out.replicates = replicates;
  out.empirical = static_cast<double>(hits) / static_cast<double>(replicates);
  const double D = static_cast<double>(degrees);
  out.bound =
    std::max(std::exp(-D * delta * delta / 4.0), std::exp(-D * delta / 2.0));
  out.margin = 4.0 * std::sqrt(out.bound / replicates) + 4.0 / replicates;
  out.passed = out.empirical <= out.bound + out.margin;
  return out;
}

} // namespace dpfourier
