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

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace dpfourier {

//! A zero-concentrated DP level rho > 0.
class PrivacyBudget
{
public:
  explicit PrivacyBudget(double rho)
    : rho_(rho)
  {
    if (!(rho > 0.0) || !std::isfinite(rho))
      throw UsageError("privacy budget rho must be positive and finite, got " +
                       std::to_string(rho));
  }

  double rho() const { return rho_; }

  //! rho / parts, the per-mechanism share of an even split.
  PrivacyBudget split(std::size_t parts) const
  {
    if (parts == 0)
      throw UsageError("cannot split a privacy budget into zero parts");
    return PrivacyBudget(rho_ / static_cast<double>(parts));
  }

  bool operator==(const PrivacyBudget&) const = default;

private:
  double rho_;
};

//! Per-coordinate standard deviation of the Gaussian noise.
class NoiseScale
{
public:
  NoiseScale() = default;
  explicit NoiseScale(double sigma)
    : sigma_(sigma)
  {
    if (!(sigma >= 0.0))
      throw UsageError("noise scale must be non-negative");
  }

  double sigma() const { return sigma_; }
  bool operator==(const NoiseScale&) const = default;

private:
  double sigma_ = 0.0;
};

//! l2 sensitivity of the stacked (real, imaginary) coefficient vector on
//! {-M..M}^d: each coefficient moves by at most 2/n in modulus when one
//! record changes, over 2 (2M+1)^d real coordinates.
inline double
coefficient_sensitivity(std::size_t n, int cutoff, int dim)
{
  if (n < 1 || cutoff < 0 || dim < 1)
    throw UsageError("coefficient_sensitivity: need n >= 1, M >= 0, d >= 1");
  const double count = std::pow(2.0 * cutoff + 1.0, dim);
  return (2.0 / static_cast<double>(n)) * std::sqrt(2.0 * count);
}

//! Gaussian mechanism scale: sensitivity / sqrt(2 rho) gives rho-zCDP.
inline NoiseScale
gaussian_sigma(double sensitivity, const PrivacyBudget& budget)
{
  if (!(sensitivity >= 0.0))
    throw UsageError("gaussian_sigma: sensitivity must be >= 0");
  return NoiseScale(sensitivity / std::sqrt(2.0 * budget.rho()));
}

inline NoiseScale
gaussian_sigma(double sensitivity, double rho)
{
  return gaussian_sigma(sensitivity, PrivacyBudget(rho));
}

//! sigma_M = 2 sqrt((2M+1)^d) / (n sqrt(rho)); the closed form of
//! gaussian_sigma(coefficient_sensitivity(n, M, d), rho).
inline NoiseScale
sigma_for_cutoff(std::size_t n, const PrivacyBudget& budget, int cutoff, int dim)
{
  if (n < 1 || cutoff < 0 || dim < 1)
    throw UsageError("sigma_for_cutoff: need n >= 1, M >= 0, d >= 1");
  const double count = std::pow(2.0 * cutoff + 1.0, dim);
  return NoiseScale(2.0 * std::sqrt(count) /
                    (static_cast<double>(n) * std::sqrt(budget.rho())));
}

//! theta_k + sigma (N(0,1) + i N(0,1)) for every k, drawn in lexicographic
//! order, real part first. sigma == 0 returns the input without touching rng.
inline CoefficientGrid
add_noise(const CoefficientGrid& grid, const NoiseScale& scale, Rng& rng)
{
  if (scale.sigma() == 0.0)
    return grid;
  CoefficientGrid out = grid;
  std::normal_distribution<double> normal(0.0, 1.0);
  const double s = scale.sigma();
  for (auto& v : out.values()) {
    const double re = normal(rng);
    const double im = normal(rng);
    v += Complex(s * re, s * im);
  }
  return out;
}

namespace detail {
//! Neumaier-compensated sum of `f(item)` over a range.
template<typename Range, typename F>
double
compensated_sum(const Range& items, F f)
{
  double total = 0.0;
  double carry = 0.0;
  for (const auto& item : items) {
    const double x = f(item);
    const double t = total + x;
    if (std::abs(total) >= std::abs(x))
      carry += (total - t) + x;
    else
      carry += (x - t) + total;
    total = t;
  }
  return total + carry;
}
} // namespace detail

//! Adaptive composition: rho values add up. The sum is compensated so an
//! even split composes back to within one ulp.
inline PrivacyBudget
compose(std::span<const PrivacyBudget> budgets)
{
  if (budgets.empty())
    throw UsageError("compose: empty budget list");
  return PrivacyBudget(detail::compensated_sum(
    budgets, [](const PrivacyBudget& b) { return b.rho(); }));
}

//! Record of every mechanism invocation charged against a declared total.
class BudgetLedger
{
public:
  struct Entry
  {
    std::string label;
    double rho;
  };

  BudgetLedger() = default;

  //! A ledger that refuses charges beyond `total` (1e-12 relative slack).
  explicit BudgetLedger(PrivacyBudget total)
    : declared_(total.rho())
  {}

  void charge(std::string label, const PrivacyBudget& budget)
  {
    if (declared_ > 0.0 &&
        spent() + budget.rho() > declared_ * (1.0 + 1e-12))
      throw UsageError("privacy ledger: charge '" + label +
                       "' would exceed the declared budget");
    entries_.push_back({ std::move(label), budget.rho() });
  }

  double spent() const
  {
    return detail::compensated_sum(entries_,
                                   [](const Entry& e) { return e.rho; });
  }

  //! 0 when no total was declared.
  double declared() const { return declared_; }
  double unspent() const { return declared_ > 0.0 ? declared_ - spent() : 0.0; }

  const std::vector<Entry>& entries() const { return entries_; }

private:
  double declared_ = 0.0;
  std::vector<Entry> entries_;
};

inline void
to_json(nlohmann::json& j, const BudgetLedger& ledger)
{
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : ledger.entries())
    entries.push_back({ { "label", e.label }, { "rho", e.rho } });
  j = nlohmann::json{ { "declared", ledger.declared() },
                      { "spent", ledger.spent() },
                      { "entries", entries } };
}

} // namespace dpfourier
