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

#include <dpfourier/adaptive.hpp>

#include "oracles.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gtest/gtest.h"

namespace dpfourier {
namespace {

TEST(BetaGrid, SmallExample)
{
  const auto g = build_beta_grid(std::exp(2.0), 1.0);
  EXPECT_EQ(g.k_n, 4u);
  ASSERT_EQ(g.betas.size(), 4u);
  const double expected[] = { 2.0, 1.5, 1.0, 0.5 };
  for (int i = 0; i < 4; ++i)
    EXPECT_NEAR(g.betas[i], expected[i], 1e-12);
}

TEST(BetaGrid, HalfStepExample)
{
  const auto g = build_beta_grid(std::exp(4.0), 0.5);
  EXPECT_EQ(g.k_n, 32u);
  EXPECT_NEAR(g.betas.front(), 4.0, 1e-12);
  EXPECT_NEAR(g.betas[0] - g.betas[1], 0.125, 1e-12);
  EXPECT_TRUE(g.series_bound_applies);
}

TEST(BetaGrid, ConstantGapsAndNonnegative)
{
  for (double n : { 3.0, 17.0, 1000.0, 16384.0, 1e7 })
    for (double eps : { 0.05, 0.25, 0.5, 1.0 }) {
      const auto g = build_beta_grid(n, eps);
      const double log_n = std::log(n);
      EXPECT_EQ(g.k_n,
                static_cast<std::size_t>(std::floor(log_n * log_n / eps)));
      ASSERT_EQ(g.betas.size(), g.k_n);
      if (g.k_n == 0)
        continue;
      EXPECT_NEAR(g.betas[0], g.k_n * eps / log_n, 1e-12);
      for (std::size_t i = 1; i < g.k_n; ++i)
        EXPECT_NEAR(g.betas[i - 1] - g.betas[i], eps / log_n, 1e-12);
      EXPECT_GE(g.betas.back(), 0.0);
    }
}

TEST(BetaGrid, WideStepIsNotAnError)
{
  const auto g = build_beta_grid(100.0, 0.9);
  EXPECT_FALSE(g.series_bound_applies);
  EXPECT_THROW(build_beta_grid(2.0, 0.5), UsageError);
  EXPECT_THROW(build_beta_grid(100.0, 0.0), UsageError);
}

TEST(PenaltyConfig, TheoryConstants)
{
  EXPECT_EQ(PenaltyConfig::theory(1).C, 2048.0);
  EXPECT_EQ(PenaltyConfig::theory(2).C, 8192.0);
  EXPECT_EQ(PenaltyConfig::theory(1, 20.0).C, 3200.0);
  EXPECT_THROW(PenaltyConfig::practical(0.5).validate(1), UsageError);
  auto cfg = PenaltyConfig::theory(1);
  cfg.C = 100.0;
  EXPECT_THROW(cfg.validate(1), UsageError);
  cfg = PenaltyConfig::theory(1);
  cfg.a = 0.5;
  EXPECT_THROW(cfg.validate(1), UsageError);
}

TEST(Penalty, Examples)
{
  EXPECT_NEAR(penalty_lambda1(3, 1000, 0.1, 1), 0.71904, 1e-12);
  EXPECT_NEAR(penalty_lambda2(3, 1000, 0.1, 1), 0.72688, 1e-12);
}

TEST(Penalty, OrderedAndPositive)
{
  for (int d = 1; d <= 3; ++d)
    for (int m = 0; m <= 20; ++m)
      for (double rho : { 1e-3, 1.0 }) {
        const double l1 = penalty_lambda1(m, 500, rho, d);
        EXPECT_GT(l1, 0.0);
        EXPECT_GT(penalty_lambda2(m, 500, rho, d), l1);
      }
}

TEST(DyadicGrid, Examples)
{
  EXPECT_EQ(dyadic_cutoff_grid(1024, 1),
            (std::vector<int>{ 1, 2, 4, 8, 16, 32, 64, 128, 256 }));
  EXPECT_EQ(dyadic_cutoff_grid(1024, 2), (std::vector<int>{ 1, 2, 4, 8 }));
  EXPECT_EQ(dyadic_cutoff_grid(5, 2), (std::vector<int>{ 1 }));
}

TEST(DyadicGrid, MaxSatisfiesDimensionCondition)
{
  for (std::size_t n : { 3u, 9u, 10u, 100u, 1024u, 16384u, 1000000u })
    for (int d = 1; d <= 4; ++d) {
      const auto g = dyadic_cutoff_grid(n, d);
      ASSERT_FALSE(g.empty());
      EXPECT_EQ(g.front(), 1);
      for (std::size_t i = 1; i < g.size(); ++i)
        EXPECT_EQ(g[i], 2 * g[i - 1]);
      if (g.size() > 1 || std::pow(3.0, d) <= n)
        EXPECT_LE(std::pow(2.0 * g.back() + 1, d), static_cast<double>(n));
      // maximal: doubling once more breaks the condition
      EXPECT_GT(std::pow(4.0 * g.back() + 1, d), static_cast<double>(n));
    }
}

// Sum over the grid plus the beta = 0 endpoint (whose rate is 1) stays under
// 4 (2 + d) eps^-1 (log n)^2 (rho'^(-1/(1+d)) + 2).
TEST(BetaGrid, RiskSeriesBound)
{
  for (double n : { 10.0, 1e3, 1e5, 1e8 })
    for (double rho : { 1e-3, 0.1, 1.0, 10.0 })
      for (int d = 1; d <= 3; ++d)
        for (double eps : { 0.1, 0.25, 0.5 }) {
          const auto g = build_beta_grid(n, eps);
          const double log_n = std::log(n);
          const double rho_prime = rho * eps / (log_n * log_n);
          double sum = 1.0;
          for (double beta : g.betas)
            sum += theoretical_rate({ n, rho_prime, beta, d }).value;
          const double bound = 4.0 * (2 + d) / eps * log_n * log_n *
                               (std::pow(rho_prime, -1.0 / (1 + d)) + 2.0);
          EXPECT_LE(sum, bound) << n << " " << rho << " " << d << " " << eps;
        }
}

PointSet
lattice_points(std::size_t count)
{
  PointSet out(1);
  for (std::size_t j = 0; j < count; ++j)
    out.push_back(std::vector<double>{ static_cast<double>(j) / count });
  return out;
}

TEST(Lepskii, IdenticalCandidatesSelectFirst)
{
  Rng data_rng(1);
  const auto data = testing::uniform_points(1, 20, data_rng);
  Rng rng(2);
  SelectionOptions opts;
  opts.disable_noise = true;
  // rho tiny: every cut-off clamps to 1.
  auto [est, trace] = lepskii_select(data, PrivacyBudget(1e-8),
                                     PenaltyConfig::practical(1.0), rng, opts);
  for (const auto& c : trace.candidates)
    EXPECT_EQ(c.cutoff, 1);
  EXPECT_EQ(trace.selected, 0u);
  EXPECT_TRUE(trace.candidates[0].accepted);
  EXPECT_EQ(est.cutoff(), 1);
}

TEST(Lepskii, SingletonGridSelectsZero)
{
  Rng data_rng(3);
  const auto data = testing::uniform_points(1, 3, data_rng);
  Rng rng(4);
  auto [est, trace] = lepskii_select(data, PrivacyBudget(1.0),
                                     PenaltyConfig::practical(1.0, 1.0, 1.0),
                                     rng);
  ASSERT_EQ(trace.candidates.size(), 1u);
  EXPECT_EQ(trace.selected, 0u);
}

TEST(Lepskii, BudgetIdentity)
{
  Rng data_rng(5);
  const auto data = testing::uniform_points(2, 400, data_rng);
  Rng rng(6);
  auto [est, trace] =
    lepskii_select(data, PrivacyBudget(2.0), PenaltyConfig::practical(3.0), rng);
  const double log_n = std::log(400.0);
  const double k_n = std::floor(log_n * log_n / 0.5);
  EXPECT_EQ(trace.candidates.size(), static_cast<std::size_t>(k_n));
  EXPECT_NEAR(trace.rho_per_candidate, 2.0 * 0.5 / (log_n * log_n), 1e-15);
  EXPECT_NEAR(trace.rho_spent, k_n * trace.rho_per_candidate, 1e-13);
  EXPECT_LE(trace.rho_spent, 2.0);
  EXPECT_NEAR(trace.rho_unspent, 2.0 - trace.rho_spent, 1e-15);
  ASSERT_TRUE(est.rho_spent);
  EXPECT_EQ(est.rho_spent->rho(), trace.rho_per_candidate);
}

TEST(Lepskii, ReplayAndDeterminism)
{
  for (std::uint64_t seed : { 1u, 2u, 3u, 4u }) {
    Rng data_rng(seed);
    const auto data = testing::uniform_points(1, 2000, data_rng);
    for (double C : { 1.0, 4.0, 50.0 }) {
      Rng a(seed + 100), b(seed + 100);
      auto [ea, ta] = lepskii_select(data, PrivacyBudget(1.0),
                                     PenaltyConfig::practical(C), a);
      auto [eb, tb] = lepskii_select(data, PrivacyBudget(1.0),
                                     PenaltyConfig::practical(C), b);
      EXPECT_EQ(replay_lepskii(ta), ta.selected);
      EXPECT_EQ(ta.selected, tb.selected);
      EXPECT_EQ(ea.coeffs, eb.coeffs);
      // the selected fit is the recorded candidate's cut-off
      EXPECT_EQ(ea.cutoff(), ta.candidates[ta.selected].cutoff);
    }
  }
}

TEST(Lepskii, DistancesMatchRecomputation)
{
  Rng data_rng(9);
  const auto data = testing::uniform_points(1, 500, data_rng);
  Rng rng(10);
  std::vector<ProjectionEstimate> fits;
  SelectionOptions opts;
  opts.keep_candidates = &fits;
  auto [est, trace] = lepskii_select(data, PrivacyBudget(1.0),
                                     PenaltyConfig::practical(20.0), rng, opts);
  ASSERT_EQ(fits.size(), trace.candidates.size());
  for (const auto& c : trace.candidates) {
    if (!c.evaluated)
      continue;
    for (std::size_t j = 0; j < c.distances.size(); ++j) {
      const auto& other = fits[c.index + j];
      double direct = 0.0;
      const int big = std::max(fits[c.index].cutoff(), other.cutoff());
      const auto a = project(fits[c.index].coeffs, big);
      const auto b = project(other.coeffs, big);
      for (std::size_t i = 0; i < a.size(); ++i)
        direct += std::norm(a[i] - b[i]);
      EXPECT_NEAR(c.distances[j], direct, 1e-12 * (1 + direct));
    }
  }
}

TEST(PenalizedBias, SingletonGrid)
{
  Rng data_rng(11);
  const auto data = testing::uniform_points(1, 100, data_rng);
  Rng rng(12), ref(12);
  auto [est, trace] =
    penalized_bias_select(data, PrivacyBudget(1.0), { 5 }, rng);
  EXPECT_EQ(est.cutoff(), 5);
  BudgetLedger ledger;
  EXPECT_EQ(est.coeffs, fit(data, 5, PrivacyBudget(1.0), ref, ledger).coeffs);
}

TEST(PenalizedBias, NoiseFreeLatticeTiesToSmallest)
{
  const auto data = lattice_points(64);
  Rng rng(13);
  SelectionOptions opts;
  opts.disable_noise = true;
  const std::vector<int> grid{ 8, 1, 4, 2 };
  auto [est, trace] =
    penalized_bias_select(data, PrivacyBudget(1.0), grid, rng, opts);
  EXPECT_EQ(est.cutoff(), 1);
  EXPECT_EQ(trace.selected, 0u);
  double min_lambda1 = INFINITY;
  for (int m : { 1, 2, 4, 8 })
    min_lambda1 = std::min(min_lambda1, penalty_lambda1(m, 64, 0.25, 1));
  for (const auto& c : trace.candidates)
    EXPECT_NEAR(c.bias_sq, -min_lambda1, 1e-12);
}

TEST(PenalizedBias, SigmaUsesPerModelBudget)
{
  Rng data_rng(14);
  const auto data = testing::uniform_points(2, 300, data_rng);
  Rng rng(15);
  auto [est, trace] =
    penalized_bias_select(data, PrivacyBudget(0.9), { 1, 2, 3 }, rng);
  EXPECT_NEAR(trace.rho_per_candidate, 0.3, 1e-16);
  EXPECT_NEAR(est.sigma.sigma(),
              2.0 * std::sqrt(std::pow(2.0 * est.cutoff() + 1, 2)) /
                (300 * std::sqrt(0.3)),
              1e-15);
}

TEST(PenalizedBias, BudgetSpentExactly)
{
  Rng data_rng(16);
  const auto data = testing::uniform_points(1, 1024, data_rng);
  for (double rho : { 0.1, 1.0, 3.3 }) {
    Rng rng(17);
    auto [est, trace] = penalized_bias_select(data, PrivacyBudget(rho),
                                              dyadic_cutoff_grid(1024, 1), rng);
    EXPECT_LE(std::abs(std::bit_cast<std::int64_t>(trace.rho_spent) -
                       std::bit_cast<std::int64_t>(rho)),
              1);
  }
}

TEST(PenalizedBias, BiasLowerBoundReplayAndDeterminism)
{
  for (std::uint64_t seed : { 21u, 22u, 23u }) {
    Rng data_rng(seed);
    const auto data = testing::uniform_points(1, 1024, data_rng);
    const auto grid = dyadic_cutoff_grid(1024, 1);
    Rng a(seed), b(seed);
    auto [ea, ta] = penalized_bias_select(data, PrivacyBudget(1.0), grid, a);
    auto [eb, tb] = penalized_bias_select(data, PrivacyBudget(1.0), grid, b);
    EXPECT_EQ(ta.selected, tb.selected);
    EXPECT_EQ(ea.coeffs, eb.coeffs);
    EXPECT_EQ(replay_penalized_bias(ta), ta.selected);
    double min_lambda1 = INFINITY;
    for (const auto& c : ta.candidates)
      min_lambda1 = std::min(min_lambda1, c.lambda1);
    for (const auto& c : ta.candidates) {
      EXPECT_TRUE(std::isfinite(c.bias_sq));
      EXPECT_GE(c.bias_sq, -min_lambda1);
      EXPECT_GE(ta.candidates[ta.selected].criterion, 0.0);
      EXPECT_LE(ta.candidates[ta.selected].criterion, c.criterion);
    }
  }
}

TEST(SelectionTrace, Json)
{
  Rng data_rng(30);
  const auto data = testing::uniform_points(1, 200, data_rng);
  Rng rng(31);
  auto [e1, lepskii] =
    lepskii_select(data, PrivacyBudget(1.0), PenaltyConfig::practical(2.0), rng);
  nlohmann::json j = lepskii;
  EXPECT_EQ(j.at("rule"), "lepskii");
  EXPECT_EQ(j.at("selected"), lepskii.selected);
  EXPECT_TRUE(j.at("candidates")[0].contains("beta"));
  auto [e2, bias] =
    penalized_bias_select(data, PrivacyBudget(1.0), { 1, 2 }, rng);
  nlohmann::json k = bias;
  EXPECT_EQ(k.at("rule"), "penalized-bias");
  EXPECT_TRUE(k.at("candidates")[1].contains("criterion"));
}

} // namespace
} // namespace dpfourier
