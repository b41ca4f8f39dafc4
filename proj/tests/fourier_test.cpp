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

#include <dpfourier/fourier.hpp>

#include "oracles.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace dpfourier {
namespace {

using testing::naive_eval;
using testing::random_grid;
using testing::uniform_points;

TEST(EvalBasis, KnownValues)
{
  auto a = eval_basis(MultiIndex{ 0 }, Point{ 0.37 });
  EXPECT_NEAR(a.real(), 1.0, 1e-15);
  EXPECT_NEAR(a.imag(), 0.0, 1e-15);

  auto b = eval_basis(MultiIndex{ 1, 0 }, Point{ 0.25, 0.5 });
  EXPECT_NEAR(b.real(), 0.0, 1e-15);
  EXPECT_NEAR(b.imag(), 1.0, 1e-15);

  auto c = eval_basis(MultiIndex{ 2 }, Point{ 0.5 });
  EXPECT_NEAR(c.real(), 1.0, 1e-15);
  EXPECT_NEAR(c.imag(), 0.0, 1e-15);
}

TEST(EvalBasis, UnitModulus)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> freq(-50, 50);
  for (int t = 0; t < 1000; ++t) {
    MultiIndex k{ freq(rng), freq(rng), freq(rng) };
    Point x{ unit(rng), unit(rng), unit(rng) };
    EXPECT_NEAR(std::abs(eval_basis(k, x)), 1.0, 1e-14);
  }
}

TEST(EvalBasis, DimensionMismatchIsUsageError)
{
  EXPECT_THROW(eval_basis(MultiIndex{ 1, 2 }, Point{ 0.5 }), UsageError);
}

TEST(CoefficientGrid, LexicographicLayout)
{
  CoefficientGrid g(2, 1);
  ASSERT_EQ(g.size(), 9u);
  EXPECT_EQ(g.multi_index(0), (MultiIndex{ -1, -1 }));
  EXPECT_EQ(g.multi_index(1), (MultiIndex{ -1, 0 }));
  EXPECT_EQ(g.multi_index(3), (MultiIndex{ 0, -1 }));
  EXPECT_EQ(g.multi_index(8), (MultiIndex{ 1, 1 }));
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(g.index_of(g.multi_index(i)), i);
    auto k = g.multi_index(i);
    for (auto& v : k)
      v = -v;
    EXPECT_EQ(g.index_of(k), g.mirror(i));
  }
  EXPECT_EQ(g.zero_index(), 4u);
  EXPECT_THROW(g.index_of(MultiIndex{ 2, 0 }), UsageError);
  EXPECT_EQ(CoefficientGrid(3, 2).size(), 125u);
}

TEST(EmpiricalCoefficients, PointAtOrigin)
{
  PointSet data(1, { 0.0 });
  auto g = empirical_coefficients(data, 2);
  ASSERT_EQ(g.size(), 5u);
  for (const auto& v : g.values()) {
    EXPECT_DOUBLE_EQ(v.real(), 1.0);
    EXPECT_DOUBLE_EQ(v.imag(), 0.0);
  }
}

TEST(EmpiricalCoefficients, PointAtHalf)
{
  PointSet data(1, { 0.5 });
  auto g = empirical_coefficients(data, 1);
  EXPECT_NEAR(g.at(MultiIndex{ -1 }).real(), -1.0, 1e-15);
  EXPECT_NEAR(g.at(MultiIndex{ 0 }).real(), 1.0, 0.0);
  EXPECT_NEAR(g.at(MultiIndex{ 1 }).real(), -1.0, 1e-15);
  EXPECT_NEAR(g.at(MultiIndex{ 1 }).imag(), 0.0, 1e-15);
}

TEST(EmpiricalCoefficients, MatchesDirectDefinition)
{
  std::mt19937_64 rng(11);
  for (int d = 1; d <= 3; ++d) {
    auto data = uniform_points(d, 37, rng);
    const int cutoff = d == 3 ? 2 : 40; // 40 crosses the phase re-anchor
    auto g = empirical_coefficients(data, cutoff);
    for (std::size_t i = 0; i < g.size(); i += 7) {
      const auto k = g.multi_index(i);
      std::complex<double> expected(0.0, 0.0);
      for (std::size_t j = 0; j < data.size(); ++j)
        expected += std::conj(eval_basis(k, data[j]));
      expected /= static_cast<double>(data.size());
      EXPECT_NEAR(std::abs(g[i] - expected), 0.0, 1e-13) << "d=" << d;
    }
  }
}

TEST(EmpiricalCoefficients, UniformSampleIsSmall)
{
  std::mt19937_64 rng(2024);
  const std::size_t n = 100000;
  auto data = uniform_points(1, n, rng);
  auto g = empirical_coefficients(data, 3);
  EXPECT_DOUBLE_EQ(g[g.zero_index()].real(), 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i == g.zero_index())
      continue;
    EXPECT_LE(std::abs(g[i]), 4.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST(EmpiricalCoefficients, CutoffZeroAndErrors)
{
  PointSet data(2, { 0.1, 0.9, 0.3, 0.4 });
  auto g = empirical_coefficients(data, 0);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_DOUBLE_EQ(g[0].real(), 1.0);
  EXPECT_THROW(empirical_coefficients(PointSet(1), 2), UsageError);
  EXPECT_THROW(empirical_coefficients(PointSet(1, { 1.5 }), 2), UsageError);
}

// Hermitian symmetry and |theta_k| <= 1 for arbitrary data.
TEST(EmpiricalCoefficients, HermitianAndBounded)
{
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 3;
    const int cutoff = d == 1 ? 70 : d == 2 ? 6 : 3;
    auto data = uniform_points(d, 1 + trial * 13, rng);
    auto g = empirical_coefficients(data, cutoff);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_LE(std::abs(g[g.mirror(i)] - std::conj(g[i])), 1e-12);
      EXPECT_LE(std::abs(g[i]), 1.0 + 1e-12);
    }
  }
}

// Var(theta~_k) <= 1/n over R = 2000 uniform data sets.
TEST(EmpiricalCoefficients, MonteCarloVarianceBound)
{
  std::mt19937_64 rng(77);
  const std::size_t n = 50;
  const std::size_t reps = 2000;
  const int cutoff = 3;
  std::vector<std::vector<double>> re(7), im(7);
  for (std::size_t r = 0; r < reps; ++r) {
    auto g = empirical_coefficients(uniform_points(1, n, rng), cutoff);
    for (std::size_t i = 0; i < g.size(); ++i) {
      re[i].push_back(g[i].real());
      im[i].push_back(g[i].imag());
    }
  }
  const double bound = (1.0 / n) * (1.0 + 5.0 / std::sqrt(double(reps)));
  for (std::size_t i = 0; i < 7; ++i) {
    if (i == 3)
      continue;
    // E|theta - E theta|^2 = Var(re) + Var(im)
    const double var =
      testing::sample_variance(re[i]) + testing::sample_variance(im[i]);
    EXPECT_LE(var, bound) << "k=" << static_cast<int>(i) - 3;
  }
}

TEST(Project, IdentityIdempotenceRestriction)
{
  std::mt19937_64 rng(8);
  auto g = random_grid(1, 3, rng);
  EXPECT_EQ(project(g, 3), g);
  EXPECT_EQ(project(project(g, 2), 2), project(g, 2));

  CoefficientGrid h(1, 2, { { 1, 0 }, { 2, 0 }, { 3, 0 }, { 4, 0 }, { 5, 0 } });
  auto r = project(h, 1);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], Complex(2, 0));
  EXPECT_EQ(r[1], Complex(3, 0));
  EXPECT_EQ(r[2], Complex(4, 0));
}

TEST(Project, ZeroPadsInHigherDimensions)
{
  std::mt19937_64 rng(9);
  auto g = random_grid(2, 1, rng);
  auto big = project(g, 3);
  ASSERT_EQ(big.cutoff(), 3);
  for (std::size_t i = 0; i < big.size(); ++i) {
    const auto k = big.multi_index(i);
    if (g.contains(k))
      EXPECT_EQ(big[i], g.at(k));
    else
      EXPECT_EQ(big[i], Complex(0, 0));
  }
  EXPECT_EQ(project(big, 1), g);
  EXPECT_THROW(project(g, -1), UsageError);
}

TEST(Project, IsAContraction)
{
  std::mt19937_64 rng(10);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + t % 2;
    auto a = random_grid(d, 1 + t % 4, rng);
    auto b = random_grid(d, 1 + (t / 4) % 4, rng);
    for (int m = 0; m <= 5; ++m)
      EXPECT_LE(l2_distance_sq(project(a, m), project(b, m)),
                l2_distance_sq(a, b) + 1e-12);
  }
}

TEST(L2DistanceSq, SimpleCases)
{
  std::mt19937_64 rng(12);
  auto a = random_grid(2, 2, rng);
  EXPECT_EQ(l2_distance_sq(a, a), 0.0);
  CoefficientGrid e1(1, 1, { { 0, 0 }, { 1, 0 }, { 0, 0 } });
  EXPECT_DOUBLE_EQ(l2_distance_sq(e1, CoefficientGrid(1, 1)), 1.0);
  EXPECT_THROW(l2_distance_sq(CoefficientGrid(1, 1), CoefficientGrid(2, 1)),
               UsageError);
}

TEST(L2DistanceSq, DifferentCutoffsUseUnionOfSupports)
{
  std::mt19937_64 rng(13);
  auto a = random_grid(2, 1, rng);
  auto b = random_grid(2, 3, rng);
  EXPECT_NEAR(l2_distance_sq(a, b), l2_distance_sq(project(a, 3), b), 1e-12);
  EXPECT_NEAR(l2_distance_sq(a, b), l2_distance_sq(b, a), 1e-12);
}

// Oracle: 4096-point trapezoid of |f_a - f_b|^2, by direct evaluation.
TEST(L2DistanceSq, MatchesQuadrature)
{
  std::mt19937_64 rng(14);
  for (int t = 0; t < 10; ++t) {
    auto a = random_grid(1, 3, rng);
    auto b = random_grid(1, 3, rng);
    const double quad = testing::trapezoid_01(4097, [&](double x) {
      return std::norm(naive_eval(a, { x }) - naive_eval(b, { x }));
    });
    EXPECT_NEAR(l2_distance_sq(a, b), quad, 1e-8);
  }
}

// ||g||^2 against tensor trapezoid of |sum g_k phi_k|^2 at 1024 points/axis.
TEST(L2DistanceSq, ParsevalConsistency)
{
  std::mt19937_64 rng(15);
  const CoefficientGrid zero1(1, 0), zero2(2, 0);
  for (int t = 0; t < 6; ++t) {
    const int d = 1 + t % 2;
    const int cutoff = d == 1 ? 4 : 1 + t % 3;
    auto g = random_grid(d, cutoff, rng);
    const int res = d == 1 ? 4096 : 1024;
    const double quad = testing::periodic_trapezoid(
      d, res, [&](const std::vector<double>& x) {
        return std::norm(evaluate_complex(g, x));
      });
    EXPECT_NEAR(l2_distance_sq(g, d == 1 ? zero1 : zero2), quad, 1e-6);
  }
}

TEST(Evaluate, KnownValues)
{
  CoefficientGrid uniform(2, 0, { { 1, 0 } });
  EXPECT_DOUBLE_EQ(evaluate(uniform, Point{ 0.3, 0.8 }), 1.0);

  CoefficientGrid g(1, 1, { { 0.5, 0 }, { 1, 0 }, { 0.5, 0 } });
  EXPECT_NEAR(evaluate(g, Point{ 0.0 }), 2.0, 1e-15);
  EXPECT_NEAR(evaluate(g, Point{ 0.5 }), 0.0, 1e-15);
}

TEST(Evaluate, RealPartAndResidualOfNonHermitianGrid)
{
  std::mt19937_64 rng(16);
  for (int t = 0; t < 20; ++t) {
    const int d = 1 + t % 2;
    auto g = random_grid(d, 2, rng, 0.1);
    Point x{ 0.1 * t, 0.37 };
    x.resize(d);
    const auto direct = naive_eval(g, x);
    EXPECT_NEAR(evaluate(g, x), direct.real(), 1e-12);
    EXPECT_NEAR(imaginary_residual(g, x), std::abs(direct.imag()), 1e-12);
  }
}

TEST(Evaluate, HermitianSymmetrizeKillsResidual)
{
  std::mt19937_64 rng(17);
  auto g = hermitian_symmetrize(random_grid(2, 2, rng));
  EXPECT_TRUE(is_hermitian(g));
  EXPECT_NEAR(imaginary_residual(g, Point{ 0.21, 0.64 }), 0.0, 1e-12);
}

TEST(CoefficientGridJson, RoundTripIsBitExact)
{
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> wild(-1e300, 1e300);
  for (int d = 1; d <= 3; ++d) {
    auto g = random_grid(d, 2, rng);
    g[0] = Complex(wild(rng), std::numeric_limits<double>::denorm_min());
    g[1] = Complex(0.1 + 0.2, -std::numeric_limits<double>::min());
    nlohmann::json j = g;
    const auto text = j.dump();
    CoefficientGrid back = nlohmann::json::parse(text).get<CoefficientGrid>();
    ASSERT_EQ(back.dim(), d);
    ASSERT_EQ(back.cutoff(), 2);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_EQ(std::bit_cast<std::uint64_t>(g[i].real()),
                std::bit_cast<std::uint64_t>(back[i].real()));
      EXPECT_EQ(std::bit_cast<std::uint64_t>(g[i].imag()),
                std::bit_cast<std::uint64_t>(back[i].imag()));
    }
  }
}

TEST(CoefficientGridJson, RejectsWrongLength)
{
  auto j = nlohmann::json::parse(
    R"({"d": 1, "M": 1, "re": [1, 2], "im": [0, 0]})");
  EXPECT_THROW(j.get<CoefficientGrid>(), UsageError);
}

} // namespace
} // namespace dpfourier
