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

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dpfourier {

//! Smooth bump exp(-1 / (1 - |x|^2)) on the open unit ball, 0 elsewhere.
inline double
bump_psi(std::span<const double> x)
{
  double r2 = 0.0;
  for (double v : x)
    r2 += v * v;
  if (r2 >= 1.0)
    return 0.0;
  return std::exp(-1.0 / (1.0 - r2));
}

//! Closed form 2^(2s) 3^(-s) / (1 - 2^(-2s)) of the Fourier-tail constant
//! for fractional Hölder exponent s in (0, 1).
inline double
holder_tail_constant(double s)
{
  if (!(s > 0.0 && s < 1.0))
    throw UsageError("holder_tail_constant: s must lie in (0, 1)");
  return std::pow(2.0, 2.0 * s) * std::pow(3.0, -s) /
         (1.0 - std::pow(2.0, -2.0 * s));
}

//! Sobolev weight of an angular frequency vector xi for smoothness beta:
//!   h_{floor(beta)}(xi_1^2, ..., xi_d^2) * |xi|_inf^(2 s),  s = beta - floor(beta)
//! where h_m is the complete homogeneous symmetric polynomial, i.e.
//! sum_{|alpha| = m} prod_i xi_i^(2 alpha_i). For integer beta this is the
//! Fourier multiplier of sum_{|alpha|=beta} ||d^alpha f||^2; it is always
//! >= |xi|_inf^(2 beta).
inline double
sobolev_weight(std::span<const double> xi, double beta)
{
  const int order = static_cast<int>(std::floor(beta));
  const double frac = beta - order;
  // h[j] = complete homogeneous polynomial of degree j in the variables seen
  // so far.
  std::vector<double> h(order + 1, 0.0);
  h[0] = 1.0;
  double inf_norm = 0.0;
  for (double x : xi) {
    const double x2 = x * x;
    inf_norm = std::max(inf_norm, std::abs(x));
    for (int j = 1; j <= order; ++j)
      h[j] += x2 * h[j - 1];
  }
  double w = h[order];
  if (frac > 0.0)
    w *= std::pow(inf_norm, 2.0 * frac);
  return w;
}

//! sum_k w(2 pi k) |theta_k|^2.
inline double
sobolev_budget(const CoefficientGrid& grid, double beta)
{
  double total = 0.0;
  std::vector<double> xi(grid.dim());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == Complex(0.0, 0.0))
      continue;
    const auto k = grid.multi_index(i);
    for (int j = 0; j < grid.dim(); ++j)
      xi[j] = kTwoPi * k[j];
    total += sobolev_weight(xi, beta) * std::norm(grid[i]);
  }
  return total;
}

//! Lattice points per axis used for positivity certification and
//! quadrature-based errors.
inline int
lattice_resolution(int d)
{
  switch (d) {
    case 1:
      return 1 << 10;
    case 2:
      return 1 << 7;
    case 3:
      return 1 << 5;
    default:
      return 1 << 4;
  }
}

//! Calls fn(point) for every point j / res, j in {0..res-1}^d.
template<class Fn>
void
for_each_lattice_point(int d, int res, Fn&& fn)
{
  std::vector<int> idx(d, 0);
  Point x(d, 0.0);
  const std::size_t total = ipow(res, d);
  for (std::size_t t = 0; t < total; ++t) {
    for (int i = 0; i < d; ++i)
      x[i] = static_cast<double>(idx[i]) / res;
    fn(std::span<const double>(x));
    for (int axis = d - 1; axis >= 0; --axis) {
      if (++idx[axis] < res)
        break;
      idx[axis] = 0;
    }
  }
}

//! Periodic density with finitely many Fourier coefficients.
struct TrigDensity
{
  CoefficientGrid coeffs; // Hermitian, theta_0 = 1
  double beta = 1.0;
  double L = 2.0;
  double min_value = 1.0; // certified lower bound on [0,1]^d

  int dim() const { return coeffs.dim(); }
  double value(std::span<const double> x) const { return evaluate(coeffs, x); }
  double sup_bound() const { return l1_norm(coeffs); }
};

//! Certified lower bound on a real trigonometric polynomial over [0,1]^d:
//! the better of 1 - sum_{k != 0} |theta_k| (valid when theta_0 = 1) and the
//! lattice minimum minus a Lipschitz slack (half the lattice spacing times
//! sum_k |theta_k| 2 pi |k|_1).
inline double
certify_minimum(const CoefficientGrid& coeffs)
{
  const int d = coeffs.dim();
  const int res = lattice_resolution(d);
  double lattice_min = std::numeric_limits<double>::infinity();
  for_each_lattice_point(d, res, [&](std::span<const double> x) {
    lattice_min = std::min(lattice_min, evaluate(coeffs, x));
  });
  double lipschitz = 0.0;
  double tail = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (i == coeffs.zero_index())
      continue;
    const auto k = coeffs.multi_index(i);
    double k1 = 0.0;
    for (int ki : k)
      k1 += std::abs(ki);
    lipschitz += std::abs(coeffs[i]) * kTwoPi * k1;
    tail += std::abs(coeffs[i]);
  }
  const double lattice_bound = lattice_min - lipschitz * 0.5 / res;
  const double head = coeffs[coeffs.zero_index()].real() - tail;
  return std::max(lattice_bound, head);
}

//! Random trigonometric-polynomial density of nominal smoothness beta.
//!
//! Coefficients on {-M..M}^d get |theta_k| = u_k (1 + |k|_inf)^-(beta + d/2
//! + 0.51), u_k ~ U(0.5, 1), uniform random phases and Hermitian pairing;
//! the whole non-constant part is rescaled to a Sobolev budget of 0.9 L^2
//! and then damped by 0.8 until a minimum >= 0.01 is certified.
inline TrigDensity
make_trig_density(double beta, double L, int M_truth, int d, Rng& rng)
{
  if (!(beta > 0.0))
    throw UsageError("make_trig_density: beta must be > 0");
  if (!(L > 1.0))
    throw UsageError("make_trig_density: L must be > 1");
  if (M_truth < 0 || d < 1)
    throw UsageError("make_trig_density: need M >= 0 and d >= 1");
  TrigDensity out;
  out.beta = beta;
  out.L = L;
  out.coeffs = CoefficientGrid(d, M_truth);
  const std::size_t zero = out.coeffs.zero_index();
  out.coeffs[zero] = Complex(1.0, 0.0);
  if (M_truth == 0) {
    out.min_value = 1.0;
    return out;
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double decay = beta + 0.5 * d + 0.51;
  for (std::size_t i = zero + 1; i < out.coeffs.size(); ++i) {
    const auto k = out.coeffs.multi_index(i);
    int kinf = 0;
    for (int ki : k)
      kinf = std::max(kinf, std::abs(ki));
    const double amp = (0.5 + 0.5 * unit(rng)) * std::pow(1.0 + kinf, -decay);
    const double phase = kTwoPi * unit(rng);
    out.coeffs[i] = std::polar(amp, phase);
    out.coeffs[out.coeffs.mirror(i)] = std::conj(out.coeffs[i]);
  }

  auto scale_nonconstant = [&](double factor) {
    for (std::size_t i = 0; i < out.coeffs.size(); ++i)
      if (i != zero)
        out.coeffs[i] *= factor;
  };
  scale_nonconstant(std::sqrt(0.9 * L * L / sobolev_budget(out.coeffs, beta)));

  constexpr int kMaxDamping = 64;
  for (int step = 0; step <= kMaxDamping; ++step) {
    out.min_value = certify_minimum(out.coeffs);
    if (out.min_value >= 0.01)
      return out;
    scale_nonconstant(0.8);
  }
  throw RuntimeError("make_trig_density: could not certify positivity");
}

//! Exact squared bias sum_{k not in {-M..M}^d} |theta_k|^2.
inline double
exact_bias(const TrigDensity& truth, int cutoff)
{
  if (cutoff < 0)
    throw UsageError("exact_bias: cut-off must be >= 0");
  if (cutoff >= truth.coeffs.cutoff())
    return 0.0;
  return l2_distance_sq(truth.coeffs, project(truth.coeffs, cutoff));
}

namespace detail {

//! Integrals of Psi and Psi^2 over the unit ball of R^d (radial
//! Gauss-Kronrod, cached per dimension).
struct BumpIntegrals
{
  double mass;
  double energy;
};

inline BumpIntegrals
bump_integrals(int d)
{
  static std::mutex mu;
  static std::map<int, BumpIntegrals> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(d); it != cache.end())
    return it->second;
  using boost::math::quadrature::gauss_kronrod;
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * d) /
                        std::tgamma(0.5 * d);
  auto radial = [d](double r, double power) {
    if (r >= 1.0)
      return 0.0;
    return std::pow(r, d - 1) * std::exp(-power / (1.0 - r * r));
  };
  const double mass = gauss_kronrod<double, 61>::integrate(
    [&](double r) { return radial(r, 1.0); }, 0.0, 1.0, 15, 1e-13);
  const double energy = gauss_kronrod<double, 61>::integrate(
    [&](double r) { return radial(r, 2.0); }, 0.0, 1.0, 15, 1e-13);
  BumpIntegrals out{ sphere * mass, sphere * energy };
  cache.emplace(d, out);
  return out;
}

//! In-place DFT along one axis of a row-major cube of side n.
inline void
dft_axis(std::vector<Complex>& data, int d, int n, int axis)
{
  std::size_t stride = ipow(n, d - 1 - axis);
  const std::size_t block = stride * n;
  std::vector<Complex> twiddle(n), line(n), out(n);
  for (int j = 0; j < n; ++j)
    twiddle[j] = std::polar(1.0, -kTwoPi * j / n);
  for (std::size_t base = 0; base < data.size(); base += block) {
    for (std::size_t off = 0; off < stride; ++off) {
      for (int j = 0; j < n; ++j)
        line[j] = data[base + off + j * stride];
      for (int k = 0; k < n; ++k) {
        Complex acc(0.0, 0.0);
        for (int j = 0; j < n; ++j)
          acc += line[j] * twiddle[(static_cast<long long>(j) * k) % n];
        out[k] = acc;
      }
      for (int k = 0; k < n; ++k)
        data[base + off + k * stride] = out[k];
    }
  }
}

} // namespace detail

//! Sobolev energy (weight sobolev_weight) of x -> Psi(x / 2) over R^d,
//! computed spectrally on the periodic box [-2, 2)^d that contains its
//! support.
inline double
bump_sobolev_energy(double beta, int d)
{
  const int n = d == 1 ? 1024 : d == 2 ? 128 : d == 3 ? 32 : 16;
  const double period = 4.0;
  const std::size_t total = ipow(n, d);
  std::vector<Complex> samples(total);
  std::vector<int> idx(d, 0);
  Point x(d);
  for (std::size_t t = 0; t < total; ++t) {
    for (int i = 0; i < d; ++i)
      x[i] = (-2.0 + period * idx[i] / n) / 2.0;
    samples[t] = Complex(bump_psi(x), 0.0);
    for (int axis = d - 1; axis >= 0; --axis) {
      if (++idx[axis] < n)
        break;
      idx[axis] = 0;
    }
  }
  for (int axis = 0; axis < d; ++axis)
    detail::dft_axis(samples, d, n, axis);
  const double norm = 1.0 / static_cast<double>(total);
  double energy = 0.0;
  std::fill(idx.begin(), idx.end(), 0);
  std::vector<double> xi(d);
  for (std::size_t t = 0; t < total; ++t) {
    for (int i = 0; i < d; ++i) {
      const int k = idx[i] <= n / 2 ? idx[i] : idx[i] - n;
      xi[i] = kTwoPi * k / period;
    }
    energy += sobolev_weight(xi, beta) * std::norm(samples[t] * norm);
    for (int axis = d - 1; axis >= 0; --axis) {
      if (++idx[axis] < n)
        break;
      idx[axis] = 0;
    }
  }
  return energy * std::pow(period, d);
}

//! Bump-perturbed uniform density
//!   f(x) = 1 + h^beta sum_i theta_i psi((x - p_i) / h) - |theta|_1 gamma h^(beta+d)
//! with psi = a Psi(. / 2), centres p_i on {1/(m+1), ..., m/(m+1)}^d.
struct PackingDensity
{
  std::vector<std::uint8_t> theta; // m^d bits, lexicographic centre order
  int m = 1;
  int d = 1;
  double beta = 1.0;
  double L = 1.0;
  bool halved_h = false;
  double a = 1.0;     // amplitude of psi
  double gamma = 0.0; // integral of psi
  double delta = 0.0; // integral of psi^2
  double h = 0.0;

  int dim() const { return d; }

  double psi(std::span<const double> u) const
  {
    Point half(u.begin(), u.end());
    for (double& v : half)
      v *= 0.5;
    return a * bump_psi(half);
  }

  std::size_t ones() const
  {
    return static_cast<std::size_t>(
      std::count(theta.begin(), theta.end(), std::uint8_t{ 1 }));
  }

  double offset() const
  {
    return static_cast<double>(ones()) * gamma * std::pow(h, beta + d);
  }

  double value(std::span<const double> x) const
  {
    // Supports are disjoint, so only the nearest centre can contribute.
    std::size_t flat = 0;
    Point u(d);
    for (int i = 0; i < d; ++i) {
      long long j = std::llround(x[i] * (m + 1));
      j = std::clamp<long long>(j, 1, m);
      flat = flat * m + static_cast<std::size_t>(j - 1);
      u[i] = (x[i] - static_cast<double>(j) / (m + 1)) / h;
    }
    double bump = theta[flat] ? psi(u) : 0.0;
    return 1.0 + std::pow(h, beta) * bump - offset();
  }

  double sup_bound() const
  {
    return 1.0 + std::pow(h, beta) * a * std::exp(-1.0);
  }
};

//! Builds f_theta. The amplitude a makes the Sobolev energy of psi equal to
//! L^2; h = min{1/(gamma (m+1)), 1/(4(m+1))}, or with `halve_h` the stricter
//! min{1/(2 gamma (m+1)), 1/(4(m+1))} that keeps f >= 1/2.
inline PackingDensity
make_packing_density(std::vector<std::uint8_t> theta,
                     int m,
                     double beta,
                     int d,
                     double L,
                     bool halve_h = false)
{
  if (m < 1 || d < 1)
    throw UsageError("make_packing_density: need m >= 1 and d >= 1");
  if (!(beta > 0.0) || !(L > 0.0))
    throw UsageError("make_packing_density: need beta > 0 and L > 0");
  if (theta.size() != ipow(m, d))
    throw UsageError("make_packing_density: theta must have m^d entries");
  for (auto t : theta)
    if (t > 1)
      throw UsageError("make_packing_density: theta entries must be 0 or 1");
  PackingDensity f;
  f.theta = std::move(theta);
  f.m = m;
  f.d = d;
  f.beta = beta;
  f.L = L;
  f.halved_h = halve_h;
  f.a = L / std::sqrt(bump_sobolev_energy(beta, d));
  const auto ints = detail::bump_integrals(d);
  const double scale = std::pow(2.0, d); // psi = a Psi(./2)
  f.gamma = f.a * scale * ints.mass;
  f.delta = f.a * f.a * scale * ints.energy;
  const double g = halve_h ? 2.0 * f.gamma : f.gamma;
  f.h = std::min(1.0 / (g * (m + 1)), 1.0 / (4.0 * (m + 1)));
  f.h = std::min(f.h, 1.0);
  return f;
}

struct UniformDensity
{
  int d = 1;
  int dim() const { return d; }
  double value(std::span<const double>) const { return 1.0; }
  double sup_bound() const { return 1.0; }
};

//! Ground-truth density fixtures.
using DensitySpec = std::variant<UniformDensity, TrigDensity, PackingDensity>;

inline int
density_dim(const DensitySpec& spec)
{
  return std::visit([](const auto& f) { return f.dim(); }, spec);
}

inline double
density_value(const DensitySpec& spec, std::span<const double> x)
{
  return std::visit([&](const auto& f) { return f.value(x); }, spec);
}

inline double
density_sup_bound(const DensitySpec& spec)
{
  return std::visit([](const auto& f) { return f.sup_bound(); }, spec);
}

//! Exact Fourier coefficients when the fixture has finitely many.
inline std::optional<CoefficientGrid>
density_coefficients(const DensitySpec& spec)
{
  if (const auto* t = std::get_if<TrigDensity>(&spec))
    return t->coeffs;
  if (const auto* u = std::get_if<UniformDensity>(&spec)) {
    CoefficientGrid g(u->d, 0);
    g[0] = Complex(1.0, 0.0);
    return g;
  }
  return std::nullopt;
}

//! n i.i.d. draws from `density` on [0,1]^d by rejection from the uniform
//! proposal: accept x when U * bound <= density(x). Requires
//! bound >= sup density; acceptance probability per proposal is mass/bound.
template<class Density>
PointSet
rejection_sample(Density&& density,
                 int d,
                 double bound,
                 std::size_t n,
                 Rng& rng,
                 std::size_t max_proposals = 0)
{
  if (!(bound > 0.0) || !std::isfinite(bound))
    throw UsageError("rejection_sample: bound must be positive and finite");
  if (d < 1)
    throw UsageError("rejection_sample: need d >= 1");
  if (max_proposals == 0)
    max_proposals = std::max<std::size_t>(1000000, 10000 * n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointSet out(d);
  out.reserve(n);
  Point x(d);
  std::size_t proposals = 0;
  while (out.size() < n) {
    if (++proposals > max_proposals)
      throw RuntimeError("rejection_sample: acceptance rate too low");
    for (int i = 0; i < d; ++i)
      x[i] = unit(rng);
    const double u = unit(rng);
    if (u * bound <= density(std::span<const double>(x)))
      out.push_back(x);
  }
  return out;
}

inline PointSet
rejection_sample(const DensitySpec& spec, std::size_t n, Rng& rng)
{
  return std::visit(
    [&](const auto& f) {
      return rejection_sample(
        [&f](std::span<const double> x) { return f.value(x); }, f.dim(),
        f.sup_bound(), n, rng);
    },
    spec);
}

// JSON: {"kind": "uniform"|"trig"|"packing", ...}.

inline void
to_json(nlohmann::json& j, const DensitySpec& spec)
{
  std::visit(
    [&j](const auto& f) {
      using T = std::decay_t<decltype(f)>;
      if constexpr (std::is_same_v<T, UniformDensity>) {
        j = { { "kind", "uniform" }, { "d", f.d } };
      } else if constexpr (std::is_same_v<T, TrigDensity>) {
        nlohmann::json coeffs;
        to_json(coeffs, f.coeffs);
        j = { { "kind", "trig" },
              { "d", f.dim() },
              { "beta", f.beta },
              { "L", f.L },
              { "M", f.coeffs.cutoff() },
              { "min_value", f.min_value },
              { "coefficients", coeffs } };
      } else {
        std::vector<int> bits(f.theta.begin(), f.theta.end());
        j = { { "kind", "packing" }, { "d", f.d },
              { "m", f.m },          { "beta", f.beta },
              { "L", f.L },          { "halved_h", f.halved_h },
              { "theta", bits },     { "a", f.a },
              { "gamma", f.gamma },  { "delta", f.delta },
              { "h", f.h } };
      }
    },
    spec);
}

inline void
from_json(const nlohmann::json& j, DensitySpec& spec)
{
  if (!j.contains("kind"))
    throw UsageError("density JSON: missing 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "uniform") {
    spec = UniformDensity{ j.value("d", 1) };
  } else if (kind == "trig") {
    TrigDensity t;
    from_json(j.at("coefficients"), t.coeffs);
    t.beta = j.at("beta").get<double>();
    t.L = j.at("L").get<double>();
    t.min_value = j.value("min_value", 0.0);
    if (!is_hermitian(t.coeffs) ||
        std::abs(t.coeffs[t.coeffs.zero_index()] - Complex(1.0, 0.0)) > 1e-12)
      throw UsageError("trig density JSON: coefficients must be Hermitian "
                       "with theta_0 = 1");
    spec = std::move(t);
  } else if (kind == "packing") {
    std::vector<std::uint8_t> theta;
    for (int b : j.at("theta").get<std::vector<int>>()) {
      if (b != 0 && b != 1)
        throw UsageError("packing density JSON: theta entries must be 0 or 1");
      theta.push_back(static_cast<std::uint8_t>(b));
    }
    spec = make_packing_density(std::move(theta), j.at("m").get<int>(),
                                j.at("beta").get<double>(),
                                j.at("d").get<int>(), j.at("L").get<double>(),
                                j.value("halved_h", false));
  } else {
    throw UsageError("density JSON: unknown kind '" + kind + "'");
  }
}

} // namespace dpfourier
