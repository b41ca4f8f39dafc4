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

#include "common.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dpfourier {

using Complex = std::complex<double>;

//! Frequency vector (k_1, ..., k_d).
using MultiIndex = std::vector<int>;

//! A point of [0, 1]^d.
using Point = std::vector<double>;

//! A data set of n points in [0, 1]^d, stored row-major.
class PointSet
{
public:
  PointSet() = default;
  explicit PointSet(int dim)
    : dim_(dim)
  {
    if (dim < 1)
      throw UsageError("PointSet: dimension must be >= 1");
  }
  PointSet(int dim, std::vector<double> coords)
    : PointSet(dim)
  {
    if (coords.size() % static_cast<std::size_t>(dim) != 0)
      throw UsageError("PointSet: coordinate count is not a multiple of d");
    coords_ = std::move(coords);
  }

  int dim() const { return dim_; }
  std::size_t size() const { return dim_ ? coords_.size() / dim_ : 0; }
  bool empty() const { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const
  {
    return { coords_.data() + i * dim_, static_cast<std::size_t>(dim_) };
  }

  void push_back(std::span<const double> x)
  {
    if (static_cast<int>(x.size()) != dim_)
      throw UsageError("PointSet: point dimension mismatch");
    coords_.insert(coords_.end(), x.begin(), x.end());
  }

  const std::vector<double>& coords() const { return coords_; }
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  bool operator==(const PointSet&) const = default;

private:
  int dim_ = 0;
  std::vector<double> coords_;
};

//! Throws unless every coordinate lies in [0, 1].
inline void
validate_unit_cube(const PointSet& data)
{
  for (double c : data.coords())
    if (!(c >= 0.0 && c <= 1.0))
      throw UsageError("data point outside [0,1]^d: coordinate " +
                       std::to_string(c));
}

//! Complex Fourier coefficients on the full grid {-M, ..., M}^d, stored
//! densely in lexicographic order of (k_1, ..., k_d) with k_1 most
//! significant. The flat index of -k is size() - 1 - index(k).
class CoefficientGrid
{
public:
  CoefficientGrid() = default;

  CoefficientGrid(int dim, int cutoff)
    : dim_(dim)
    , cutoff_(cutoff)
  {
    if (dim < 1)
      throw UsageError("CoefficientGrid: dimension must be >= 1");
    if (cutoff < 0)
      throw UsageError("CoefficientGrid: cut-off must be >= 0");
    values_.assign(ipow(2 * cutoff + 1, dim), Complex(0.0, 0.0));
  }

  CoefficientGrid(int dim, int cutoff, std::vector<Complex> values)
    : CoefficientGrid(dim, cutoff)
  {
    if (values.size() != values_.size())
      throw UsageError("CoefficientGrid: expected " +
                       std::to_string(values_.size()) + " values, got " +
                       std::to_string(values.size()));
    values_ = std::move(values);
  }

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  int side() const { return 2 * cutoff_ + 1; }
  std::size_t size() const { return values_.size(); }

  Complex& operator[](std::size_t i) { return values_[i]; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }

  std::span<Complex> values() { return values_; }
  std::span<const Complex> values() const { return values_; }

  bool contains(std::span<const int> k) const
  {
    if (static_cast<int>(k.size()) != dim_)
      return false;
    return std::all_of(k.begin(), k.end(), [this](int ki) {
      return ki >= -cutoff_ && ki <= cutoff_;
    });
  }

  std::size_t index_of(std::span<const int> k) const
  {
    if (static_cast<int>(k.size()) != dim_)
      throw UsageError("CoefficientGrid: multi-index dimension mismatch");
    if (!contains(k))
      throw UsageError("CoefficientGrid: multi-index outside the grid");
    std::size_t flat = 0;
    for (int ki : k)
      flat = flat * side() + static_cast<std::size_t>(ki + cutoff_);
    return flat;
  }

  MultiIndex multi_index(std::size_t flat) const
  {
    MultiIndex k(dim_);
    for (int i = dim_ - 1; i >= 0; --i) {
      k[i] = static_cast<int>(flat % side()) - cutoff_;
      flat /= side();
    }
    return k;
  }

  //! Index of -k given the index of k.
  std::size_t mirror(std::size_t flat) const { return size() - 1 - flat; }

  std::size_t zero_index() const { return (size() - 1) / 2; }

  Complex& at(std::span<const int> k) { return values_[index_of(k)]; }
  const Complex& at(std::span<const int> k) const
  {
    return values_[index_of(k)];
  }

  bool operator==(const CoefficientGrid&) const = default;

private:
  int dim_ = 1;
  int cutoff_ = 0;
  std::vector<Complex> values_{ Complex(0.0, 0.0) };
};

namespace detail {

//! Fills out[j] = exp(sign * i 2 pi (j - M) x) for j = 0..2M.
//! Positive powers come from a product recurrence re-anchored on exact
//! cos/sin every 32 steps; negative powers are exact conjugates, so grids
//! built from these tables are exactly Hermitian.
inline void
axis_phases(double x, int cutoff, double sign, std::vector<Complex>& out)
{
  out.resize(2 * cutoff + 1);
  const Complex step = std::polar(1.0, sign * kTwoPi * x);
  out[cutoff] = Complex(1.0, 0.0);
  Complex z(1.0, 0.0);
  for (int k = 1; k <= cutoff; ++k) {
    if (k % 32 == 0) {
      double turns = std::fmod(static_cast<double>(k) * x, 1.0);
      z = std::polar(1.0, sign * kTwoPi * turns);
    } else {
      z *= step;
    }
    out[cutoff + k] = z;
    out[cutoff - k] = std::conj(z);
  }
}

//! Calls fn(flat_index, product_of_axis_factors) over the full grid, the
//! factor for axis i at offset j being tables[i][j].
template<class Fn>
void
for_each_tensor_product(int dim,
                        int cutoff,
                        const std::vector<std::vector<Complex>>& tables,
                        Fn&& fn)
{
  const int side = 2 * cutoff + 1;
  if (dim == 1) {
    for (int j = 0; j < side; ++j)
      fn(static_cast<std::size_t>(j), tables[0][j]);
    return;
  }
  // partial[i] holds the product of factors for axes 0..i-1.
  std::vector<int> idx(dim, 0);
  std::vector<Complex> partial(dim + 1, Complex(1.0, 0.0));
  for (int i = 0; i < dim; ++i)
    partial[i + 1] = partial[i] * tables[i][0];
  std::size_t flat = 0;
  while (true) {
    fn(flat, partial[dim]);
    ++flat;
    int axis = dim - 1;
    while (axis >= 0 && ++idx[axis] == side) {
      idx[axis] = 0;
      --axis;
    }
    if (axis < 0)
      break;
    for (int i = axis; i < dim; ++i)
      partial[i + 1] = partial[i] * tables[i][idx[i]];
  }
}

//! Offset (in each axis) of a grid of cut-off `inner` inside a grid of
//! cut-off `outer` >= inner; calls fn(outer_flat, inner_flat) for every
//! common multi-index.
template<class Fn>
void
for_each_common_index(int dim, int inner, int outer, Fn&& fn)
{
  const int side_in = 2 * inner + 1;
  const int side_out = 2 * outer + 1;
  const int shift = outer - inner;
  std::vector<int> idx(dim, 0);
  std::size_t inner_flat = 0;
  const std::size_t total = ipow(side_in, dim);
  for (; inner_flat < total; ++inner_flat) {
    std::size_t outer_flat = 0;
    for (int i = 0; i < dim; ++i)
      outer_flat = outer_flat * side_out + (idx[i] + shift);
    fn(outer_flat, inner_flat);
    for (int axis = dim - 1; axis >= 0; --axis) {
      if (++idx[axis] < side_in)
        break;
      idx[axis] = 0;
    }
  }
}

} // namespace detail

//! phi_k(x) = exp(i 2 pi <k, x>).
inline Complex
eval_basis(std::span<const int> k, std::span<const double> x)
{
  if (k.size() != x.size())
    throw UsageError("eval_basis: dimension mismatch between k and x");
  double turns = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i)
    turns += static_cast<double>(k[i]) * x[i];
  turns = std::fmod(turns, 1.0);
  return std::polar(1.0, kTwoPi * turns);
}

//! theta_k = (1/n) sum_j conj(phi_k(X_j)) on {-M..M}^d.
//!
//! Direct summation, O(n (2M+1)^d). Points are accumulated in input order,
//! so the result is deterministic and exactly Hermitian.
inline CoefficientGrid
empirical_coefficients(const PointSet& data, int cutoff)
{
  if (data.empty())
    throw UsageError("empirical_coefficients: empty data");
  if (cutoff < 0)
    throw UsageError("empirical_coefficients: cut-off must be >= 0");
  validate_unit_cube(data);
  const int d = data.dim();
  CoefficientGrid grid(d, cutoff);
  std::vector<std::vector<Complex>> tables(d);
  auto values = grid.values();
  for (std::size_t j = 0; j < data.size(); ++j) {
    auto x = data[j];
    for (int i = 0; i < d; ++i)
      detail::axis_phases(x[i], cutoff, -1.0, tables[i]);
    detail::for_each_tensor_product(
      d, cutoff, tables, [&](std::size_t flat, const Complex& v) {
        values[flat] += v;
      });
  }
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (auto& v : values)
    v *= inv_n;
  return grid;
}

//! Restriction to {-M'..M'}^d when M' <= M, zero padding otherwise.
inline CoefficientGrid
project(const CoefficientGrid& grid, int new_cutoff)
{
  if (new_cutoff < 0)
    throw UsageError("project: cut-off must be >= 0");
  if (new_cutoff == grid.cutoff())
    return grid;
  CoefficientGrid out(grid.dim(), new_cutoff);
  if (new_cutoff < grid.cutoff()) {
    detail::for_each_common_index(
      grid.dim(), new_cutoff, grid.cutoff(),
      [&](std::size_t outer, std::size_t inner) { out[inner] = grid[outer]; });
  } else {
    detail::for_each_common_index(
      grid.dim(), grid.cutoff(), new_cutoff,
      [&](std::size_t outer, std::size_t inner) { out[outer] = grid[inner]; });
  }
  return out;
}

//! sum_k |a_k - b_k|^2 over the union of supports, i.e. the squared
//! L2([0,1]^d) distance between the two trigonometric polynomials.
inline double
l2_distance_sq(const CoefficientGrid& a, const CoefficientGrid& b)
{
  if (a.dim() != b.dim())
    throw UsageError("l2_distance_sq: dimension mismatch");
  const CoefficientGrid& big = a.cutoff() >= b.cutoff() ? a : b;
  const CoefficientGrid& small = a.cutoff() >= b.cutoff() ? b : a;
  double total = 0.0;
  if (big.cutoff() == small.cutoff()) {
    for (std::size_t i = 0; i < big.size(); ++i)
      total += std::norm(big[i] - small[i]);
    return total;
  }
  std::vector<char> common(big.size(), 0);
  detail::for_each_common_index(
    big.dim(), small.cutoff(), big.cutoff(),
    [&](std::size_t outer, std::size_t inner) {
      common[outer] = 1;
      total += std::norm(big[outer] - small[inner]);
    });
  for (std::size_t i = 0; i < big.size(); ++i)
    if (!common[i])
      total += std::norm(big[i]);
  return total;
}

//! sum_k |a_k|^2.
inline double
squared_norm(const CoefficientGrid& a)
{
  double total = 0.0;
  for (const auto& v : a.values())
    total += std::norm(v);
  return total;
}

//! sum_k grid_k phi_k(x), complex valued.
inline Complex
evaluate_complex(const CoefficientGrid& grid, std::span<const double> x)
{
  if (static_cast<int>(x.size()) != grid.dim())
    throw UsageError("evaluate: dimension mismatch");
  thread_local std::vector<std::vector<Complex>> tables;
  tables.resize(grid.dim());
  for (int i = 0; i < grid.dim(); ++i)
    detail::axis_phases(x[i], grid.cutoff(), 1.0, tables[i]);
  Complex total(0.0, 0.0);
  auto values = grid.values();
  detail::for_each_tensor_product(
    grid.dim(), grid.cutoff(), tables,
    [&](std::size_t flat, const Complex& v) { total += values[flat] * v; });
  return total;
}

//! Real part of the trigonometric polynomial; exact for Hermitian grids.
inline double
evaluate(const CoefficientGrid& grid, std::span<const double> x)
{
  return evaluate_complex(grid, x).real();
}

//! |Im sum_k grid_k phi_k(x)|, the part discarded by evaluate().
inline double
imaginary_residual(const CoefficientGrid& grid, std::span<const double> x)
{
  return std::abs(evaluate_complex(grid, x).imag());
}

inline bool
is_hermitian(const CoefficientGrid& grid, double tol = 1e-12)
{
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[grid.mirror(i)] - std::conj(grid[i])) > tol)
      return false;
  return true;
}

//! theta_k <- (theta_k + conj(theta_{-k})) / 2. Post-processing only.
inline CoefficientGrid
hermitian_symmetrize(const CoefficientGrid& grid)
{
  CoefficientGrid out = grid;
  for (std::size_t i = 0; i < grid.size(); ++i)
    out[i] = 0.5 * (grid[i] + std::conj(grid[grid.mirror(i)]));
  return out;
}

//! sum_k |theta_k|, an upper bound on sup_x |f(x)|.
inline double
l1_norm(const CoefficientGrid& grid)
{
  double total = 0.0;
  for (const auto& v : grid.values())
    total += std::abs(v);
  return total;
}

// JSON: {"d": d, "M": M, "re": [...], "im": [...]}, lexicographic order.

inline void
to_json(nlohmann::json& j, const CoefficientGrid& grid)
{
  std::vector<double> re(grid.size()), im(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    re[i] = grid[i].real();
    im[i] = grid[i].imag();
  }
  j = nlohmann::json{
    { "d", grid.dim() }, { "M", grid.cutoff() }, { "re", re }, { "im", im }
  };
}

inline void
from_json(const nlohmann::json& j, CoefficientGrid& grid)
{
  for (const char* key : { "d", "M", "re", "im" })
    if (!j.contains(key))
      throw UsageError(std::string("coefficient grid JSON: missing key '") +
                       key + "'");
  const int d = j.at("d").get<int>();
  const int m = j.at("M").get<int>();
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != im.size())
    throw UsageError("coefficient grid JSON: re/im length mismatch");
  std::vector<Complex> values(re.size());
  for (std::size_t i = 0; i < re.size(); ++i)
    values[i] = Complex(re[i], im[i]);
  grid = CoefficientGrid(d, m, std::move(values));
}

} // namespace dpfourier
