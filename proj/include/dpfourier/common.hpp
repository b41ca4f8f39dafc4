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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace dpfourier {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

//! Raised when a caller violates a documented precondition (bad dimension,
//! empty data, non-positive budget, ...). The CLI maps it to exit code 2.
class UsageError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! Raised when a well-formed request cannot be carried out (a fixture that
//! cannot be certified, a degenerate density, an I/O failure).
class RuntimeError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! The generator used everywhere a random draw is needed.
using Rng = std::mt19937_64;

//! SplitMix64 finalizer.
inline std::uint64_t
splitmix64(std::uint64_t z)
{
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

//! Seed for an independent stream derived from a master seed.
//!
//! derive_seed(seed, stream) = splitmix64(splitmix64(seed) ^ splitmix64(~stream))
//!
//! Replicates, candidates and cells each get their own stream index so that
//! results do not depend on execution order or thread count.
inline std::uint64_t
derive_seed(std::uint64_t seed, std::uint64_t stream)
{
  return splitmix64(splitmix64(seed) ^ splitmix64(~stream));
}

inline Rng
make_rng(std::uint64_t seed, std::uint64_t stream)
{
  return Rng(derive_seed(seed, stream));
}

//! Largest integer r >= 0 with r <= x^(1/p), robust to pow() landing a hair
//! below an exact integer root (pow(512, 1/3.) == 7.999...).
inline long long
floor_root(double x, double p)
{
  if (!(x > 0.0))
    return 0;
  auto r = static_cast<long long>(std::floor(std::pow(x, 1.0 / p)));
  if (r < 0)
    r = 0;
  const double tol = 1e-12;
  while (std::pow(static_cast<double>(r + 1), p) <= x * (1.0 + tol))
    ++r;
  while (r > 0 && std::pow(static_cast<double>(r), p) > x * (1.0 + tol))
    --r;
  return r;
}

//! Integer power base^exp for small non-negative exponents.
inline std::size_t
ipow(std::size_t base, int exp)
{
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i)
    out *= base;
  return out;
}

} // namespace dpfourier
