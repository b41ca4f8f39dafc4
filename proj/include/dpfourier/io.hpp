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

#include "densities.hpp"
#include "estimator.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

namespace dpfourier {

//! Points CSV: no header, d comma-separated decimals per row, every
//! coordinate in [0, 1]. Blank lines are ignored. Errors name the line.
inline PointSet
read_points_csv(std::istream& is, const std::string& source = "input")
{
  PointSet out;
  bool have_dim = false;
  std::string line;
  std::size_t line_no = 0;
  Point row;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos)
      continue;
    row.clear();
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      std::string_view field = rest.substr(0, comma);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
        field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t'))
        field.remove_suffix(1);
      double v = 0.0;
      const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() ||
          ptr != field.data() + field.size())
        throw UsageError(source + ":" + std::to_string(line_no) +
                         ": malformed value '" + std::string(field) + "'");
      if (!(v >= 0.0 && v <= 1.0))
        throw UsageError(source + ":" + std::to_string(line_no) +
                         ": coordinate " + std::string(field) +
                         " outside [0, 1]");
      row.push_back(v);
      if (comma == std::string_view::npos)
        break;
      rest.remove_prefix(comma + 1);
    }
    if (!have_dim) {
      out = PointSet(static_cast<int>(row.size()));
      have_dim = true;
    } else if (static_cast<int>(row.size()) != out.dim()) {
      throw UsageError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(out.dim()) + " columns, found " +
                       std::to_string(row.size()));
    }
    out.push_back(row);
  }
  if (!have_dim)
    throw UsageError(source + ": no data rows");
  return out;
}

inline PointSet
read_points_csv(const std::filesystem::path& path)
{
  std::ifstream is(path);
  if (!is)
    throw UsageError("cannot open " + path.string());
  return read_points_csv(is, path.string());
}

inline void
write_points_csv(std::ostream& os, const PointSet& points)
{
  char buf[40];
  for (std::size_t j = 0; j < points.size(); ++j) {
    const auto p = points[j];
    for (int i = 0; i < points.dim(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", p[i]);
      if (i)
        os << ',';
      os << buf;
    }
    os << '\n';
  }
}

inline nlohmann::json
read_json_file(const std::filesystem::path& path)
{
  std::ifstream is(path);
  if (!is)
    throw UsageError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

inline void
write_text_file(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw RuntimeError("cannot write " + path.string());
  os << text;
  if (!os)
    throw RuntimeError("write failed for " + path.string());
}

//! A released estimate turned into something samplable: max(Re f^, 0),
//! which rejection sampling renormalizes implicitly.
struct ClippedEstimate
{
  CoefficientGrid coeffs;
  double mass = 0.0; // lattice integral of the clipped function

  int dim() const { return coeffs.dim(); }
  double value(std::span<const double> x) const
  {
    return std::max(evaluate(coeffs, x), 0.0);
  }
  //! sum_k |theta_k| bounds |f^| and so the clipped real part.
  double sup_bound() const { return l1_norm(coeffs); }
};

inline ClippedEstimate
clip_estimate(const ProjectionEstimate& est)
{
  ClippedEstimate out{ est.coeffs, 0.0 };
  const int d = out.dim();
  const int res = lattice_resolution(d);
  double total = 0.0;
  std::size_t count = 0;
  for_each_lattice_point(d, res, [&](std::span<const double> x) {
    total += out.value(x);
    ++count;
  });
  out.mass = total / static_cast<double>(count);
  if (!(out.mass > 1e-9))
    throw RuntimeError("estimate has (numerically) zero mass after clipping "
                       "negative values; cannot sample");
  return out;
}

} // namespace dpfourier
