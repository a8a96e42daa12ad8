// Copyright 2026 The cvl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <ranges>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvl/core.hpp"
#include "cvl/error.hpp"

namespace cvl {

template <class R>
concept FloatRange = std::ranges::random_access_range<R> && std::ranges::sized_range<R> &&
                     std::floating_point<std::ranges::range_value_t<R>>;

enum class Method { trapezoid, uniform_composite, simpson };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::trapezoid: return "trapezoid";
    case Method::uniform_composite: return "uniform";
    case Method::simpson: return "simpson";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  if (name == "trapezoid") return Method::trapezoid;
  if (name == "uniform") return Method::uniform_composite;
  if (name == "simpson") return Method::simpson;
  throw ConfigError("unknown estimation method '" + std::string(name) + "'");
}

/// Cumulative viremia of one series.
///
/// `cvl` is in log10 copies/mL x years; `cvl_fu` divides it by the follow-up
/// duration, giving a time-averaged log10 level.
struct CvlEstimate {
  std::string id;
  double cvl = 0.0;
  double cvl_fu = 0.0;
  double followup_years = 0.0;
  Method method = Method::trapezoid;
  std::size_t n_points = 0;

  friend bool operator==(const CvlEstimate&, const CvlEstimate&) = default;
};

namespace detail {

template <FloatRange Times, FloatRange Values>
void check_pair(const Times& t, const Values& v) {
  if (std::ranges::size(t) != std::ranges::size(v)) {
    throw ValidationError("time and value sequences differ in length");
  }
  if (std::ranges::size(t) < 2) {
    throw TooShortError("at least 2 samples are required for quadrature");
  }
}

}  // namespace detail

// Area under the piecewise-linear interpolant of (t, v). Grid may be irregular.
template <FloatRange Times, FloatRange Values>
auto trapezoid_area(const Times& t, const Values& v) {
  detail::check_pair(t, v);
  using T = std::common_type_t<std::ranges::range_value_t<Times>,
                               std::ranges::range_value_t<Values>>;
  T area = 0;
  const auto n = std::ranges::size(t);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    area += (t[k + 1] - t[k]) * (v[k] + v[k + 1]) / 2;
  }
  return area;
}

// The composite trapezoid written for an implicit uniform grid over [t0, tn]:
// ((tn - t0) / n) * [(v_0 + v_n) / 2 + sum of interior v], n intervals.
template <FloatRange Values, std::floating_point T>
T uniform_composite_area(const Values& v, T t0, T tn) {
  const auto count = std::ranges::size(v);
  if (count < 2) throw TooShortError("at least 2 samples are required for quadrature");
  const auto intervals = static_cast<T>(count - 1);
  T interior = 0;
  for (std::size_t k = 1; k + 1 < count; ++k) interior += v[k];
  return (tn - t0) / intervals * ((v[0] + v[count - 1]) / 2 + interior);
}

// True when every gap is within `rel_tol` of the mean gap.
template <FloatRange Times>
bool is_uniform_grid(const Times& t, double rel_tol = 1e-9) {
  const auto n = std::ranges::size(t);
  if (n < 2) return false;
  const double mean_gap = (t[n - 1] - t[0]) / static_cast<double>(n - 1);
  if (!(mean_gap > 0)) return false;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (std::abs((t[k + 1] - t[k]) - mean_gap) > rel_tol * mean_gap) return false;
  }
  return true;
}

// Composite Simpson on a uniform grid with an even number of intervals.
template <FloatRange Times, FloatRange Values>
auto simpson_area(const Times& t, const Values& v) {
  detail::check_pair(t, v);
  using T = std::common_type_t<std::ranges::range_value_t<Times>,
                               std::ranges::range_value_t<Values>>;
  const auto n = std::ranges::size(t);
  const auto intervals = n - 1;
  if (intervals % 2 != 0) {
    throw MethodInapplicableError("Simpson's rule needs an even number of intervals, got " +
                                  std::to_string(intervals));
  }
  if (!is_uniform_grid(t)) {
    throw MethodInapplicableError("Simpson's rule needs evenly spaced time points");
  }
  const T h = (t[n - 1] - t[0]) / static_cast<T>(intervals);
  T odd = 0;
  T even = 0;
  for (std::size_t k = 1; k < intervals; ++k) {
    if (k % 2 == 1) {
      odd += v[k];
    } else {
      even += v[k];
    }
  }
  return h / 3 * (v[0] + v[n - 1] + 4 * odd + 2 * even);
}

namespace detail {

inline CvlEstimate finish(const std::string& id, double cvl, double followup_years,
                          Method method, std::size_t n_points) {
  if (!(followup_years > 0)) {
    throw TooShortError("follow-up duration of '" + id + "' is zero");
  }
  return {id, cvl, cvl / followup_years, followup_years, method, n_points};
}

}  // namespace detail

inline CvlEstimate cvl_trapezoid(const IndividualSeries& series) {
  const auto t = series.times_years();
  const auto v = series.log_values();
  return detail::finish(series.id(), trapezoid_area(t, v), series.followup_years(),
                        Method::trapezoid, series.size());
}

inline CvlEstimate cvl_uniform_composite(std::span<const double> values, double t0_years,
                                   double tn_years) {
  if (values.size() < 2) throw TooShortError("at least 2 values are required");
  if (!(tn_years > t0_years)) {
    throw ValidationError("end time must be after start time");
  }
  return detail::finish("", uniform_composite_area(values, t0_years, tn_years),
                        tn_years - t0_years, Method::uniform_composite, values.size());
}

inline CvlEstimate cvl_simpson(const IndividualSeries& series) {
  const auto t = series.times_years();
  const auto v = series.log_values();
  return detail::finish(series.id(), simpson_area(t, v), series.followup_years(),
                        Method::simpson, series.size());
}

inline CvlEstimate estimate(const IndividualSeries& series, Method method) {
  switch (method) {
    case Method::trapezoid:
      return cvl_trapezoid(series);
    case Method::simpson:
      return cvl_simpson(series);
    case Method::uniform_composite: {
      if (!is_uniform_grid(series.times_years())) {
        throw MethodInapplicableError("series '" + series.id() +
                                      "' is not on a uniform grid");
      }
      const auto v = series.log_values();
      auto est = cvl_uniform_composite(v, 0.0, series.followup_years());
      est.id = series.id();
      return est;
    }
  }
  throw ConfigError("unknown estimation method");
}

}  // namespace cvl
