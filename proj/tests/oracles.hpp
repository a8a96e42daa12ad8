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

// Independent reference computations and generators shared by the unit and
// acceptance tests. Nothing here calls into the quadrature or sampling code.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cvl/core.hpp"

namespace cvl::testing {

// Area under the linear interpolant by the midpoint rule with `panels`
// sub-panels per segment.
inline double refined_linear_area(const std::vector<double>& t, const std::vector<double>& v,
                                  int panels = 10000) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double a = t[k];
    const double width = (t[k + 1] - t[k]) / panels;
    const double slope = (v[k + 1] - v[k]) / (t[k + 1] - t[k]);
    double segment = 0.0;
    for (int j = 0; j < panels; ++j) {
      const double x = a + (j + 0.5) * width;
      segment += v[k] + slope * (x - a);
    }
    total += segment * width;
  }
  return total;
}

struct Cubic {
  double c0, c1, c2, c3;
  double operator()(double x) const { return c0 + x * (c1 + x * (c2 + x * c3)); }
  double antiderivative(double x) const {
    return x * (c0 + x * (c1 / 2 + x * (c2 / 3 + x * c3 / 4)));
  }
};

// Copies/mL whose censored log value is `log_value` (0 means undetectable).
inline double copies_for(double log_value) {
  return log_value == 0.0 ? 0.0 : std::pow(10.0, log_value);
}

inline IndividualSeries series_from_years(const std::vector<double>& years,
                                          const std::vector<double>& logs,
                                          std::string id = "x") {
  std::vector<RawPoint> pts;
  for (std::size_t k = 0; k < years.size(); ++k) {
    pts.push_back({TimeUnitPolicy::from_years(years[k]), copies_for(logs[k])});
  }
  return build_series(std::move(id), pts);
}

inline IndividualSeries series_from_weeks(const std::vector<double>& weeks,
                                          const std::vector<double>& logs,
                                          std::string id = "x") {
  std::vector<RawPoint> pts;
  for (std::size_t k = 0; k < weeks.size(); ++k) {
    pts.push_back({TimeUnitPolicy::from_weeks(weeks[k]), copies_for(logs[k])});
  }
  return build_series(std::move(id), pts);
}

// Irregular series: 2..max_len points, gaps of 1..365 days, about a quarter of
// values below the detection limit.
inline IndividualSeries random_irregular_series(std::mt19937_64& rng, std::string id = "x",
                                                int max_len = 40) {
  std::uniform_int_distribution<int> len(2, max_len);
  std::uniform_real_distribution<double> gap(1.0, 365.0);
  std::uniform_real_distribution<double> logs(0.5, 6.5);
  std::vector<RawPoint> pts;
  double t = 0;
  const int n = len(rng);
  for (int k = 0; k < n; ++k) {
    pts.push_back({t, std::pow(10.0, logs(rng))});
    t += gap(rng);
  }
  return build_series(std::move(id), pts);
}

inline IndividualSeries random_uniform_series(std::mt19937_64& rng, std::string id = "x") {
  std::uniform_int_distribution<int> len(2, 60);
  std::uniform_int_distribution<int> step(1, 120);
  std::uniform_real_distribution<double> logs(0.5, 6.5);
  const int n = len(rng);
  const double dt = step(rng);
  std::vector<RawPoint> pts;
  for (int k = 0; k < n; ++k) pts.push_back({k * dt, std::pow(10.0, logs(rng))});
  return build_series(std::move(id), pts);
}

// Samples of a strictly convex function that stays above the detection limit,
// on an irregular grid, so every interior point is strictly below the chord of
// its neighbours.
inline IndividualSeries random_convex_series(std::mt19937_64& rng, std::string id = "x") {
  std::uniform_int_distribution<int> len(3, 30);
  std::uniform_real_distribution<double> gap(3.0, 120.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = len(rng);
  std::vector<double> days{0.0};
  for (int k = 1; k < n; ++k) days.push_back(days.back() + gap(rng));
  const double span = days.back();
  const double a = 0.5 + 3.0 * unit(rng);   // early decay amplitude
  const double tau = 0.05 + 0.5 * unit(rng);
  const double c = 0.5 + 2.0 * unit(rng);   // curvature of the quadratic part
  const double centre = unit(rng);
  std::vector<RawPoint> pts;
  for (double d : days) {
    const double x = d / span;
    const double v = 1.8 + a * std::exp(-x / tau) + c * (x - centre) * (x - centre);
    pts.push_back({d, std::pow(10.0, v)});
  }
  return build_series(std::move(id), pts);
}

// True when every interior point is on or below the chord of its neighbours.
inline bool discretely_convex(const IndividualSeries& s, double* min_slack = nullptr) {
  double slack = INFINITY;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double t0 = s[k - 1].t_days, t1 = s[k].t_days, t2 = s[k + 1].t_days;
    const double chord =
        s[k - 1].log_value + (s[k + 1].log_value - s[k - 1].log_value) * (t1 - t0) / (t2 - t0);
    slack = std::min(slack, chord - s[k].log_value);
  }
  if (min_slack) *min_slack = slack;
  return slack >= 0;
}

inline double relative_error(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

}  // namespace cvl::testing
