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

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cvl/error.hpp"

namespace cvl {

inline constexpr double kDefaultDetectionLimit = 50.0;

// Days are the canonical time unit; weeks and years are exact rescalings.
struct TimeUnitPolicy {
  static constexpr double days_per_week = 7.0;
  static constexpr double days_per_year = 365.25;

  static constexpr double to_weeks(double days) { return days / days_per_week; }
  static constexpr double to_years(double days) { return days / days_per_year; }
  static constexpr double from_weeks(double weeks) { return weeks * days_per_week; }
  static constexpr double from_years(double years) { return years * days_per_year; }
};

// Log10 viral load with everything strictly below the detection limit set to
// zero. A value equal to the limit is kept.
inline double censor_and_transform(double vl_copies,
                                   double detection_limit = kDefaultDetectionLimit) {
  if (!(detection_limit >= 1.0)) {
    throw ConfigError("detection limit must be >= 1 copies/mL, got " +
                      std::to_string(detection_limit));
  }
  if (!(vl_copies >= 0.0) || !std::isfinite(vl_copies)) {
    throw ValidationError("viral load must be a finite nonnegative value, got " +
                          std::to_string(vl_copies));
  }
  if (vl_copies < detection_limit) return 0.0;
  return std::log10(vl_copies);
}

struct VLMeasurement {
  double t_days = 0.0;     // offset from the individual's first observation
  double vl_copies = 0.0;  // raw copies/mL
  double log_value = 0.0;  // censored log10 copies/mL

  friend bool operator==(const VLMeasurement&, const VLMeasurement&) = default;
};

// An unprocessed observation as read from input, before sorting and shifting.
struct RawPoint {
  double t_days = 0.0;
  double vl_copies = 0.0;
};

/// Ordered viral-load history of one individual.
///
/// Always holds at least two measurements with strictly increasing times, the
/// first at t = 0. Immutable once constructed.
class IndividualSeries {
 public:
  IndividualSeries(std::string id, std::vector<VLMeasurement> measurements,
                   double detection_limit)
      : id_(std::move(id)),
        measurements_(std::move(measurements)),
        detection_limit_(detection_limit) {
    if (!(detection_limit_ >= 1.0)) {
      throw ConfigError("detection limit must be >= 1 copies/mL");
    }
    if (measurements_.size() < 2) {
      throw TooShortError("series '" + id_ + "' has " +
                          std::to_string(measurements_.size()) +
                          " measurement(s); at least 2 are required");
    }
    if (measurements_.front().t_days != 0.0) {
      throw ValidationError("series '" + id_ + "' does not start at t = 0");
    }
    for (std::size_t k = 0; k < measurements_.size(); ++k) {
      const auto& m = measurements_[k];
      if (k > 0 && !(m.t_days > measurements_[k - 1].t_days)) {
        throw ValidationError("series '" + id_ +
                              "' times are not strictly increasing");
      }
      if (m.log_value != censor_and_transform(m.vl_copies, detection_limit_)) {
        throw ValidationError("series '" + id_ +
                              "' log value inconsistent with raw viral load");
      }
    }
  }

  const std::string& id() const noexcept { return id_; }
  std::span<const VLMeasurement> measurements() const noexcept { return measurements_; }
  std::size_t size() const noexcept { return measurements_.size(); }
  double detection_limit() const noexcept { return detection_limit_; }

  const VLMeasurement& operator[](std::size_t k) const { return measurements_[k]; }
  const VLMeasurement& front() const { return measurements_.front(); }
  const VLMeasurement& back() const { return measurements_.back(); }

  double followup_days() const noexcept { return measurements_.back().t_days; }
  double followup_weeks() const noexcept {
    return TimeUnitPolicy::to_weeks(followup_days());
  }
  double followup_years() const noexcept {
    return TimeUnitPolicy::to_years(followup_days());
  }

  std::vector<double> times_years() const {
    std::vector<double> out;
    out.reserve(size());
    for (const auto& m : measurements_) out.push_back(TimeUnitPolicy::to_years(m.t_days));
    return out;
  }

  std::vector<double> log_values() const {
    std::vector<double> out;
    out.reserve(size());
    for (const auto& m : measurements_) out.push_back(m.log_value);
    return out;
  }

  // Series made of the measurements at `indices` (ascending, first index 0).
  IndividualSeries select(std::span<const std::size_t> indices) const {
    std::vector<VLMeasurement> picked;
    picked.reserve(indices.size());
    for (auto k : indices) picked.push_back(measurements_.at(k));
    return IndividualSeries(id_, std::move(picked), detection_limit_);
  }

  friend bool operator==(const IndividualSeries&, const IndividualSeries&) = default;

 private:
  std::string id_;
  std::vector<VLMeasurement> measurements_;
  double detection_limit_;
};

using Cohort = std::vector<IndividualSeries>;

// Sorts by time, shifts the first observation to zero and censors. Unordered
// input is accepted; repeated timestamps are rejected.
inline IndividualSeries build_series(std::string id, std::span<const RawPoint> points,
                                     double detection_limit = kDefaultDetectionLimit) {
  if (points.size() < 2) {
    throw TooShortError("series '" + id + "' has " + std::to_string(points.size()) +
                        " point(s); at least 2 are required");
  }
  std::vector<RawPoint> sorted(points.begin(), points.end());
  for (const auto& p : sorted) {
    if (!std::isfinite(p.t_days)) {
      throw ValidationError("series '" + id + "' has a non-finite time");
    }
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RawPoint& a, const RawPoint& b) { return a.t_days < b.t_days; });
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k].t_days == sorted[k - 1].t_days) {
      throw ValidationError("series '" + id + "' has duplicate timestamp at day " +
                            std::to_string(sorted[k].t_days));
    }
  }

  const double origin = sorted.front().t_days;
  std::vector<VLMeasurement> measurements;
  measurements.reserve(sorted.size());
  for (const auto& p : sorted) {
    measurements.push_back({p.t_days - origin, p.vl_copies,
                            censor_and_transform(p.vl_copies, detection_limit)});
  }
  return IndividualSeries(std::move(id), std::move(measurements), detection_limit);
}

inline IndividualSeries build_series(std::string id, std::initializer_list<RawPoint> points,
                                     double detection_limit = kDefaultDetectionLimit) {
  return build_series(std::move(id), std::span<const RawPoint>(points.begin(), points.size()),
                      detection_limit);
}

}  // namespace cvl
