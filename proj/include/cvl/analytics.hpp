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
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cvl/core.hpp"
#include "cvl/error.hpp"
#include "cvl/estimators.hpp"
#include "cvl/parallel.hpp"
#include "cvl/sampling.hpp"

namespace cvl {

// ---------------------------------------------------------------------------
// Quantiles
//
// Linear interpolation between order statistics at position p * (N - 1), the
// same convention as R's type 7 and numpy's default.
// ---------------------------------------------------------------------------

struct Quartiles {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;

  friend bool operator==(const Quartiles&, const Quartiles&) = default;
};

inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sequence");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline Quartiles median_iqr(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median/IQR of an empty sequence");
  std::sort(values.begin(), values.end());
  return {quantile_sorted(values, 0.5), quantile_sorted(values, 0.25),
          quantile_sorted(values, 0.75)};
}

// Signed whole-number percent change, rounded half away from zero.
inline long percent_change(double reference_median, double subsample_median) {
  if (!(reference_median > 0)) {
    throw UndefinedReferenceError("percent change needs a positive reference median");
  }
  return std::lround(100.0 * (subsample_median - reference_median) / reference_median);
}

// ---------------------------------------------------------------------------
// Cohort summary
// ---------------------------------------------------------------------------

inline constexpr double kHighBandThreshold = 1000.0;

struct CohortSummary {
  std::size_t n_individuals = 0;
  std::size_t n_measurements = 0;
  double proportion_below_limit = 0.0;  // VL < limit
  double proportion_mid_band = 0.0;     // limit <= VL <= 1000
  double proportion_high_band = 0.0;    // VL > 1000
  Quartiles measures_per_individual;
  Quartiles followup_years;
  Quartiles followup_weeks;
  Quartiles median_interobservation_weeks;  // of per-individual median gaps
  Quartiles mean_interobservation_weeks;    // of per-individual mean gaps
  double total_person_years = 0.0;
  double detection_limit = kDefaultDetectionLimit;
};

inline double median_interval_weeks(const IndividualSeries& series) {
  return median_iqr(gaps_weeks(series)).median;
}

inline CohortSummary cohort_summary(const Cohort& cohort,
                                    double detection_limit = kDefaultDetectionLimit) {
  if (cohort.empty()) throw ValidationError("cohort summary of an empty cohort");
  if (!(detection_limit >= 1)) throw ConfigError("detection limit must be >= 1");

  CohortSummary s;
  s.detection_limit = detection_limit;
  s.n_individuals = cohort.size();
  std::size_t below = 0, mid = 0, high = 0;
  std::vector<double> counts, fu_years, fu_weeks, median_gaps, mean_gaps;
  for (const auto& series : cohort) {
    for (const auto& m : series.measurements()) {
      if (m.vl_copies < detection_limit) {
        ++below;
      } else if (m.vl_copies <= kHighBandThreshold) {
        ++mid;
      } else {
        ++high;
      }
    }
    s.n_measurements += series.size();
    counts.push_back(static_cast<double>(series.size()));
    fu_years.push_back(series.followup_years());
    fu_weeks.push_back(series.followup_weeks());
    median_gaps.push_back(median_interval_weeks(series));
    mean_gaps.push_back(mean_interval_weeks(series));
    s.total_person_years += series.followup_years();
  }
  const auto total = static_cast<double>(s.n_measurements);
  s.proportion_below_limit = static_cast<double>(below) / total;
  s.proportion_mid_band = static_cast<double>(mid) / total;
  s.proportion_high_band = static_cast<double>(high) / total;
  s.measures_per_individual = median_iqr(std::move(counts));
  s.followup_years = median_iqr(std::move(fu_years));
  s.followup_weeks = median_iqr(std::move(fu_weeks));
  s.median_interobservation_weeks = median_iqr(std::move(median_gaps));
  s.mean_interobservation_weeks = median_iqr(std::move(mean_gaps));
  return s;
}

// ---------------------------------------------------------------------------
// Reference estimates and the subsampling experiment
// ---------------------------------------------------------------------------

/// Trapezoid cVL of every individual using all of their measurements.
inline std::vector<CvlEstimate> reference_estimates(const Cohort& cohort,
                                                    std::size_t workers = 1) {
  std::vector<CvlEstimate> out(cohort.size());
  parallel_for(cohort.size(), workers, [&](std::size_t i) {
    try {
      out[i] = cvl_trapezoid(cohort[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), "individual '" + cohort[i].id() + "': " + e.what());
    }
  });
  return out;
}

struct BiasRow {
  std::string strategy;  // "reference", "count" or "interval"
  std::string param;     // "all", n, or the gap in weeks
  std::size_t effective_n = 0;   // individuals contributing
  std::size_t n_estimates = 0;   // pooled estimates (individuals x replicates)
  Quartiles cvl;
  long pct_change = 0;
  Quartiles cvl_fu;
  long pct_change_fu = 0;
  // Interval rows only: cohort mean of each retained series' mean gap.
  std::optional<double> achieved_mean_interval_weeks;
};

struct BiasTable {
  std::vector<BiasRow> rows;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
};

inline std::string format_param(const SubsampleMode& mode) {
  if (const auto* c = std::get_if<CountMode>(&mode)) return std::to_string(c->n);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", std::get<IntervalMode>(mode).min_gap_weeks);
  return buf;
}

namespace detail {

inline BiasRow summarize_row(std::string strategy, std::string param,
                             std::size_t effective_n, std::vector<double> cvl,
                             std::vector<double> cvl_fu) {
  BiasRow row;
  row.strategy = std::move(strategy);
  row.param = std::move(param);
  row.effective_n = effective_n;
  row.n_estimates = cvl.size();
  row.cvl = median_iqr(std::move(cvl));
  row.cvl_fu = median_iqr(std::move(cvl_fu));
  return row;
}

}  // namespace detail

/// Reference row plus one row per subsampling mode.
///
/// Count rows skip individuals with fewer than n points and pool `replicates`
/// independent draws per individual before taking quartiles. Interval thinning
/// is deterministic, so interval rows use a single draw per individual and
/// drop excluded individuals. Percent changes use unrounded medians.
inline BiasTable bias_experiment(const Cohort& cohort, std::span<const SubsampleMode> modes,
                                 std::size_t replicates, std::uint64_t master_seed,
                                 std::size_t workers = 1, IntervalPolicy policy = {}) {
  if (modes.empty()) throw ConfigError("bias experiment needs at least one subsampling mode");
  if (replicates < 1) throw ConfigError("bias experiment needs replicates >= 1");
  if (cohort.empty()) throw ValidationError("bias experiment on an empty cohort");
  for (const auto& m : modes) validate(m);

  BiasTable table;
  table.replicates = replicates;
  table.seed = master_seed;

  const auto reference = reference_estimates(cohort, workers);
  {
    std::vector<double> cvl, fu;
    for (const auto& e : reference) {
      cvl.push_back(e.cvl);
      fu.push_back(e.cvl_fu);
    }
    table.rows.push_back(
        detail::summarize_row("reference", "all", cohort.size(), std::move(cvl), std::move(fu)));
  }
  const double ref_cvl = table.rows.front().cvl.median;
  const double ref_fu = table.rows.front().cvl_fu.median;

  for (const auto& mode : modes) {
    const bool is_count = std::holds_alternative<CountMode>(mode);
    const std::size_t draws = is_count ? replicates : 1;

    struct Slot {
      std::vector<double> cvl, fu;
      double mean_gap = 0.0;
      bool included = false;
    };
    std::vector<Slot> slots(cohort.size());
    parallel_for(cohort.size(), workers, [&](std::size_t i) {
      Slot& slot = slots[i];
      for (std::size_t r = 0; r < draws; ++r) {
        auto sub = subsample(cohort[i], SubsampleSpec{mode, master_seed, r}, policy);
        if (!sub) return;
        const auto est = cvl_trapezoid(*sub);
        slot.cvl.push_back(est.cvl);
        slot.fu.push_back(est.cvl_fu);
        slot.mean_gap = mean_interval_weeks(*sub);
        slot.included = true;
      }
    });

    std::vector<double> cvl, fu;
    std::size_t effective = 0;
    double gap_sum = 0.0;
    for (const auto& s : slots) {
      if (!s.included) continue;
      ++effective;
      gap_sum += s.mean_gap;
      cvl.insert(cvl.end(), s.cvl.begin(), s.cvl.end());
      fu.insert(fu.end(), s.fu.begin(), s.fu.end());
    }
    if (effective == 0) {
      throw EmptyRowError("no individual can be subsampled with " +
                          std::string(is_count ? "count n = " : "interval gap = ") +
                          format_param(mode));
    }
    auto row = detail::summarize_row(is_count ? "count" : "interval", format_param(mode),
                                     effective, std::move(cvl), std::move(fu));
    if (!is_count) row.achieved_mean_interval_weeks = gap_sum / static_cast<double>(effective);
    table.rows.push_back(std::move(row));
  }

  for (auto& row : table.rows) {
    row.pct_change = percent_change(ref_cvl, row.cvl.median);
    row.pct_change_fu = percent_change(ref_fu, row.cvl_fu.median);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Trajectory bins
// ---------------------------------------------------------------------------

struct TrajectoryBin {
  double midpoint_weeks = 0.0;
  double mean_log_value = 0.0;
  std::size_t count = 0;
};

// Mean censored log value per fixed-width time bin, pooled over individuals.
// Empty bins are omitted.
inline std::vector<TrajectoryBin> trajectory_bins(const Cohort& cohort, double bin_width_weeks) {
  if (!(bin_width_weeks > 0) || !std::isfinite(bin_width_weeks)) {
    throw ConfigError("bin width must be positive");
  }
  std::map<long long, std::pair<double, std::size_t>> acc;
  for (const auto& series : cohort) {
    for (const auto& m : series.measurements()) {
      const auto bin = static_cast<long long>(
          std::floor(TimeUnitPolicy::to_weeks(m.t_days) / bin_width_weeks));
      auto& [sum, n] = acc[bin];
      sum += m.log_value;
      ++n;
    }
  }
  std::vector<TrajectoryBin> out;
  out.reserve(acc.size());
  for (const auto& [bin, sum_n] : acc) {
    out.push_back({(static_cast<double>(bin) + 0.5) * bin_width_weeks,
                   sum_n.first / static_cast<double>(sum_n.second), sum_n.second});
  }
  return out;
}

}  // namespace cvl
