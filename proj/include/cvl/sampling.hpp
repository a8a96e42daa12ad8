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
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cvl/core.hpp"
#include "cvl/error.hpp"

namespace cvl {

// ---------------------------------------------------------------------------
// Random streams
//
// Every random decision about an individual is drawn from an mt19937_64
// seeded with
//
//   mix(mix(mix(master_seed) ^ replicate_index) ^ fnv1a64(individual_id))
//
// where mix is the splitmix64 finalizer. The stream depends only on that
// triple, so work can be split across threads in any order.
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                                  std::uint64_t replicate_index,
                                                  std::string_view individual_id) {
  return splitmix64(splitmix64(splitmix64(master_seed) ^ replicate_index) ^
                    fnv1a64(individual_id));
}

inline std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t replicate_index,
                                   std::string_view individual_id) {
  return std::mt19937_64(derive_stream_seed(master_seed, replicate_index, individual_id));
}

// ---------------------------------------------------------------------------

struct CountMode {
  std::size_t n = 2;
  friend bool operator==(const CountMode&, const CountMode&) = default;
};

struct IntervalMode {
  double min_gap_weeks = 4.0;
  friend bool operator==(const IntervalMode&, const IntervalMode&) = default;
};

using SubsampleMode = std::variant<CountMode, IntervalMode>;

inline void validate(const SubsampleMode& mode) {
  if (const auto* c = std::get_if<CountMode>(&mode)) {
    if (c->n < 2) throw ConfigError("count subsampling needs n >= 2");
  } else {
    const double g = std::get<IntervalMode>(mode).min_gap_weeks;
    if (!(g > 0) || !std::isfinite(g)) {
      throw ConfigError("interval subsampling needs a positive minimum gap");
    }
  }
}

struct SubsampleSpec {
  SubsampleMode mode = CountMode{};
  std::uint64_t seed = 0;
  std::uint64_t replicate_index = 0;
};

struct IntervalPolicy {
  // Drop individuals whose whole follow-up is shorter than the requested gap.
  bool exclude_short_followup = true;
};

/// Keeps the first and last measurement plus n - 2 interior measurements drawn
/// uniformly without replacement. Order is preserved.
inline IndividualSeries subsample_count(const IndividualSeries& series, std::size_t n,
                                        std::uint64_t seed, std::uint64_t replicate_index) {
  if (n < 2) throw ConfigError("count subsampling needs n >= 2");
  if (n > series.size()) {
    throw InsufficientPointsError("series '" + series.id() + "' has " +
                                  std::to_string(series.size()) + " points, cannot keep " +
                                  std::to_string(n));
  }
  if (n == series.size()) return series;

  std::vector<std::size_t> interior(series.size() - 2);
  std::iota(interior.begin(), interior.end(), std::size_t{1});
  auto rng = make_stream(seed, replicate_index, series.id());
  const std::size_t want = n - 2;
  // Partial Fisher-Yates: the first `want` slots end up a uniform sample.
  for (std::size_t k = 0; k < want; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, interior.size() - 1);
    std::swap(interior[k], interior[pick(rng)]);
  }
  std::vector<std::size_t> keep;
  keep.reserve(n);
  keep.push_back(0);
  keep.insert(keep.end(), interior.begin(), interior.begin() + static_cast<std::ptrdiff_t>(want));
  keep.push_back(series.size() - 1);
  std::sort(keep.begin() + 1, keep.end() - 1);
  return series.select(keep);
}

/// Greedy forward thinning to a minimum gap between retained points.
///
/// The first point is kept, then each point at least `min_gap_weeks` after the
/// last kept one. The original last point is always appended, so the final gap
/// may be shorter than requested. Returns nullopt when the individual is
/// excluded under `policy`.
inline std::optional<IndividualSeries> subsample_interval(const IndividualSeries& series,
                                                          double min_gap_weeks,
                                                          IntervalPolicy policy = {}) {
  validate(IntervalMode{min_gap_weeks});
  const double min_gap_days = TimeUnitPolicy::from_weeks(min_gap_weeks);
  // Absorbs rounding in week -> day conversion of fractional gaps.
  constexpr double slack_days = 1e-9;

  if (policy.exclude_short_followup && series.followup_days() + slack_days < min_gap_days) {
    return std::nullopt;
  }

  std::vector<std::size_t> keep{0};
  const auto m = series.measurements();
  for (std::size_t k = 1; k < m.size(); ++k) {
    if (m[k].t_days - m[keep.back()].t_days + slack_days >= min_gap_days) keep.push_back(k);
  }
  if (keep.back() != m.size() - 1) keep.push_back(m.size() - 1);
  return series.select(keep);
}

inline std::optional<IndividualSeries> subsample(const IndividualSeries& series,
                                                 const SubsampleSpec& spec,
                                                 IntervalPolicy policy = {}) {
  validate(spec.mode);
  if (const auto* c = std::get_if<CountMode>(&spec.mode)) {
    if (c->n > series.size()) return std::nullopt;
    return subsample_count(series, c->n, spec.seed, spec.replicate_index);
  }
  return subsample_interval(series, std::get<IntervalMode>(spec.mode).min_gap_weeks, policy);
}

// Mean of successive gaps, in weeks.
inline double mean_interval_weeks(const IndividualSeries& series) {
  if (series.size() < 2) throw TooShortError("series '" + series.id() + "' is too short");
  return series.followup_weeks() / static_cast<double>(series.size() - 1);
}

inline std::vector<double> gaps_weeks(const IndividualSeries& series) {
  std::vector<double> gaps;
  gaps.reserve(series.size() - 1);
  const auto m = series.measurements();
  for (std::size_t k = 1; k < m.size(); ++k) {
    gaps.push_back(TimeUnitPolicy::to_weeks(m[k].t_days - m[k - 1].t_days));
  }
  return gaps;
}

}  // namespace cvl
