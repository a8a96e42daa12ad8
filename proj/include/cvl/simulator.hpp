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
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "cvl/core.hpp"
#include "cvl/error.hpp"
#include "cvl/parallel.hpp"
#include "cvl/sampling.hpp"

namespace cvl {

/// Parameters of the weekly viral-load generator.
///
/// Latent log10 viral load starts at a normally distributed baseline and
/// decays geometrically toward zero with `suppression_halflife_weeks`. The
/// initial decay is sped up when needed so that the latent value reaches the
/// detection limit no later than `time_to_suppression_target_weeks`. Each week
/// a rebound occurs with `weekly_rebound_hazard`: the latent value jumps to a
/// normal draw around `rebound_log_mean` (if higher) and from then on decays
/// with `resuppression_halflife_weeks`. Observations add normal assay noise in
/// log space before censoring.
///
/// Follow-up runs from week 0 to `horizon_weeks` unless the individual drops
/// out: from `dropout_onset_weeks` on, each week is the last observed one with
/// probability `weekly_dropout_hazard`.
///
/// Defaults were tuned so a 10,000-person cohort reproduces the published
/// summary of the simulated ART-initiation data: about 61 weekly measures per
/// person, VL band proportions near (0.17, 0.67, 0.16) for <50, 50-1000, >1000
/// copies/mL, and a median reference cVL near 2.1 log10 copies/mL x years.
struct SimParams {
  std::size_t n_individuals = 10000;
  int horizon_weeks = 80;
  double baseline_log_mean = 3.88;
  double baseline_log_sd = 0.445;
  double suppression_halflife_weeks = 3.2;
  double time_to_suppression_target_weeks = 16.0;
  double weekly_rebound_hazard = 0.48;
  double rebound_log_mean = 2.08;
  double rebound_log_sd = 0.54;
  double resuppression_halflife_weeks = 11.0;
  double weekly_dropout_hazard = 0.075;
  int dropout_onset_weeks = 51;
  double measurement_noise_sd = 0.46;
  double detection_limit = kDefaultDetectionLimit;

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string("invalid simulation parameter: ") + what);
    };
    require(horizon_weeks >= 2, "horizon_weeks must be >= 2");
    require(std::isfinite(baseline_log_mean) && baseline_log_mean >= 0,
            "baseline_log_mean must be >= 0");
    require(baseline_log_sd >= 0, "baseline_log_sd must be >= 0");
    require(suppression_halflife_weeks > 0, "suppression_halflife_weeks must be > 0");
    require(time_to_suppression_target_weeks > 0,
            "time_to_suppression_target_weeks must be > 0");
    require(weekly_rebound_hazard >= 0 && weekly_rebound_hazard <= 1,
            "weekly_rebound_hazard must be in [0, 1]");
    require(std::isfinite(rebound_log_mean), "rebound_log_mean must be finite");
    require(rebound_log_sd >= 0, "rebound_log_sd must be >= 0");
    require(resuppression_halflife_weeks > 0, "resuppression_halflife_weeks must be > 0");
    require(weekly_dropout_hazard >= 0 && weekly_dropout_hazard <= 1,
            "weekly_dropout_hazard must be in [0, 1]");
    require(dropout_onset_weeks >= 1, "dropout_onset_weeks must be >= 1");
    require(measurement_noise_sd >= 0, "measurement_noise_sd must be >= 0");
    require(detection_limit >= 1, "detection_limit must be >= 1");
  }

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

struct SyntheticCohort {
  SimParams params;
  std::uint64_t seed = 0;
  Cohort series;
};

inline std::string simulated_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%07zu", index + 1);
  return buf;
}

// Halflife of the initial decay for a given baseline.
inline double initial_halflife_weeks(const SimParams& p, double baseline) {
  const double limit_log = std::log10(p.detection_limit);
  double halflife = p.suppression_halflife_weeks;
  if (baseline > limit_log && limit_log > 0) {
    const double needed = p.time_to_suppression_target_weeks / std::log2(baseline / limit_log);
    halflife = std::min(halflife, needed);
  }
  return halflife;
}

inline IndividualSeries simulate_individual(const SimParams& p, std::string id,
                                            std::uint64_t stream_seed) {
  p.validate();
  std::mt19937_64 rng(stream_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto normal = [&rng](double mean, double sd) {
    if (sd == 0) return mean;
    return std::normal_distribution<double>(mean, sd)(rng);
  };

  const double baseline = std::max(0.0, normal(p.baseline_log_mean, p.baseline_log_sd));

  int last_week = p.horizon_weeks;
  for (int w = p.dropout_onset_weeks; w < p.horizon_weeks; ++w) {
    if (unif(rng) < p.weekly_dropout_hazard) {
      last_week = w;
      break;
    }
  }

  double latent = baseline;
  double decay = std::exp2(-1.0 / initial_halflife_weeks(p, baseline));
  const double resuppression_decay = std::exp2(-1.0 / p.resuppression_halflife_weeks);

  std::vector<RawPoint> points;
  points.reserve(static_cast<std::size_t>(last_week) + 1);
  for (int w = 0; w <= last_week; ++w) {
    if (w > 0) {
      latent *= decay;
      if (unif(rng) < p.weekly_rebound_hazard) {
        latent = std::max(latent, normal(p.rebound_log_mean, p.rebound_log_sd));
        decay = resuppression_decay;
      }
    }
    const double observed = latent + normal(0.0, p.measurement_noise_sd);
    points.push_back({TimeUnitPolicy::from_weeks(w), std::pow(10.0, observed)});
  }
  return build_series(std::move(id), points, p.detection_limit);
}

inline SyntheticCohort simulate_cohort(const SimParams& p, std::uint64_t master_seed,
                                       std::size_t workers = 1) {
  p.validate();
  std::vector<std::optional<IndividualSeries>> slots(p.n_individuals);
  parallel_for(p.n_individuals, workers, [&](std::size_t i) {
    auto id = simulated_id(i);
    const auto seed = derive_stream_seed(master_seed, 0, id);
    slots[i].emplace(simulate_individual(p, std::move(id), seed));
  });
  SyntheticCohort cohort{p, master_seed, {}};
  cohort.series.reserve(slots.size());
  for (auto& s : slots) cohort.series.push_back(std::move(*s));
  return cohort;
}

}  // namespace cvl
