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

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cvl/analytics.hpp"
#include "cvl/estimators.hpp"
#include "cvl/io.hpp"
#include "cvl/simulator.hpp"
#include "cvl/version.hpp"

namespace cvl {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Parameter and config serialization
// ---------------------------------------------------------------------------

inline json to_json(const SimParams& p) {
  return json{
      {"n_individuals", p.n_individuals},
      {"horizon_weeks", p.horizon_weeks},
      {"baseline_log_mean", p.baseline_log_mean},
      {"baseline_log_sd", p.baseline_log_sd},
      {"suppression_halflife_weeks", p.suppression_halflife_weeks},
      {"time_to_suppression_target_weeks", p.time_to_suppression_target_weeks},
      {"weekly_rebound_hazard", p.weekly_rebound_hazard},
      {"rebound_log_mean", p.rebound_log_mean},
      {"rebound_log_sd", p.rebound_log_sd},
      {"resuppression_halflife_weeks", p.resuppression_halflife_weeks},
      {"weekly_dropout_hazard", p.weekly_dropout_hazard},
      {"dropout_onset_weeks", p.dropout_onset_weeks},
      {"measurement_noise_sd", p.measurement_noise_sd},
      {"detection_limit", p.detection_limit},
  };
}

// Overrides fields of `base` with those present in `j`. Unknown keys are an
// error so typos do not silently fall back to defaults.
inline SimParams sim_params_from_json(const json& j, SimParams base = {}) {
  if (!j.is_object()) throw ConfigError("simulation parameters must be a JSON object");
  const json known = to_json(base);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown simulation parameter '" + key + "'");
    if (!value.is_number()) throw ConfigError("simulation parameter '" + key + "' must be numeric");
  }
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("n_individuals", base.n_individuals);
  get("horizon_weeks", base.horizon_weeks);
  get("baseline_log_mean", base.baseline_log_mean);
  get("baseline_log_sd", base.baseline_log_sd);
  get("suppression_halflife_weeks", base.suppression_halflife_weeks);
  get("time_to_suppression_target_weeks", base.time_to_suppression_target_weeks);
  get("weekly_rebound_hazard", base.weekly_rebound_hazard);
  get("rebound_log_mean", base.rebound_log_mean);
  get("rebound_log_sd", base.rebound_log_sd);
  get("resuppression_halflife_weeks", base.resuppression_halflife_weeks);
  get("weekly_dropout_hazard", base.weekly_dropout_hazard);
  get("dropout_onset_weeks", base.dropout_onset_weeks);
  get("measurement_noise_sd", base.measurement_noise_sd);
  get("detection_limit", base.detection_limit);
  base.validate();
  return base;
}

inline json to_json(const RunConfig& c) {
  return json{
      {"detection_limit", c.detection_limit},
      {"min_measures", c.min_measures},
      {"time_mode", to_string(c.time_mode)},
      {"seed", c.seed},
      {"replicates", c.replicates},
      {"format", to_string(c.format)},
  };
}

inline json to_json(const IngestReport& r) {
  return json{{"rows_read", r.rows_read},
              {"individuals_read", r.individuals_read},
              {"individuals_dropped", r.dropped_ids.size()},
              {"dropped_ids", r.dropped_ids}};
}

inline json make_metadata(std::string_view command, json config) {
  return json{{"tool", "cvl"},
              {"version", kVersion},
              {"command", command},
              {"config", std::move(config)}};
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fixed2(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string quartiles_text(const Quartiles& q) {
  return fixed2(q.median) + " (" + fixed2(q.q1) + ", " + fixed2(q.q3) + ")";
}

inline std::string signed_percent(long pct) {
  return (pct > 0 ? "+" : "") + std::to_string(pct) + "%";
}

inline void csv_metadata(std::ostream& out, const json& meta) {
  out << "# cvl-metadata: " << meta.dump() << '\n';
}

inline void markdown_metadata(std::ostream& out, const json& meta) {
  out << "<!-- cvl-metadata: " << meta.dump() << " -->\n\n";
}

inline std::string json_document(const json& meta, json data) {
  json doc{{"metadata", meta}, {"data", std::move(data)}};
  return doc.dump(2) + "\n";
}

inline json to_json(const Quartiles& q) {
  return json{{"median", q.median}, {"q1", q.q1}, {"q3", q.q3}};
}

}  // namespace detail

inline std::string render_cohort(const Cohort& cohort, const json& meta) {
  std::ostringstream out;
  detail::csv_metadata(out, meta);
  write_cohort_csv(out, cohort);
  return out.str();
}

inline std::string render_estimates(const std::vector<CvlEstimate>& estimates, const json& meta,
                                    OutputFormat format) {
  std::ostringstream out;
  switch (format) {
    case OutputFormat::csv:
      detail::csv_metadata(out, meta);
      out << "individual_id,n_points,followup_years,cvl,cvl_fu,method\n";
      for (const auto& e : estimates) {
        out << e.id << ',' << e.n_points << ',' << format_double(e.followup_years) << ','
            << format_double(e.cvl) << ',' << format_double(e.cvl_fu) << ','
            << to_string(e.method) << '\n';
      }
      return out.str();
    case OutputFormat::json: {
      json rows = json::array();
      for (const auto& e : estimates) {
        rows.push_back({{"individual_id", e.id},
                        {"n_points", e.n_points},
                        {"followup_years", e.followup_years},
                        {"cvl", e.cvl},
                        {"cvl_fu", e.cvl_fu},
                        {"method", to_string(e.method)}});
      }
      return detail::json_document(meta, std::move(rows));
    }
    case OutputFormat::markdown:
      detail::markdown_metadata(out, meta);
      out << "| Individual | N | Follow-up (years) | cVL | cVL_FU | Method |\n"
          << "|---|---:|---:|---:|---:|---|\n";
      for (const auto& e : estimates) {
        out << "| " << e.id << " | " << e.n_points << " | " << detail::fixed2(e.followup_years)
            << " | " << detail::fixed2(e.cvl) << " | " << detail::fixed2(e.cvl_fu) << " | "
            << to_string(e.method) << " |\n";
      }
      return out.str();
  }
  return {};
}

inline std::string render_bias_table(const BiasTable& table, const json& meta,
                                     OutputFormat format) {
  std::ostringstream out;
  switch (format) {
    case OutputFormat::csv:
      detail::csv_metadata(out, meta);
      out << "strategy,param,effective_n,cvl_median,cvl_q1,cvl_q3,pct_change,"
             "cvl_fu_median,cvl_fu_q1,cvl_fu_q3,pct_change_fu\n";
      for (const auto& r : table.rows) {
        out << r.strategy << ',' << r.param << ',' << r.effective_n << ','
            << format_double(r.cvl.median) << ',' << format_double(r.cvl.q1) << ','
            << format_double(r.cvl.q3) << ',' << r.pct_change << ','
            << format_double(r.cvl_fu.median) << ',' << format_double(r.cvl_fu.q1) << ','
            << format_double(r.cvl_fu.q3) << ',' << r.pct_change_fu << '\n';
      }
      return out.str();
    case OutputFormat::json: {
      json rows = json::array();
      for (const auto& r : table.rows) {
        json row{{"strategy", r.strategy},
                 {"param", r.param},
                 {"effective_n", r.effective_n},
                 {"n_estimates", r.n_estimates},
                 {"cvl", detail::to_json(r.cvl)},
                 {"pct_change", r.pct_change},
                 {"cvl_fu", detail::to_json(r.cvl_fu)},
                 {"pct_change_fu", r.pct_change_fu}};
        if (r.achieved_mean_interval_weeks) {
          row["achieved_mean_interval_weeks"] = *r.achieved_mean_interval_weeks;
        }
        rows.push_back(std::move(row));
      }
      return detail::json_document(meta, std::move(rows));
    }
    case OutputFormat::markdown: {
      detail::markdown_metadata(out, meta);
      out << "| Sample | N | cVL median (Q1, Q3) | Change | cVL_FU median (Q1, Q3) | Change |\n"
          << "|---|---:|---|---:|---|---:|\n";
      for (const auto& r : table.rows) {
        std::string label = "Reference (all samples)";
        if (r.strategy == "count") label = "N = " + r.param + " VL/person";
        if (r.strategy == "interval") {
          label = r.param + " wks between samples";
          if (r.achieved_mean_interval_weeks) {
            label += " (mean " + detail::fixed2(*r.achieved_mean_interval_weeks) + " wks)";
          }
        }
        out << "| " << label << " | " << r.effective_n << " | " << detail::quartiles_text(r.cvl)
            << " | " << detail::signed_percent(r.pct_change) << " | "
            << detail::quartiles_text(r.cvl_fu) << " | "
            << detail::signed_percent(r.pct_change_fu) << " |\n";
      }
      return out.str();
    }
  }
  return {};
}

inline std::string render_summary(const CohortSummary& s, const json& meta, OutputFormat format) {
  struct Line {
    const char* name;
    double value;
    const Quartiles* q;
  };
  const std::vector<Line> lines{
      {"n_individuals", static_cast<double>(s.n_individuals), nullptr},
      {"n_measurements", static_cast<double>(s.n_measurements), nullptr},
      {"proportion_below_limit", s.proportion_below_limit, nullptr},
      {"proportion_mid_band", s.proportion_mid_band, nullptr},
      {"proportion_high_band", s.proportion_high_band, nullptr},
      {"measures_per_individual", s.measures_per_individual.median, &s.measures_per_individual},
      {"followup_years", s.followup_years.median, &s.followup_years},
      {"followup_weeks", s.followup_weeks.median, &s.followup_weeks},
      {"median_interobservation_weeks", s.median_interobservation_weeks.median,
       &s.median_interobservation_weeks},
      {"mean_interobservation_weeks", s.mean_interobservation_weeks.median,
       &s.mean_interobservation_weeks},
      {"total_person_years", s.total_person_years, nullptr},
  };
  std::ostringstream out;
  switch (format) {
    case OutputFormat::csv:
      detail::csv_metadata(out, meta);
      out << "statistic,value,q1,q3\n";
      for (const auto& l : lines) {
        out << l.name << ',' << format_double(l.value) << ',';
        if (l.q) out << format_double(l.q->q1) << ',' << format_double(l.q->q3);
        else out << ',';
        out << '\n';
      }
      return out.str();
    case OutputFormat::json: {
      json data = json::object();
      for (const auto& l : lines) {
        data[l.name] = l.q ? detail::to_json(*l.q) : json(l.value);
      }
      return detail::json_document(meta, std::move(data));
    }
    case OutputFormat::markdown: {
      detail::markdown_metadata(out, meta);
      const std::string limit = format_double(s.detection_limit);
      out << "| Characteristic | Value |\n|---|---|\n"
          << "| Individuals | " << s.n_individuals << " |\n"
          << "| VL measures (N) | " << s.n_measurements << " |\n"
          << "| Proportion VL < " << limit << " | " << detail::fixed2(s.proportion_below_limit)
          << " |\n"
          << "| Proportion VL " << limit << "-1000 | " << detail::fixed2(s.proportion_mid_band)
          << " |\n"
          << "| Proportion VL > 1000 | " << detail::fixed2(s.proportion_high_band) << " |\n"
          << "| VL measures per individual, median (Q1, Q3) | "
          << detail::quartiles_text(s.measures_per_individual) << " |\n"
          << "| Follow-up (years), median (Q1, Q3) | " << detail::quartiles_text(s.followup_years)
          << " |\n"
          << "| Follow-up (weeks), median (Q1, Q3) | " << detail::quartiles_text(s.followup_weeks)
          << " |\n"
          << "| Median time between observations (weeks), median (Q1, Q3) | "
          << detail::quartiles_text(s.median_interobservation_weeks) << " |\n"
          << "| Total person-years | " << detail::fixed2(s.total_person_years) << " |\n";
      return out.str();
    }
  }
  return {};
}

inline std::string render_bins(const std::vector<TrajectoryBin>& bins, const json& meta,
                               OutputFormat format) {
  std::ostringstream out;
  switch (format) {
    case OutputFormat::csv:
      detail::csv_metadata(out, meta);
      out << "bin_midpoint_weeks,mean_log_value,count\n";
      for (const auto& b : bins) {
        out << format_double(b.midpoint_weeks) << ',' << format_double(b.mean_log_value) << ','
            << b.count << '\n';
      }
      return out.str();
    case OutputFormat::json: {
      json rows = json::array();
      for (const auto& b : bins) {
        rows.push_back({{"bin_midpoint_weeks", b.midpoint_weeks},
                        {"mean_log_value", b.mean_log_value},
                        {"count", b.count}});
      }
      return detail::json_document(meta, std::move(rows));
    }
    case OutputFormat::markdown:
      detail::markdown_metadata(out, meta);
      out << "| Bin midpoint (weeks) | Mean log10 VL | Count |\n|---:|---:|---:|\n";
      for (const auto& b : bins) {
        out << "| " << detail::fixed2(b.midpoint_weeks) << " | "
            << detail::fixed2(b.mean_log_value) << " | " << b.count << " |\n";
      }
      return out.str();
  }
  return {};
}

}  // namespace cvl
