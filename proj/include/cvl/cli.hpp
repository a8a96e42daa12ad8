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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cvl/analytics.hpp"
#include "cvl/estimators.hpp"
#include "cvl/io.hpp"
#include "cvl/report.hpp"
#include "cvl/sampling.hpp"
#include "cvl/simulator.hpp"

namespace cvl {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitIo = 3,
  kExitValidation = 4,
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io:
      return kExitIo;
    case ErrorKind::configuration:
      return kExitUsage;
    default:
      return kExitValidation;
  }
}

namespace detail {

struct CliOptions {
  std::string input;
  std::string output = "-";
  std::string params_path;
  std::string time_mode = "numeric-days";
  std::string format = "csv";
  std::string mode = "count";
  std::string method = "trapezoid";
  std::vector<std::size_t> n;
  std::vector<double> gap_weeks;
  std::uint64_t seed = 1;
  std::size_t replicates = 25;
  std::size_t replicate = 0;
  std::size_t individuals = 10000;
  std::size_t workers = 1;
  std::size_t min_measures = 2;
  double detection_limit = kDefaultDetectionLimit;
  double bin_weeks = 4.0;
  bool keep_short = false;
  bool individuals_given = false;
  bool limit_given = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline RunConfig resolve_config(const CliOptions& o) {
  RunConfig c;
  c.detection_limit = o.detection_limit;
  c.min_measures = o.min_measures;
  c.time_mode = parse_time_mode(o.time_mode);
  c.seed = o.seed;
  c.replicates = o.replicates;
  c.format = parse_output_format(o.format);
  if (!(c.detection_limit >= 1)) throw ConfigError("--detection-limit must be >= 1");
  if (c.min_measures < 2) throw ConfigError("--min-measures must be >= 2");
  return c;
}

inline IngestResult load_input(const CliOptions& o, const RunConfig& c, std::ostream& err) {
  if (o.input.empty()) throw UsageError("--input is required");
  auto result = ingest_cohort(std::filesystem::path(o.input), c);
  if (!result.report.dropped_ids.empty()) {
    err << "note: dropped " << result.report.dropped_ids.size()
        << " individual(s) with fewer than " << c.min_measures << " measures\n";
  }
  if (result.cohort.empty()) {
    throw ValidationError("no individual meets the minimum of " +
                          std::to_string(c.min_measures) + " measures");
  }
  return result;
}

inline json input_config(const CliOptions& o, const RunConfig& c, const IngestResult& in) {
  json j = to_json(c);
  j["input"] = o.input;
  j["input_digest"] = cohort_digest(in.cohort);
  j["ingestion"] = to_json(in.report);
  return j;
}

// Resolves --mode/--n/--gap-weeks into subsampling modes. `single` limits
// each list to one value (the subsample command).
inline std::vector<SubsampleMode> resolve_modes(const CliOptions& o, bool single) {
  std::vector<SubsampleMode> modes;
  if (o.mode == "count") {
    if (!o.gap_weeks.empty()) throw UsageError("--gap-weeks conflicts with --mode count");
    auto ns = o.n.empty() ? std::vector<std::size_t>{2, 3, 4, 5} : o.n;
    if (single && ns.size() != 1) throw UsageError("subsample takes exactly one --n value");
    for (auto n : ns) modes.emplace_back(CountMode{n});
  } else if (o.mode == "interval") {
    if (!o.n.empty()) throw UsageError("--n conflicts with --mode interval");
    auto gaps = o.gap_weeks.empty() ? std::vector<double>{4, 8, 12, 24} : o.gap_weeks;
    if (single && gaps.size() != 1) {
      throw UsageError("subsample takes exactly one --gap-weeks value");
    }
    for (auto g : gaps) modes.emplace_back(IntervalMode{g});
  } else {
    throw UsageError("--mode must be 'count' or 'interval'");
  }
  for (const auto& m : modes) validate(m);
  return modes;
}

inline json modes_json(const std::vector<SubsampleMode>& modes) {
  json j = json::array();
  for (const auto& m : modes) {
    if (const auto* c = std::get_if<CountMode>(&m)) {
      j.push_back(c->n);
    } else {
      j.push_back(std::get<IntervalMode>(m).min_gap_weeks);
    }
  }
  return j;
}

inline void add_input_options(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--input", o.input, "Longitudinal CSV (individual_id,t,vl)");
  cmd->add_option("--output", o.output, "Output path, '-' for stdout");
  cmd->add_option("--detection-limit", o.detection_limit, "Assay detection limit, copies/mL");
  cmd->add_option("--min-measures", o.min_measures, "Minimum measures per individual");
  cmd->add_option("--time-mode", o.time_mode, "iso-dates | numeric-days | numeric-weeks");
  cmd->add_option("--format", o.format, "csv | json | markdown");
  cmd->add_option("--workers", o.workers, "Worker threads");
}

inline int simulate_cmd(const CliOptions& o, std::ostream& out) {
  SimParams p;
  if (!o.params_path.empty()) {
    std::ifstream in(o.params_path);
    if (!in) throw IoError("cannot open '" + o.params_path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid parameter file: ") + e.what(), 0);
    }
    p = sim_params_from_json(j);
  }
  if (o.individuals_given || o.params_path.empty()) p.n_individuals = o.individuals;
  if (o.limit_given || o.params_path.empty()) p.detection_limit = o.detection_limit;
  p.validate();
  const auto cohort = simulate_cohort(p, o.seed, o.workers);
  json config{{"seed", o.seed}, {"time_mode", "numeric-days"}, {"params", to_json(p)}};
  config["digest"] = cohort_digest(cohort.series);
  atomic_write(o.output, render_cohort(cohort.series, make_metadata("simulate", config)), out);
  return kExitOk;
}

}  // namespace detail

/// Entry point of the `cvl` tool. Returns the process exit status.
inline int run_command(int argc, const char* const* argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  using namespace detail;
  CliOptions o;
  CLI::App app{"Cumulative viremia estimation and sampling-bias experiments", "cvl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic weekly cohort");
  simulate->add_option("--output", o.output, "Output CSV path, '-' for stdout");
  simulate->add_option("--seed", o.seed, "Master seed");
  auto* individuals_opt = simulate->add_option("--individuals", o.individuals, "Cohort size");
  simulate->add_option("--params", o.params_path, "JSON file overriding simulation parameters");
  auto* limit_opt =
      simulate->add_option("--detection-limit", o.detection_limit, "Assay detection limit");
  simulate->add_option("--workers", o.workers, "Worker threads");

  auto* summary = app.add_subcommand("summary", "Cohort characteristics");
  add_input_options(summary, o);

  auto* estimate_sc = app.add_subcommand("estimate", "Per-individual cVL and cVL_FU");
  add_input_options(estimate_sc, o);
  estimate_sc->add_option("--method", o.method, "trapezoid | uniform | simpson");

  auto* subsample_sc = app.add_subcommand("subsample", "Write a thinned cohort");
  add_input_options(subsample_sc, o);
  subsample_sc->add_option("--mode", o.mode, "count | interval");
  subsample_sc->add_option("--n", o.n, "Measures kept per individual")->delimiter(',');
  subsample_sc->add_option("--gap-weeks", o.gap_weeks, "Minimum gap in weeks")->delimiter(',');
  subsample_sc->add_option("--seed", o.seed, "Master seed");
  subsample_sc->add_option("--replicate", o.replicate, "Replicate index");
  subsample_sc->add_flag("--keep-short", o.keep_short,
                         "Keep individuals whose follow-up is shorter than the gap");

  auto* experiment = app.add_subcommand("experiment", "Subsampling bias table");
  add_input_options(experiment, o);
  experiment->add_option("--mode", o.mode, "count | interval");
  experiment->add_option("--n", o.n, "Comma-separated measure counts")->delimiter(',');
  experiment->add_option("--gap-weeks", o.gap_weeks, "Comma-separated gaps")->delimiter(',');
  experiment->add_option("--replicates", o.replicates, "Random draws per individual");
  experiment->add_option("--seed", o.seed, "Master seed");
  experiment->add_flag("--keep-short", o.keep_short,
                       "Keep individuals whose follow-up is shorter than the gap");

  auto* bins = app.add_subcommand("bins", "Mean trajectory in fixed-width time bins");
  add_input_options(bins, o);
  bins->add_option("--bin-weeks", o.bin_weeks, "Bin width in weeks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      o.individuals_given = individuals_opt->count() > 0;
      o.limit_given = limit_opt->count() > 0;
      return simulate_cmd(o, out);
    }

    const RunConfig config = resolve_config(o);
    const auto input = load_input(o, config, err);
    const auto& cohort = input.cohort;
    json meta_config = input_config(o, config, input);

    if (summary->parsed()) {
      const auto s = cohort_summary(cohort, config.detection_limit);
      atomic_write(o.output, render_summary(s, make_metadata("summary", meta_config), config.format),
                   out);
    } else if (estimate_sc->parsed()) {
      const Method method = parse_method(o.method);
      meta_config["method"] = to_string(method);
      std::vector<CvlEstimate> estimates(cohort.size());
      parallel_for(cohort.size(), o.workers, [&](std::size_t i) {
        try {
          estimates[i] = estimate(cohort[i], method);
        } catch (const Error& e) {
          throw Error(e.kind(), "individual '" + cohort[i].id() + "': " + e.what());
        }
      });
      atomic_write(o.output,
                   render_estimates(estimates, make_metadata("estimate", meta_config),
                                    config.format),
                   out);
    } else if (subsample_sc->parsed()) {
      const auto modes = resolve_modes(o, true);
      const IntervalPolicy policy{!o.keep_short};
      meta_config["mode"] = o.mode;
      meta_config["params"] = modes_json(modes);
      meta_config["replicate"] = o.replicate;
      meta_config["exclude_short_followup"] = policy.exclude_short_followup;
      Cohort thinned;
      std::size_t excluded = 0;
      for (const auto& series : cohort) {
        auto sub = subsample(series, SubsampleSpec{modes.front(), config.seed, o.replicate},
                             policy);
        if (sub) {
          thinned.push_back(std::move(*sub));
        } else {
          ++excluded;
        }
      }
      meta_config["excluded"] = excluded;
      meta_config["time_mode"] = "numeric-days";
      atomic_write(o.output, render_cohort(thinned, make_metadata("subsample", meta_config)), out);
    } else if (experiment->parsed()) {
      const auto modes = resolve_modes(o, false);
      const IntervalPolicy policy{!o.keep_short};
      meta_config["mode"] = o.mode;
      meta_config["params"] = modes_json(modes);
      meta_config["pooling"] = "pool replicates per individual, then quartiles";
      meta_config["exclude_short_followup"] = policy.exclude_short_followup;
      const auto table =
          bias_experiment(cohort, modes, config.replicates, config.seed, o.workers, policy);
      json achieved = json::object();
      for (const auto& r : table.rows) {
        if (r.achieved_mean_interval_weeks) achieved[r.param] = *r.achieved_mean_interval_weeks;
      }
      if (!achieved.empty()) meta_config["achieved_mean_interval_weeks"] = achieved;
      atomic_write(o.output,
                   render_bias_table(table, make_metadata("experiment", meta_config),
                                     config.format),
                   out);
    } else if (bins->parsed()) {
      meta_config["bin_weeks"] = o.bin_weeks;
      const auto b = trajectory_bins(cohort, o.bin_weeks);
      atomic_write(o.output, render_bins(b, make_metadata("bins", meta_config), config.format),
                   out);
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("cvl");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_command(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace cvl
