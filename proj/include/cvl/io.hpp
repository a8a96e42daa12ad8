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

#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unistd.h>
#include <utility>
#include <vector>

#include "cvl/core.hpp"
#include "cvl/error.hpp"
#include "cvl/sampling.hpp"

namespace cvl {

enum class TimeMode { iso_dates, numeric_days, numeric_weeks };
enum class OutputFormat { csv, json, markdown };

inline std::string_view to_string(TimeMode m) {
  switch (m) {
    case TimeMode::iso_dates: return "iso-dates";
    case TimeMode::numeric_days: return "numeric-days";
    case TimeMode::numeric_weeks: return "numeric-weeks";
  }
  return "unknown";
}

inline TimeMode parse_time_mode(std::string_view s) {
  if (s == "iso-dates") return TimeMode::iso_dates;
  if (s == "numeric-days") return TimeMode::numeric_days;
  if (s == "numeric-weeks") return TimeMode::numeric_weeks;
  throw ConfigError("unknown time mode '" + std::string(s) + "'");
}

inline std::string_view to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::markdown: return "markdown";
  }
  return "unknown";
}

inline OutputFormat parse_output_format(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  if (s == "markdown" || s == "markdown-table" || s == "md") return OutputFormat::markdown;
  throw ConfigError("unknown output format '" + std::string(s) + "'");
}

// Settings shared by every command. All of them are echoed into report
// metadata.
struct RunConfig {
  double detection_limit = kDefaultDetectionLimit;
  std::size_t min_measures = 2;
  TimeMode time_mode = TimeMode::numeric_days;
  std::uint64_t seed = 1;
  std::size_t replicates = 25;
  OutputFormat format = OutputFormat::csv;
};

// ---------------------------------------------------------------------------
// Text helpers
// ---------------------------------------------------------------------------

// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw ValidationError("cannot format number");
  return std::string(buf, end);
}

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

// Days since 1970-01-01 for a YYYY-MM-DD date.
inline std::optional<double> parse_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto field = [&](std::string_view part, auto& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc{} && ptr == part.data() + part.size();
  };
  if (!field(s.substr(0, 4), y) || !field(s.substr(5, 2), m) || !field(s.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCohortHeader = "individual_id,t,vl";

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t individuals_read = 0;
  std::vector<std::string> dropped_ids;  // below the minimum-measures rule
};

struct IngestResult {
  Cohort cohort;
  IngestReport report;
};

/// Reads the longitudinal `individual_id,t,vl` format.
///
/// Lines starting with '#' and blank lines are skipped. Rows are grouped by id
/// and each group goes through build_series, so row order does not matter.
/// Individuals with fewer than `min_measures` rows are dropped and listed in
/// the report. The cohort is ordered by id.
inline IngestResult ingest_cohort(std::istream& in, const RunConfig& config) {
  if (config.min_measures < 2) throw ConfigError("minimum measures must be >= 2");

  std::map<std::string, std::vector<RawPoint>> groups;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  IngestReport report;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!have_header) {
      if (text != kCohortHeader) {
        throw ParseError("expected header '" + std::string(kCohortHeader) + "'", line_no);
      }
      have_header = true;
      continue;
    }
    const auto fields = split(text, ',');
    if (fields.size() != 3) {
      throw ParseError("expected 3 fields, got " + std::to_string(fields.size()), line_no);
    }
    if (fields[0].empty()) throw ParseError("empty individual_id", line_no);

    std::optional<double> t;
    switch (config.time_mode) {
      case TimeMode::iso_dates:
        t = parse_iso_date(fields[1]);
        if (!t) throw ParseError("unparseable date '" + std::string(fields[1]) + "'", line_no);
        break;
      case TimeMode::numeric_days:
      case TimeMode::numeric_weeks:
        t = parse_number(fields[1]);
        if (!t) throw ParseError("unparseable time '" + std::string(fields[1]) + "'", line_no);
        if (config.time_mode == TimeMode::numeric_weeks) *t = TimeUnitPolicy::from_weeks(*t);
        break;
    }
    const auto vl = parse_number(fields[2]);
    if (!vl || *vl < 0) {
      throw ParseError("viral load must be a nonnegative number, got '" +
                           std::string(fields[2]) + "'",
                       line_no);
    }
    groups[std::string(fields[0])].push_back({*t, *vl});
    ++report.rows_read;
  }
  if (!have_header) throw ParseError("empty input: no header found", 0);
  if (report.rows_read == 0) throw ParseError("no data rows", 0);

  IngestResult result;
  report.individuals_read = groups.size();
  for (auto& [id, points] : groups) {
    if (points.size() < config.min_measures) {
      report.dropped_ids.push_back(id);
      continue;
    }
    try {
      result.cohort.push_back(build_series(id, points, config.detection_limit));
    } catch (const Error& e) {
      throw Error(e.kind(), "individual '" + id + "': " + e.what());
    }
  }
  result.report = std::move(report);
  return result;
}

inline IngestResult ingest_cohort(const std::filesystem::path& path, const RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return ingest_cohort(in, config);
}

// ---------------------------------------------------------------------------
// Export and digest
// ---------------------------------------------------------------------------

// Times are written in days, raw viral loads exactly.
inline void write_cohort_csv(std::ostream& out, const Cohort& cohort) {
  out << kCohortHeader << '\n';
  for (const auto& series : cohort) {
    for (const auto& m : series.measurements()) {
      out << series.id() << ',' << format_double(m.t_days) << ',' << format_double(m.vl_copies)
          << '\n';
    }
  }
}

// FNV-1a over ids, times, raw values and detection limits, as hex.
inline std::string cohort_digest(const Cohort& cohort) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& series : cohort) {
    feed(series.id().data(), series.id().size());
    const double limit = series.detection_limit();
    feed(&limit, sizeof limit);
    for (const auto& m : series.measurements()) {
      feed(&m.t_days, sizeof m.t_days);
      feed(&m.vl_copies, sizeof m.vl_copies);
    }
    const char sep = '\n';
    feed(&sep, 1);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// Writes `content` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file. "-" or an empty path
/// writes to `fallback`.
inline void atomic_write(const std::filesystem::path& path, std::string_view content,
                         std::ostream& fallback = std::cout) {
  if (path.empty() || path == "-") {
    fallback << content;
    fallback.flush();
    return;
  }
  auto tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

}  // namespace cvl
