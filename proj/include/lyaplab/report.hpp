#pragma once

// Experiment reports: verdicts, JSON and CSV emission, and the determinism
// hash. JSON is the reference form; CSV is the flattened (path, value) view
// of the same document and parses back to it.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lyaplab {

using nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "lyaplab-report/1";

/// Extended reals: finite values as numbers, infinities as "-inf" / "inf".
ordered_json ext(double v);
/// Inverse of ext; throws Error on anything else.
double ext_value(const ordered_json& j);
ordered_json ext_array(const std::vector<double>& v);

struct Verdict {
  std::string criterion;  // "AC1" .. "AC9"
  std::string check;
  bool passed = false;
  /// Distance to the threshold; negative when failed.
  double margin = 0.0;
  std::string detail;
};

struct ExperimentReport {
  std::string kind;
  std::uint64_t seed = 0;
  int workers = 1;
  ordered_json config = ordered_json::object();
  ordered_json results = ordered_json::object();
  std::vector<Verdict> verdicts;
  double wall_clock_seconds = 0.0;

  bool all_passed() const;
  void add(Verdict v) { verdicts.push_back(std::move(v)); }
};

/// Full document; the hash covers everything except wall_clock_seconds.
ordered_json report_to_json(const ExperimentReport& report);
/// FNV-1a 64 of the canonical JSON without the wall clock, as 16 hex digits.
std::string report_hash(const ExperimentReport& report);

std::string emit_json(const ordered_json& doc);
std::string emit_csv(const ordered_json& doc);
ordered_json parse_json_report(const std::string& text);
ordered_json parse_csv_report(const std::string& text);

/// RFC 4180 quoting of one field.
std::string csv_field(const std::string& s);
std::string csv_row(const std::vector<std::string>& fields);
/// Splits CSV text into records; quoted fields may contain commas, quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Writes <dir>/<kind>-seed<seed>.<format> and returns the path.
std::string write_report(const ExperimentReport& report, const std::string& dir, const std::string& format);
/// Writes text to path, creating parent directories.
void write_text(const std::string& path, const std::string& text);

}  // namespace lyaplab
