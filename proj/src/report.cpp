#include "lyaplab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lyaplab/errors.hpp"

namespace lyaplab {

ordered_json ext(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  return v;
}

double ext_value(const ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "-inf") return -INFINITY;
    if (s == "inf") return INFINITY;
    if (s == "nan") return NAN;
  }
  throw Error("not an extended real: " + j.dump());
}

ordered_json ext_array(const std::vector<double>& v) {
  ordered_json out = ordered_json::array();
  for (double x : v) out.push_back(ext(x));
  return out;
}

bool ExperimentReport::all_passed() const {
  for (const auto& v : verdicts)
    if (!v.passed) return false;
  return true;
}

namespace {

ordered_json body(const ExperimentReport& r) {
  ordered_json doc;
  doc["schema"] = kReportSchema;
  doc["kind"] = r.kind;
  doc["seed"] = r.seed;
  doc["workers"] = r.workers;
  doc["config"] = r.config;
  doc["results"] = r.results;
  ordered_json verdicts = ordered_json::array();
  for (const auto& v : r.verdicts)
    verdicts.push_back(
        {{"criterion", v.criterion}, {"check", v.check}, {"passed", v.passed}, {"margin", ext(v.margin)}, {"detail", v.detail}});
  doc["verdicts"] = verdicts;
  doc["all_passed"] = r.all_passed();
  return doc;
}

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string report_hash(const ExperimentReport& report) { return fnv1a(body(report).dump()); }

ordered_json report_to_json(const ExperimentReport& report) {
  ordered_json doc = body(report);
  doc["determinism_hash"] = fnv1a(doc.dump());
  doc["wall_clock_seconds"] = report.wall_clock_seconds;
  return doc;
}

std::string emit_json(const ordered_json& doc) { return doc.dump(2) + "\n"; }

ordered_json parse_json_report(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw Error(std::string("malformed JSON report: ") + e.what());
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\n";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw Error("unterminated quoted CSV field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string pointer_escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

// Like ordered_json::flatten, but empty arrays and objects stay leaves so
// that they survive the round trip.
void flatten_into(const ordered_json& j, const std::string& path, std::string& out) {
  if (j.is_object() && !j.empty()) {
    for (const auto& [k, v] : j.items()) flatten_into(v, path + "/" + pointer_escape(k), out);
  } else if (j.is_array() && !j.empty()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten_into(j[i], path + "/" + std::to_string(i), out);
  } else {
    out += csv_row({path, j.dump()});
  }
}

}  // namespace

std::string emit_csv(const ordered_json& doc) {
  std::string out = csv_row({"path", "value"});
  flatten_into(doc, "", out);
  return out;
}

ordered_json parse_csv_report(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows.front() != std::vector<std::string>{"path", "value"})
    throw Error("CSV report must start with the header path,value");
  ordered_json doc;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2) throw Error("CSV report line " + std::to_string(i + 1) + ": expected two fields");
    try {
      // index 0 of a fresh container creates an array, as emit_csv writes them
      doc[ordered_json::json_pointer(rows[i][0])] = ordered_json::parse(rows[i][1]);
    } catch (const ordered_json::exception&) {
      throw Error("CSV report line " + std::to_string(i + 1) + ": malformed path or value");
    }
  }
  return doc;
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

std::string write_report(const ExperimentReport& report, const std::string& dir, const std::string& format) {
  const auto doc = report_to_json(report);
  const std::string name = report.kind + "-seed" + std::to_string(report.seed) + "." + format;
  const std::string path = (std::filesystem::path(dir.empty() ? "." : dir) / name).string();
  if (format == "json")
    write_text(path, emit_json(doc));
  else if (format == "csv")
    write_text(path, emit_csv(doc));
  else
    throw Error("unknown format " + format);
  return path;
}

}  // namespace lyaplab
