#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pgp/errors.hpp"
#include "pgp/io.hpp"

namespace pgp {

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "jsonl" || name == "json-lines" || name == "json_lines") return ReportFormat::json_lines;
  throw std::invalid_argument("unknown report format '" + std::string(name) + "'");
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> columns = {
      "config",        "seed",          "corruption_fraction", "method",
      "te_trans_mean", "te_trans_sd",   "te_rot_mean",         "te_rot_sd",
      "me_trans_mean", "me_trans_sd",   "me_rot_mean",         "me_rot_sd",
      "rme_trans_mean", "rme_trans_sd", "rme_rot_mean",        "rme_rot_sd",
      "vertices_before", "vertices_after", "edges_before",     "edges_after",
      "prune_seconds", "optimize_seconds"};
  return columns;
}

namespace {

// Values of one record in report_columns() order, already formatted.
std::vector<std::string> cells(const RunRecord& r) {
  std::vector<std::string> out{r.config, std::to_string(r.seed), format_double(r.corruption_fraction), r.method};
  for (const MetricSummary* m : {&r.te, &r.me, &r.rme}) {
    for (double v : {m->trans_mean, m->trans_sd, m->rot_mean, m->rot_sd}) out.push_back(format_double(v));
  }
  for (std::size_t v : {r.vertices_before, r.vertices_after, r.edges_before, r.edges_after}) {
    out.push_back(std::to_string(v));
  }
  out.push_back(format_double(r.prune_seconds));
  out.push_back(format_double(r.optimize_seconds));
  return out;
}

nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "malformed number '" + s + "'");
  }
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(line, "malformed integer '" + s + "'");
  return v;
}

}  // namespace

std::string export_report(const RunReport& report, ReportFormat format) {
  std::ostringstream out;
  const auto& columns = report_columns();
  if (format == ReportFormat::csv) {
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& run : report.runs) {
      const auto row = cells(run);
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
    return out.str();
  }
  for (const auto& run : report.runs) {
    nlohmann::ordered_json j;
    j["config"] = run.config;
    j["seed"] = run.seed;
    j["corruption_fraction"] = json_number(run.corruption_fraction);
    j["method"] = run.method;
    const char* prefixes[] = {"te", "me", "rme"};
    const MetricSummary* metrics[] = {&run.te, &run.me, &run.rme};
    for (int k = 0; k < 3; ++k) {
      const std::string p = prefixes[k];
      j[p + "_trans_mean"] = json_number(metrics[k]->trans_mean);
      j[p + "_trans_sd"] = json_number(metrics[k]->trans_sd);
      j[p + "_rot_mean"] = json_number(metrics[k]->rot_mean);
      j[p + "_rot_sd"] = json_number(metrics[k]->rot_sd);
    }
    j["vertices_before"] = run.vertices_before;
    j["vertices_after"] = run.vertices_after;
    j["edges_before"] = run.edges_before;
    j["edges_after"] = run.edges_after;
    j["prune_seconds"] = json_number(run.prune_seconds);
    j["optimize_seconds"] = json_number(run.optimize_seconds);
    out << j.dump() << '\n';
  }
  return out.str();
}

RunReport parse_report_csv(std::string_view text) {
  RunReport report;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  const auto& columns = report_columns();
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (number == 1) {
      if (f != columns) throw ParseError(number, "unexpected report header");
      continue;
    }
    if (f.size() != columns.size()) throw ParseError(number, "wrong number of columns");
    RunRecord r;
    std::size_t k = 0;
    r.config = f[k++];
    r.seed = parse_uint(f[k++], number);
    r.corruption_fraction = parse_double(f[k++], number);
    r.method = f[k++];
    for (MetricSummary* m : {&r.te, &r.me, &r.rme}) {
      m->trans_mean = parse_double(f[k++], number);
      m->trans_sd = parse_double(f[k++], number);
      m->rot_mean = parse_double(f[k++], number);
      m->rot_sd = parse_double(f[k++], number);
    }
    for (std::size_t* v : {&r.vertices_before, &r.vertices_after, &r.edges_before, &r.edges_after}) {
      *v = static_cast<std::size_t>(parse_uint(f[k++], number));
    }
    r.prune_seconds = parse_double(f[k++], number);
    r.optimize_seconds = parse_double(f[k++], number);
    report.runs.push_back(std::move(r));
  }
  return report;
}

}  // namespace pgp
