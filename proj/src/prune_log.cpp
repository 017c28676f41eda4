#include <charconv>
#include <cmath>
#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pgp/errors.hpp"
#include "pgp/pruning.hpp"

namespace pgp {

void PruneLog::append(const PruneLog& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
}

std::size_t PruneLog::marginalizations() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const Record& r) {
    return std::holds_alternative<MarginalizeRecord>(r);
  }));
}

std::size_t PruneLog::edge_removals() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const Record& r) {
    return std::holds_alternative<EdgeRemovalRecord>(r);
  }));
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Overloaded {
  std::ostringstream& out;
  void operator()(const MarginalizeRecord& r) const {
    out << "MARGINALIZE " << to_string(r.method) << ' ' << r.vertex << ' ' << fmt(r.density) << ' '
        << fmt(r.gate) << ' ' << r.vertices_before << ' ' << r.vertices_after << ' ' << r.edges_before << ' '
        << r.edges_after << '\n';
  }
  void operator()(const VerdictRecord& r) const {
    out << "VERDICT " << r.vertex << ' ' << r.a << ' ' << r.b << ' ' << to_string(r.verdict) << ' ' << fmt(r.gap)
        << '\n';
  }
  void operator()(const EdgeRemovalRecord& r) const {
    out << "REMOVE_EDGE " << r.from << ' ' << r.to << ' ' << fmt(r.trace) << ' ' << fmt(r.ratio) << ' '
        << r.edges_before << ' ' << r.edges_after << '\n';
  }
  void operator()(const ExemptRecord& r) const { out << "EXEMPT " << r.vertex << '\n'; }
};

template <typename T>
T field(const std::vector<std::string>& tok, std::size_t i, std::size_t line) {
  if (i >= tok.size()) throw ParseError(line, "missing field " + std::to_string(i));
  const std::string& s = tok[i];
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(line, "malformed field '" + s + "'");
  return value;
}

CombineVerdict parse_verdict(const std::string& s, std::size_t line) {
  for (auto v : {CombineVerdict::fused, CombineVerdict::keep_odometry_drop_loop, CombineVerdict::drop_both}) {
    if (s == to_string(v)) return v;
  }
  throw ParseError(line, "unknown verdict '" + s + "'");
}

}  // namespace

std::string serialize_prune_log(const PruneLog& log) {
  std::ostringstream out;
  for (const auto& r : log.records) std::visit(Overloaded{out}, r);
  return out.str();
}

PruneLog parse_prune_log(std::string_view text) {
  PruneLog log;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0].starts_with('#')) continue;
    const std::string& tag = tok[0];
    if (tag == "MARGINALIZE") {
      if (tok.size() != 9) throw ParseError(line, "MARGINALIZE expects 8 fields");
      MarginalizeRecord r;
      try {
        r.method = parse_marginalization_method(tok[1]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(line, e.what());
      }
      r.vertex = field<VertexId>(tok, 2, line);
      r.density = field<double>(tok, 3, line);
      r.gate = field<double>(tok, 4, line);
      r.vertices_before = field<std::size_t>(tok, 5, line);
      r.vertices_after = field<std::size_t>(tok, 6, line);
      r.edges_before = field<std::size_t>(tok, 7, line);
      r.edges_after = field<std::size_t>(tok, 8, line);
      log.records.emplace_back(r);
    } else if (tag == "VERDICT") {
      if (tok.size() != 6) throw ParseError(line, "VERDICT expects 5 fields");
      VerdictRecord r{field<VertexId>(tok, 1, line), field<VertexId>(tok, 2, line), field<VertexId>(tok, 3, line),
                      parse_verdict(tok[4], line), field<double>(tok, 5, line)};
      log.records.emplace_back(r);
    } else if (tag == "REMOVE_EDGE") {
      if (tok.size() != 7) throw ParseError(line, "REMOVE_EDGE expects 6 fields");
      EdgeRemovalRecord r{field<VertexId>(tok, 1, line),    field<VertexId>(tok, 2, line),
                          field<double>(tok, 3, line),      field<double>(tok, 4, line),
                          field<std::size_t>(tok, 5, line), field<std::size_t>(tok, 6, line)};
      log.records.emplace_back(r);
    } else if (tag == "EXEMPT") {
      if (tok.size() != 2) throw ParseError(line, "EXEMPT expects 1 field");
      log.records.emplace_back(ExemptRecord{field<VertexId>(tok, 1, line)});
    } else {
      throw ParseError(line, "unknown prune log record '" + tag + "'");
    }
  }
  return log;
}

PoseGraph replay_prune_log(PoseGraph g, const PruneLog& log) {
  for (const auto& record : log.records) {
    if (const auto* m = std::get_if<MarginalizeRecord>(&record)) {
      if (m->method == MarginalizationMethod::sid) {
        marginalize_sid(g, m->vertex, m->gate);
      } else {
        marginalize_chow_liu(g, m->vertex);
      }
    } else if (const auto* r = std::get_if<EdgeRemovalRecord>(&record)) {
      // Parallel loop closures on one pair are told apart by their trace.
      std::optional<EdgeId> match;
      double best = std::numeric_limits<double>::infinity();
      for (EdgeId id : g.edges_between(r->from, r->to)) {
        const Edge& e = g.edge(id);
        if (!e.is_loop()) continue;
        const double diff = std::abs(e.info.trace() - r->trace);
        if (diff < best) {
          best = diff;
          match = id;
        }
      }
      if (!match) {
        throw GraphError("prune log removes a missing loop closure " + std::to_string(r->from) + "-" +
                         std::to_string(r->to));
      }
      g.remove_edge(*match);
    }
  }
  return g;
}

}  // namespace pgp
