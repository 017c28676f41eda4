#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>

#include "pgp/errors.hpp"
#include "pgp/io.hpp"

namespace pgp {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T number(std::string_view s, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, "malformed numeric field '" + std::string(s) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ParseError(line, "non-finite numeric field '" + std::string(s) + "'");
  }
  return value;
}

struct VertexRecord {
  std::size_t line;
  VertexId id;
  Pose2 pose;
};

struct EdgeRecord {
  std::size_t line;
  Edge edge;
  bool kind_tagged;
};

struct Lines {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t number = 0;
  bool next(std::string_view& out) {
    if (pos >= text.size()) return false;
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    out = text.substr(pos, end - pos);
    if (!out.empty() && out.back() == '\r') out.remove_suffix(1);
    pos = end + 1;
    ++number;
    return true;
  }
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

VertexRecord parse_vertex(const std::vector<std::string_view>& tok, std::size_t line) {
  if (tok.size() != 5) throw ParseError(line, "VERTEX_SE2 expects 4 fields");
  return {line, number<VertexId>(tok[1], line),
          Pose2(number<double>(tok[2], line), number<double>(tok[3], line), number<double>(tok[4], line))};
}

}  // namespace

ParsedGraph parse_graph(std::string_view text) {
  std::vector<VertexRecord> vertices;
  std::vector<EdgeRecord> edges;
  std::optional<std::pair<std::size_t, VertexId>> fix;
  std::size_t skipped = 0;

  // Kind from a tag comment; `tagged` is false when no tag precedes the edge.
  bool tagged = false;
  EdgeKind pending_kind = EdgeKind::odometry;
  Provenance pending_provenance = Provenance::genuine;

  Lines lines{text};
  std::string_view raw;
  while (lines.next(raw)) {
    const std::size_t line = lines.number;
    const std::string_view content = trim(raw);
    if (content.empty()) continue;
    if (content.front() == '#') {
      const std::string_view tag = trim(content.substr(1));
      if (tag == "KIND:LOOP" || tag == "KIND:ODOM") {
        tagged = true;
        pending_kind = tag == "KIND:LOOP" ? EdgeKind::loop_closure : EdgeKind::odometry;
      } else if (tag == "PROV:CORRUPTED") pending_provenance = Provenance::corrupted;
      else if (tag == "PROV:GENUINE") pending_provenance = Provenance::genuine;
      continue;
    }
    const auto tok = split(content);
    if (tok[0] == "VERTEX_SE2") {
      vertices.push_back(parse_vertex(tok, line));
    } else if (tok[0] == "EDGE_SE2") {
      if (tok.size() != 12) throw ParseError(line, "EDGE_SE2 expects 11 fields");
      Edge e;
      e.from = number<VertexId>(tok[1], line);
      e.to = number<VertexId>(tok[2], line);
      e.measurement = Pose2(number<double>(tok[3], line), number<double>(tok[4], line), number<double>(tok[5], line));
      double v[6];
      for (int k = 0; k < 6; ++k) v[k] = number<double>(tok[6 + static_cast<std::size_t>(k)], line);
      e.info << v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4], v[5];
      if (!is_positive_definite(e.info)) throw ParseError(line, "information matrix is not positive definite");
      if (e.from == e.to) throw ParseError(line, "edge connects a vertex to itself");
      e.kind = tagged ? pending_kind : e.to == e.from + 1 ? EdgeKind::odometry : EdgeKind::loop_closure;
      e.provenance = pending_provenance;
      edges.push_back({line, e, tagged});
    } else if (tok[0] == "FIX") {
      if (tok.size() != 2) throw ParseError(line, "FIX expects 1 field");
      fix.emplace(line, number<VertexId>(tok[1], line));
    } else {
      ++skipped;
    }
    tagged = false;
    pending_provenance = Provenance::genuine;
  }

  ParsedGraph out;
  for (const auto& v : vertices) {
    if (out.graph.has_vertex(v.id)) throw ParseError(v.line, "duplicate vertex " + std::to_string(v.id));
    out.graph.add_vertex(v.id, v.pose);
  }
  for (auto& rec : edges) {
    Edge& e = rec.edge;
    if (!out.graph.has_vertex(e.from) || !out.graph.has_vertex(e.to)) {
      throw ParseError(rec.line, "edge references an undeclared vertex");
    }
    // Consecutive ids that do not fit the odometry chain are loop closures.
    if (e.is_odometry() && !rec.kind_tagged &&
        (out.graph.odometry_out(e.from) || out.graph.odometry_in(e.to))) {
      e.kind = EdgeKind::loop_closure;
    }
    try {
      out.graph.add_edge(e);
    } catch (const GraphError& err) {
      throw ParseError(rec.line, err.what());
    }
  }
  if (fix) {
    if (!out.graph.has_vertex(fix->second)) throw ParseError(fix->first, "FIX references an undeclared vertex");
    out.graph.set_fixed_vertex(fix->second);
  }
  out.skipped_records = skipped;
  return out;
}

namespace {

void write_vertex(std::ostringstream& out, VertexId id, const Pose2& p) {
  out << "VERTEX_SE2 " << id << ' ' << format_double(p.x) << ' ' << format_double(p.y) << ' '
      << format_double(p.theta) << '\n';
}

}  // namespace

std::string serialize_graph(const PoseGraph& g) {
  std::ostringstream out;
  for (const auto& [id, v] : g.vertices()) write_vertex(out, id, v.pose);
  // Parsing makes the smallest id the gauge; anything else needs a FIX record.
  if (!g.empty() && (g.fixed_vertex() || g.gauge() != g.vertices().begin()->first)) {
    out << "FIX " << g.gauge() << '\n';
  }

  std::vector<const Edge*> edges;
  for (const auto& [_, e] : g.edges()) edges.push_back(&e);
  std::sort(edges.begin(), edges.end(), [](const Edge* a, const Edge* b) {
    return std::tie(a->from, a->to, a->id) < std::tie(b->from, b->to, b->id);
  });
  for (const Edge* e : edges) {
    const bool inferred_odometry = e->to == e->from + 1;
    if (e->is_loop()) out << "# KIND:LOOP\n";
    else if (!inferred_odometry) out << "# KIND:ODOM\n";
    if (e->is_corrupted()) out << "# PROV:CORRUPTED\n";
    const auto& m = e->measurement;
    const auto& i = e->info;
    out << "EDGE_SE2 " << e->from << ' ' << e->to << ' ' << format_double(m.x) << ' ' << format_double(m.y) << ' '
        << format_double(m.theta);
    for (const auto& [r, c] : {std::pair{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}) {
      out << ' ' << format_double(i(r, c));
    }
    out << '\n';
  }
  return out.str();
}

std::map<VertexId, Pose2> parse_poses(std::string_view text) {
  std::map<VertexId, Pose2> poses;
  Lines lines{text};
  std::string_view raw;
  while (lines.next(raw)) {
    const std::string_view content = trim(raw);
    if (content.empty() || content.front() == '#') continue;
    const auto tok = split(content);
    if (tok[0] != "VERTEX_SE2") throw ParseError(lines.number, "expected a VERTEX_SE2 record");
    const VertexRecord v = parse_vertex(tok, lines.number);
    if (!poses.emplace(v.id, v.pose).second) {
      throw ParseError(lines.number, "duplicate vertex " + std::to_string(v.id));
    }
  }
  return poses;
}

std::string serialize_poses(const std::map<VertexId, Pose2>& poses) {
  std::ostringstream out;
  for (const auto& [id, p] : poses) write_vertex(out, id, p);
  return out.str();
}

std::map<VertexId, Pose2> poses_of(const PoseGraph& g) {
  std::map<VertexId, Pose2> out;
  for (const auto& [id, v] : g.vertices()) out.emplace(id, v.pose);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace pgp
