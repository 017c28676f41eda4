#ifndef PGP_IO_HPP
#define PGP_IO_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pgp/pose_graph.hpp"

namespace pgp {

// Plain-text graph format:
//
//   VERTEX_SE2 id x y theta
//   EDGE_SE2 i j dx dy dtheta i11 i12 i13 i22 i23 i33
//   FIX id
//
// A comment line `# KIND:LOOP` or `# KIND:ODOM` sets the kind of the next
// edge; without it an edge i -> i+1 is odometry and anything else a loop
// closure. `# PROV:CORRUPTED` marks the next edge as corrupted.

struct ParsedGraph {
  PoseGraph graph;
  std::size_t skipped_records = 0;  ///< unknown record types
};

/// Throws ParseError (with the line number) on malformed input.
ParsedGraph parse_graph(std::string_view text);
std::string serialize_graph(const PoseGraph& g);

/// Vertex records only; used for ground-truth sidecar files.
std::map<VertexId, Pose2> parse_poses(std::string_view text);
std::string serialize_poses(const std::map<VertexId, Pose2>& poses);
std::map<VertexId, Pose2> poses_of(const PoseGraph& g);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// ---------------------------------------------------------------------------
// Run reports

struct MetricSummary {
  double trans_mean = 0.0, trans_sd = 0.0;  ///< meters
  double rot_mean = 0.0, rot_sd = 0.0;      ///< degrees
  friend bool operator==(const MetricSummary&, const MetricSummary&) = default;
};

struct RunRecord {
  std::string config;
  std::uint64_t seed = 0;
  double corruption_fraction = 0.0;
  std::string method;
  MetricSummary te, me, rme;
  std::size_t vertices_before = 0, vertices_after = 0;
  std::size_t edges_before = 0, edges_after = 0;
  double prune_seconds = 0.0, optimize_seconds = 0.0;
};

struct RunReport {
  std::vector<RunRecord> runs;
};

enum class ReportFormat { csv, json_lines };
ReportFormat parse_report_format(std::string_view name);

/// Column order of the csv export (and key order of the json-lines export).
const std::vector<std::string>& report_columns();
std::string export_report(const RunReport& report, ReportFormat format);
/// Reads back the csv export.
RunReport parse_report_csv(std::string_view text);

/// "%.17g", with inf/-inf/nan spelled out.
std::string format_double(double v);

}  // namespace pgp

#endif  // PGP_IO_HPP
