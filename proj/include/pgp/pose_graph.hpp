#ifndef PGP_POSE_GRAPH_HPP
#define PGP_POSE_GRAPH_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pgp/pose2.hpp"

namespace pgp {

using VertexId = std::int64_t;
using EdgeId = std::int64_t;

/// Inverse covariance of an edge measurement. Diagonal units are m^-2, m^-2, rad^-2.
using InformationMatrix = Eigen::Matrix3d;

enum class EdgeKind { odometry, loop_closure };
/// Synthetic bookkeeping: does this edge descend from a corrupted measurement?
enum class Provenance { genuine, corrupted };

std::string_view to_string(EdgeKind kind);
std::string_view to_string(Provenance provenance);

bool is_symmetric(const InformationMatrix& info, double rel_tol = 1e-12);
bool is_positive_definite(const InformationMatrix& info);

struct Vertex {
  VertexId id = 0;
  Pose2 pose;
  std::uint64_t seq = 0;
  bool prunable = true;
};

struct Edge {
  EdgeId id = -1;  // assigned by the owning graph
  VertexId from = 0;
  VertexId to = 0;
  /// Pose of `to` expressed in the frame of `from`.
  Pose2 measurement;
  InformationMatrix info = InformationMatrix::Identity();
  EdgeKind kind = EdgeKind::loop_closure;
  Provenance provenance = Provenance::genuine;

  bool is_odometry() const { return kind == EdgeKind::odometry; }
  bool is_loop() const { return kind == EdgeKind::loop_closure; }
  bool is_corrupted() const { return provenance == Provenance::corrupted; }
  bool touches(VertexId v) const { return from == v || to == v; }
  VertexId other(VertexId v) const { return from == v ? to : from; }
};

/// Vertices, relative-pose edges and the odometry chains threading through them.
///
/// Each vertex has at most one incoming and one outgoing odometry edge, and the
/// odometry edges form simple paths (one per session). Vertex and edge maps are
/// ordered by id so every traversal is deterministic.
class PoseGraph {
 public:
  const Vertex& add_vertex(VertexId id, const Pose2& pose, bool prunable = true);
  /// Adds a copy of `edge` and returns its new id. The edge's own id is ignored.
  EdgeId add_edge(Edge edge);

  void remove_edge(EdgeId id);
  /// Removes the vertex and every edge touching it.
  void remove_vertex(VertexId id);

  bool has_vertex(VertexId id) const { return vertices_.contains(id); }
  bool has_edge(EdgeId id) const { return edges_.contains(id); }
  const Vertex& vertex(VertexId id) const;
  const Edge& edge(EdgeId id) const;
  void set_pose(VertexId id, const Pose2& pose);
  void set_prunable(VertexId id, bool prunable);
  void set_edge_provenance(EdgeId id, Provenance provenance);
  void set_edge_measurement(EdgeId id, const Pose2& measurement, const InformationMatrix& info);

  const std::map<VertexId, Vertex>& vertices() const { return vertices_; }
  const std::map<EdgeId, Edge>& edges() const { return edges_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return vertices_.empty(); }

  const std::set<EdgeId>& incident_edges(VertexId v) const;
  std::size_t degree(VertexId v) const { return incident_edges(v).size(); }
  std::vector<EdgeId> edges_between(VertexId a, VertexId b) const;
  std::vector<VertexId> neighbors(VertexId v) const;

  std::optional<EdgeId> odometry_in(VertexId v) const;
  std::optional<EdgeId> odometry_out(VertexId v) const;
  /// First or last vertex of an odometry chain (also true for a vertex with no odometry).
  bool is_session_boundary(VertexId v) const;

  /// Explicitly fixed vertex, if any.
  std::optional<VertexId> fixed_vertex() const { return gauge_; }
  void set_fixed_vertex(std::optional<VertexId> id);
  /// Vertex anchoring the gauge freedom: the fixed vertex, else the oldest one.
  VertexId gauge() const;

  /// Vertex ids ordered by insertion sequence.
  std::vector<VertexId> ids_by_seq() const;
  std::vector<VertexId> vertex_ids() const;

  bool is_connected() const;
  std::size_t count_edges(EdgeKind kind) const;
  std::size_t count_corrupted(EdgeKind kind) const;

  /// Throws GraphError if a structural invariant is violated.
  void check_invariants(bool require_connected = true) const;

 private:
  std::map<VertexId, Vertex> vertices_;
  std::map<EdgeId, Edge> edges_;
  std::map<VertexId, std::set<EdgeId>> incident_;
  std::map<VertexId, EdgeId> odo_in_;
  std::map<VertexId, EdgeId> odo_out_;
  std::optional<VertexId> gauge_;
  std::uint64_t next_seq_ = 0;
  EdgeId next_edge_id_ = 0;
};

/// Relative pose between the current estimates of two vertices.
Pose2 relative_pose(const PoseGraph& g, VertexId from, VertexId to);
/// Euclidean distance between the current estimates of two vertices.
double vertex_distance(const PoseGraph& g, VertexId a, VertexId b);

}  // namespace pgp

#endif  // PGP_POSE_GRAPH_HPP
