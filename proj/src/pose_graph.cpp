#include "pgp/pose_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include <Eigen/Cholesky>

#include "pgp/errors.hpp"

namespace pgp {

std::string_view to_string(EdgeKind kind) {
  return kind == EdgeKind::odometry ? "odometry" : "loop_closure";
}

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::genuine ? "genuine" : "corrupted";
}

bool is_symmetric(const InformationMatrix& info, double rel_tol) {
  const double scale = std::max(info.cwiseAbs().maxCoeff(), 1e-300);
  return (info - info.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_positive_definite(const InformationMatrix& info) {
  if (!info.allFinite()) return false;
  Eigen::LLT<InformationMatrix> llt(info);
  if (llt.info() != Eigen::Success) return false;
  return (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all();
}

namespace {
const std::set<EdgeId> kNoEdges;
}

const Vertex& PoseGraph::add_vertex(VertexId id, const Pose2& pose, bool prunable) {
  if (vertices_.contains(id)) throw GraphError("duplicate vertex id " + std::to_string(id));
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.theta)) {
    throw GraphError("non-finite pose for vertex " + std::to_string(id));
  }
  auto [it, _] = vertices_.emplace(id, Vertex{id, pose, next_seq_++, prunable});
  incident_[id];
  return it->second;
}

EdgeId PoseGraph::add_edge(Edge edge) {
  if (edge.from == edge.to) throw GraphError("self edge on vertex " + std::to_string(edge.from));
  if (!has_vertex(edge.from) || !has_vertex(edge.to)) {
    throw GraphError("edge " + std::to_string(edge.from) + "->" + std::to_string(edge.to) +
                     " references an unknown vertex");
  }
  if (!is_symmetric(edge.info, 1e-9) || !is_positive_definite(edge.info)) {
    throw GraphError("edge " + std::to_string(edge.from) + "->" + std::to_string(edge.to) +
                     " has an information matrix that is not symmetric positive definite");
  }
  if (edge.is_odometry()) {
    if (odo_out_.contains(edge.from) || odo_in_.contains(edge.to)) {
      throw GraphError("odometry edge " + std::to_string(edge.from) + "->" + std::to_string(edge.to) +
                       " would branch the odometry chain");
    }
    // Walking forward from `to` must not come back to `from`.
    for (VertexId v = edge.to;;) {
      if (v == edge.from) {
        throw GraphError("odometry edge " + std::to_string(edge.from) + "->" +
                         std::to_string(edge.to) + " would close an odometry cycle");
      }
      auto it = odo_out_.find(v);
      if (it == odo_out_.end()) break;
      v = edges_.at(it->second).to;
    }
  }
  edge.info = 0.5 * (edge.info + edge.info.transpose());
  edge.id = next_edge_id_++;
  incident_[edge.from].insert(edge.id);
  incident_[edge.to].insert(edge.id);
  if (edge.is_odometry()) {
    odo_out_[edge.from] = edge.id;
    odo_in_[edge.to] = edge.id;
  }
  const EdgeId id = edge.id;
  edges_.emplace(id, std::move(edge));
  return id;
}

void PoseGraph::remove_edge(EdgeId id) {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw GraphError("unknown edge id " + std::to_string(id));
  const Edge& e = it->second;
  incident_[e.from].erase(id);
  incident_[e.to].erase(id);
  if (e.is_odometry()) {
    odo_out_.erase(e.from);
    odo_in_.erase(e.to);
  }
  edges_.erase(it);
}

void PoseGraph::remove_vertex(VertexId id) {
  if (!has_vertex(id)) throw GraphError("unknown vertex id " + std::to_string(id));
  const std::set<EdgeId> incident = incident_[id];
  for (EdgeId e : incident) remove_edge(e);
  incident_.erase(id);
  vertices_.erase(id);
  if (gauge_ == id) gauge_.reset();
}

const Vertex& PoseGraph::vertex(VertexId id) const {
  auto it = vertices_.find(id);
  if (it == vertices_.end()) throw GraphError("unknown vertex id " + std::to_string(id));
  return it->second;
}

const Edge& PoseGraph::edge(EdgeId id) const {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw GraphError("unknown edge id " + std::to_string(id));
  return it->second;
}

void PoseGraph::set_pose(VertexId id, const Pose2& pose) {
  auto it = vertices_.find(id);
  if (it == vertices_.end()) throw GraphError("unknown vertex id " + std::to_string(id));
  it->second.pose = pose;
}

void PoseGraph::set_prunable(VertexId id, bool prunable) {
  auto it = vertices_.find(id);
  if (it == vertices_.end()) throw GraphError("unknown vertex id " + std::to_string(id));
  it->second.prunable = prunable;
}

void PoseGraph::set_edge_provenance(EdgeId id, Provenance provenance) {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw GraphError("unknown edge id " + std::to_string(id));
  it->second.provenance = provenance;
}

void PoseGraph::set_edge_measurement(EdgeId id, const Pose2& measurement,
                                     const InformationMatrix& info) {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw GraphError("unknown edge id " + std::to_string(id));
  if (!is_positive_definite(info)) throw GraphError("information matrix is not positive definite");
  it->second.measurement = measurement;
  it->second.info = 0.5 * (info + info.transpose());
}

const std::set<EdgeId>& PoseGraph::incident_edges(VertexId v) const {
  auto it = incident_.find(v);
  return it == incident_.end() ? kNoEdges : it->second;
}

std::vector<EdgeId> PoseGraph::edges_between(VertexId a, VertexId b) const {
  std::vector<EdgeId> out;
  for (EdgeId e : incident_edges(a)) {
    if (edges_.at(e).other(a) == b) out.push_back(e);
  }
  return out;
}

std::vector<VertexId> PoseGraph::neighbors(VertexId v) const {
  std::set<VertexId> out;
  for (EdgeId e : incident_edges(v)) out.insert(edges_.at(e).other(v));
  return {out.begin(), out.end()};
}

std::optional<EdgeId> PoseGraph::odometry_in(VertexId v) const {
  auto it = odo_in_.find(v);
  if (it == odo_in_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeId> PoseGraph::odometry_out(VertexId v) const {
  auto it = odo_out_.find(v);
  if (it == odo_out_.end()) return std::nullopt;
  return it->second;
}

bool PoseGraph::is_session_boundary(VertexId v) const {
  return !odo_in_.contains(v) || !odo_out_.contains(v);
}

void PoseGraph::set_fixed_vertex(std::optional<VertexId> id) {
  if (id && !has_vertex(*id)) throw GraphError("unknown gauge vertex " + std::to_string(*id));
  gauge_ = id;
}

VertexId PoseGraph::gauge() const {
  if (gauge_) return *gauge_;
  if (vertices_.empty()) throw GraphError("empty graph has no gauge vertex");
  const auto it = std::min_element(vertices_.begin(), vertices_.end(), [](const auto& a, const auto& b) {
    return a.second.seq < b.second.seq;
  });
  return it->first;
}

std::vector<VertexId> PoseGraph::ids_by_seq() const {
  std::vector<VertexId> ids = vertex_ids();
  std::sort(ids.begin(), ids.end(),
            [this](VertexId a, VertexId b) { return vertices_.at(a).seq < vertices_.at(b).seq; });
  return ids;
}

std::vector<VertexId> PoseGraph::vertex_ids() const {
  std::vector<VertexId> ids;
  ids.reserve(vertices_.size());
  for (const auto& [id, _] : vertices_) ids.push_back(id);
  return ids;
}

bool PoseGraph::is_connected() const {
  if (vertices_.size() < 2) return true;
  std::set<VertexId> seen{vertices_.begin()->first};
  std::deque<VertexId> queue{vertices_.begin()->first};
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    for (EdgeId e : incident_edges(v)) {
      const VertexId w = edges_.at(e).other(v);
      if (seen.insert(w).second) queue.push_back(w);
    }
  }
  return seen.size() == vertices_.size();
}

std::size_t PoseGraph::count_edges(EdgeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [kind](const auto& p) { return p.second.kind == kind; }));
}

std::size_t PoseGraph::count_corrupted(EdgeKind kind) const {
  return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [kind](const auto& p) {
    return p.second.kind == kind && p.second.is_corrupted();
  }));
}

void PoseGraph::check_invariants(bool require_connected) const {
  std::set<std::pair<VertexId, VertexId>> odometry_pairs;
  for (const auto& [id, e] : edges_) {
    if (e.from == e.to || !has_vertex(e.from) || !has_vertex(e.to)) {
      throw GraphError("edge " + std::to_string(id) + " has invalid endpoints");
    }
    if (!is_positive_definite(e.info)) {
      throw GraphError("edge " + std::to_string(id) + " has a non positive definite information matrix");
    }
    if (e.is_odometry() && !odometry_pairs.emplace(e.from, e.to).second) {
      throw GraphError("duplicate odometry edge " + std::to_string(e.from) + "->" + std::to_string(e.to));
    }
  }
  // Every odometry chain is a simple path: follow each head forward.
  std::size_t visited = 0;
  for (const auto& [id, _] : vertices_) {
    if (odo_in_.contains(id)) continue;
    for (VertexId v = id;;) {
      ++visited;
      auto it = odo_out_.find(v);
      if (it == odo_out_.end()) break;
      v = edges_.at(it->second).to;
    }
  }
  if (visited != vertices_.size()) throw GraphError("odometry edges contain a cycle");
  if (require_connected && !is_connected()) throw GraphError("graph is disconnected");
}

Pose2 relative_pose(const PoseGraph& g, VertexId from, VertexId to) {
  return between(g.vertex(from).pose, g.vertex(to).pose);
}

double vertex_distance(const PoseGraph& g, VertexId a, VertexId b) {
  return distance(g.vertex(a).pose, g.vertex(b).pose);
}

}  // namespace pgp
