#include <algorithm>
#include <stdexcept>
#include <string>

#include "pgp/errors.hpp"
#include "pgp/pruning.hpp"

namespace pgp {

void PruningConfig::validate() const {
  if (!(s_hat > 0.0)) throw std::invalid_argument("s_hat must be positive");
  if (!(d_hat > 1.0)) throw std::invalid_argument("d_hat must be greater than 1");
  if (N_hat < 1 || n_hat < 1 || m_hat < 1 || e_hat < 1) {
    throw std::invalid_argument("N_hat, n_hat, m_hat and e_hat must be at least 1");
  }
  if (!(mahalanobis_gate > 0.0)) throw std::invalid_argument("mahalanobis gate must be positive");
}

PruningConfig p_aggressive() { return {5.0, 10, 50, 50, 5, 5.0, kDefaultMahalanobisGate}; }

PruningConfig p_cautious() { return {15.0, 10, 50, 50, 5, 5.0, kDefaultMahalanobisGate}; }

std::string_view to_string(MarginalizationMethod method) {
  return method == MarginalizationMethod::sid ? "sid" : "chow_liu";
}

MarginalizationMethod parse_marginalization_method(std::string_view name) {
  if (name == "sid") return MarginalizationMethod::sid;
  if (name == "chow_liu") return MarginalizationMethod::chow_liu;
  throw std::invalid_argument("unknown marginalization method '" + std::string(name) + "'");
}

std::vector<VertexId> prunable_vertices(const PoseGraph& g, const PruningConfig& cfg) {
  const auto by_seq = g.ids_by_seq();
  const std::size_t keep_recent = std::min(cfg.m_hat, by_seq.size());
  const VertexId gauge = g.empty() ? 0 : g.gauge();
  std::vector<VertexId> out;
  for (std::size_t i = 0; i + keep_recent < by_seq.size(); ++i) {
    const VertexId v = by_seq[i];
    if (v == gauge || !g.vertex(v).prunable || g.is_session_boundary(v)) continue;
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

PointSet vertex_points(const PoseGraph& g) {
  std::map<PointId, Eigen::Vector2d> points;
  for (const auto& [id, v] : g.vertices()) points.emplace(id, v.pose.translation());
  return PointSet(points);
}

namespace {

void check_input(const PoseGraph& g, const PruningConfig& cfg) {
  cfg.validate();
  if (!g.is_connected()) throw GraphError("vertex pruning requires a connected graph");
}

void marginalize(PoseGraph& g, VertexId v, double density, const PruningConfig& cfg,
                 MarginalizationMethod method, PruneLog& log) {
  MarginalizeRecord rec{method, v, density, cfg.mahalanobis_gate, g.vertex_count(), 0, g.edge_count(), 0};
  std::vector<VerdictRecord> verdicts;
  if (method == MarginalizationMethod::sid) {
    verdicts = marginalize_sid(g, v, cfg.mahalanobis_gate).verdicts;
  } else {
    marginalize_chow_liu(g, v);
  }
  rec.vertices_after = g.vertex_count();
  rec.edges_after = g.edge_count();
  log.records.emplace_back(rec);
  for (const auto& verdict : verdicts) log.records.emplace_back(verdict);
}

}  // namespace

PruneResult prune_vertices(PoseGraph g, const PruningConfig& cfg, MarginalizationMethod method,
                           const MarginalizationObserver& observer) {
  check_input(g, cfg);
  PruneLog log;
  DensityCache densities(vertex_points(g), cfg.N_hat);
  for (;;) {
    const auto candidates = prunable_vertices(g, cfg);
    if (candidates.size() <= cfg.n_hat) break;
    VertexId best = candidates.front();
    double best_density = densities.density(best);
    for (VertexId v : candidates) {
      const double d = densities.density(v);
      if (d > best_density) {
        best = v;
        best_density = d;
      }
    }
    if (!(best_density > cfg.s_hat)) break;
    if (observer) observer(g, best);
    marginalize(g, best, best_density, cfg, method, log);
    densities.erase(best);
  }
  return {std::move(g), std::move(log)};
}

PruneResult prune_vertices_by(PoseGraph g, const PruningConfig& cfg, MarginalizationMethod method,
                              const VertexScore& score) {
  check_input(g, cfg);
  PruneLog log;
  PointSet points = vertex_points(g);
  for (;;) {
    const auto candidates = prunable_vertices(g, cfg);
    if (candidates.size() <= cfg.n_hat) break;
    VertexId best = candidates.front();
    double best_density = score(points, best);
    for (VertexId v : candidates) {
      const double d = score(points, v);
      if (d > best_density) {
        best = v;
        best_density = d;
      }
    }
    if (!(best_density > cfg.s_hat)) break;
    marginalize(g, best, best_density, cfg, method, log);
    points.erase(best);
  }
  return {std::move(g), std::move(log)};
}

}  // namespace pgp
