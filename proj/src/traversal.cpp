#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "pgp/eval.hpp"

namespace pgp {

TraversalResult simulate_repeated_traversal(const TraversalSpec& spec) {
  spec.grid.validate();
  if (spec.passes < 1) throw std::invalid_argument("traversal needs at least one pass");
  if (spec.rows_per_round < 1) throw std::invalid_argument("rows per pruning round must be at least 1");
  if (!(spec.jitter >= 0.0 && spec.jitter < 0.5)) throw std::invalid_argument("jitter must lie in [0, 0.5)");
  if (spec.pruning) spec.pruning->validate();

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(-spec.jitter * spec.grid.spacing, spec.jitter * spec.grid.spacing);
  std::uniform_real_distribution<double> heading_jitter(-0.1, 0.1);
  const double radius = spec.grid.loop_radius_factor * spec.grid.spacing;

  TraversalResult out;
  PoseGraph& g = out.graph;
  PointSet index;
  VertexId next_id = 0;
  std::optional<VertexId> previous;

  auto add_measured = [&g](VertexId from, VertexId to, EdgeKind kind, const InformationMatrix& info) {
    Edge e;
    e.from = from;
    e.to = to;
    e.measurement = between(g.vertex(from).pose, g.vertex(to).pose);
    e.info = info;
    e.kind = kind;
    g.add_edge(e);
  };

  auto prune = [&] {
    if (!spec.pruning) return;
    PruneResult vertices = prune_vertices(std::move(g), *spec.pruning);
    PruneResult edges = prune_edges(std::move(vertices.graph), *spec.pruning);
    g = std::move(edges.graph);
    for (PointId id : index.ids()) {
      if (!g.has_vertex(id)) index.erase(id);
    }
  };

  for (std::size_t pass = 0; pass < spec.passes; ++pass) {
    for (std::size_t row = 0; row < spec.grid.rows; ++row) {
      const bool forward = row % 2 == 0;
      for (std::size_t k = 0; k < spec.grid.cols; ++k) {
        const std::size_t col = forward ? k : spec.grid.cols - 1 - k;
        const double x = static_cast<double>(col) * spec.grid.spacing + jitter(rng);
        const double y = static_cast<double>(row) * spec.grid.spacing + jitter(rng);
        const double theta = (forward ? 0.0 : std::numbers::pi) + heading_jitter(rng);
        const VertexId id = next_id++;
        g.add_vertex(id, Pose2(x, y, theta));
        if (!previous) g.set_fixed_vertex(id);

        if (previous) add_measured(*previous, id, EdgeKind::odometry, spec.grid.odometry_info);
        std::size_t loops = 0;
        for (const Neighbor& n : index.knn(Eigen::Vector2d(x, y), spec.max_loops_per_vertex + 1)) {
          if (loops == spec.max_loops_per_vertex || !(n.distance < radius)) break;
          if (previous && n.id == *previous) continue;
          add_measured(n.id, id, EdgeKind::loop_closure, spec.grid.loop_info);
          ++loops;
        }
        index.insert(id, Eigen::Vector2d(x, y));
        previous = id;
      }
      if ((row + 1) % spec.rows_per_round == 0 || row + 1 == spec.grid.rows) prune();
    }
    out.vertices_after_pass.push_back(g.vertex_count());
    out.edges_after_pass.push_back(g.edge_count());
  }
  return out;
}

}  // namespace pgp
