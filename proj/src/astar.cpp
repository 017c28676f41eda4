#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "pgp/errors.hpp"
#include "pgp/pruning.hpp"

namespace pgp {

double astar_len(const PoseGraph& g, VertexId i, VertexId j, std::optional<EdgeId> excluded) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (!g.has_vertex(i) || !g.has_vertex(j)) throw GraphError("shortest path between unknown vertices");
  if (i == j) return 0.0;
  const Pose2& goal = g.vertex(j).pose;
  auto heuristic = [&](VertexId v) { return distance(g.vertex(v).pose, goal); };

  struct Item {
    double f;
    double cost;
    VertexId v;
    bool operator>(const Item& o) const { return f > o.f || (f == o.f && v > o.v); }
  };
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  std::unordered_map<VertexId, double> best{{i, 0.0}};
  std::unordered_set<VertexId> closed;
  open.push({heuristic(i), 0.0, i});

  while (!open.empty()) {
    const Item cur = open.top();
    open.pop();
    if (cur.v == j) return cur.cost;
    if (!closed.insert(cur.v).second) continue;
    const Pose2& here = g.vertex(cur.v).pose;
    for (EdgeId id : g.incident_edges(cur.v)) {
      if (excluded && id == *excluded) continue;
      const VertexId w = g.edge(id).other(cur.v);
      if (closed.contains(w)) continue;
      const double cost = cur.cost + distance(here, g.vertex(w).pose);
      auto it = best.find(w);
      if (it != best.end() && it->second <= cost) continue;
      best[w] = cost;
      open.push({cost + heuristic(w), cost, w});
    }
  }
  return kInf;
}

double detour_ratio(const PoseGraph& g, EdgeId id) {
  const Edge& e = g.edge(id);
  const double direct = vertex_distance(g, e.from, e.to);
  const double detour = astar_len(g, e.from, e.to, id);
  if (direct <= 1e-12) return detour <= 1e-12 ? 1.0 : std::numeric_limits<double>::infinity();
  return detour / direct;
}

}  // namespace pgp
