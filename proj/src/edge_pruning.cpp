#include <algorithm>
#include <set>

#include "pgp/errors.hpp"
#include "pgp/pruning.hpp"

namespace pgp {

PruneResult prune_edges(PoseGraph g, const PruningConfig& cfg) {
  cfg.validate();
  PruneLog log;
  std::set<VertexId> exempt;
  for (;;) {
    // Most connected vertex still over the cap; all edges count towards it.
    std::optional<VertexId> busiest;
    std::size_t most = cfg.e_hat;
    for (const auto& [v, _] : g.vertices()) {
      if (exempt.contains(v)) continue;
      if (g.degree(v) > most) {
        most = g.degree(v);
        busiest = v;
      }
    }
    if (!busiest) break;

    std::vector<EdgeId> loops;
    for (EdgeId id : g.incident_edges(*busiest)) {
      if (g.edge(id).is_loop()) loops.push_back(id);
    }
    std::stable_sort(loops.begin(), loops.end(),
                     [&](EdgeId a, EdgeId b) { return g.edge(a).info.trace() < g.edge(b).info.trace(); });

    bool removed = false;
    for (EdgeId id : loops) {
      const double ratio = detour_ratio(g, id);
      if (ratio > cfg.d_hat) continue;
      const Edge& e = g.edge(id);
      EdgeRemovalRecord rec{e.from, e.to, e.info.trace(), ratio, g.edge_count(), g.edge_count() - 1};
      g.remove_edge(id);
      log.records.emplace_back(rec);
      removed = true;
      break;
    }
    if (!removed) {
      exempt.insert(*busiest);
      log.records.emplace_back(ExemptRecord{*busiest});
    }
  }
  return {std::move(g), std::move(log)};
}

}  // namespace pgp
