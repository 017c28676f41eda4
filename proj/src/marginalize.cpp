#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include <Eigen/LU>

#include "pgp/errors.hpp"
#include "pgp/pruning.hpp"

namespace pgp {

namespace {

constexpr double kNoGate = std::numeric_limits<double>::infinity();

// Adds `e` to the graph, fusing it with an edge already joining the same pair.
// Fusion results are oriented like the odometry participant so the chain keeps
// pointing forward.
void insert_merged(PoseGraph& g, const Edge& e, double gate, VertexId marginalized,
                   std::vector<VerdictRecord>& verdicts) {
  const auto existing = g.edges_between(e.from, e.to);
  if (existing.empty()) {
    g.add_edge(e);
    return;
  }
  const EdgeId old_id = existing.front();
  const Edge old = g.edge(old_id);
  const CombineResult r = e.is_odometry() ? edge_combine(e, old, gate) : edge_combine(old, e, gate);
  if (r.verdict != CombineVerdict::fused) {
    verdicts.push_back({marginalized, e.from, e.to, r.verdict, r.gap});
  }
  g.remove_edge(old_id);
  if (r.edge) g.add_edge(*r.edge);
}

double mutual_information_proxy(const InformationMatrix& info) {
  return 0.5 * std::log((InformationMatrix::Identity() + info).determinant());
}

struct DisjointSets {
  std::map<VertexId, VertexId> parent;
  VertexId find(VertexId v) {
    auto it = parent.find(v);
    if (it == parent.end()) return parent[v] = v;
    if (it->second == v) return v;
    return it->second = find(it->second);
  }
  bool unite(VertexId a, VertexId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

MarginalizeOutcome marginalize_sid(PoseGraph& g, VertexId v, double gate) {
  if (!g.has_vertex(v)) throw GraphError("cannot marginalize unknown vertex " + std::to_string(v));
  const auto in_id = g.odometry_in(v);
  const auto out_id = g.odometry_out(v);
  if (!in_id && !out_id) {
    throw GraphError("vertex " + std::to_string(v) + " is not on an odometry chain");
  }
  const std::optional<Edge> e_in = in_id ? std::optional(g.edge(*in_id)) : std::nullopt;
  const std::optional<Edge> e_out = out_id ? std::optional(g.edge(*out_id)) : std::nullopt;

  // Loop closures oriented as v -> other.
  std::vector<Edge> loops;
  for (EdgeId id : g.incident_edges(v)) {
    const Edge& e = g.edge(id);
    if (e.is_loop()) loops.push_back(orient(e, v, e.other(v)));
  }

  g.remove_vertex(v);
  MarginalizeOutcome outcome;
  if (e_in && e_out) insert_merged(g, edge_compose(*e_in, *e_out), gate, v, outcome.verdicts);

  for (const Edge& loop : loops) {
    const VertexId other = loop.to;
    bool backward = !e_out.has_value();
    if (e_in && e_out) {
      backward = vertex_distance(g, e_in->from, other) < vertex_distance(g, e_out->to, other);
    }
    if (backward) {
      if (other == e_in->from) continue;
      insert_merged(g, edge_compose(*e_in, loop), gate, v, outcome.verdicts);
    } else {
      if (other == e_out->to) continue;
      insert_merged(g, edge_compose(edge_invert(loop), *e_out), gate, v, outcome.verdicts);
    }
  }
  return outcome;
}

std::vector<ChowLiuCandidate> chow_liu_candidates(const PoseGraph& g, VertexId v) {
  if (!g.has_vertex(v)) throw GraphError("cannot marginalize unknown vertex " + std::to_string(v));

  // One edge v -> u per neighbour u.
  std::map<VertexId, Edge> spokes;
  for (EdgeId id : g.incident_edges(v)) {
    const Edge& e = g.edge(id);
    const Edge oriented = orient(e, v, e.other(v));
    auto [it, fresh] = spokes.emplace(oriented.to, oriented);
    if (!fresh) it->second = *edge_combine(it->second, oriented, kNoGate).edge;
  }

  std::optional<std::pair<VertexId, VertexId>> chain;
  if (const auto in = g.odometry_in(v), out = g.odometry_out(v); in && out) {
    chain.emplace(g.edge(*in).from, g.edge(*out).to);
  }

  std::vector<ChowLiuCandidate> candidates;
  for (auto a = spokes.begin(); a != spokes.end(); ++a) {
    for (auto b = std::next(a); b != spokes.end(); ++b) {
      VertexId first = a->first, second = b->first;
      if (chain && first == chain->second && second == chain->first) std::swap(first, second);
      Edge e = edge_compose(edge_invert(spokes.at(first)), spokes.at(second));
      if (!(chain && first == chain->first && second == chain->second)) e.kind = EdgeKind::loop_closure;
      const double w = mutual_information_proxy(e.info);
      candidates.push_back({std::move(e), w, false});
    }
  }

  // Maximum-weight spanning tree, seeded with the chain bridge.
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto is_chain = [&](const Edge& e) { return chain && e.from == chain->first && e.to == chain->second; };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const bool ci = is_chain(candidates[i].edge), cj = is_chain(candidates[j].edge);
    if (ci != cj) return ci;
    return candidates[i].weight > candidates[j].weight;
  });
  DisjointSets sets;
  for (std::size_t i : order) {
    if (sets.unite(candidates[i].edge.from, candidates[i].edge.to)) candidates[i].retained = true;
  }
  return candidates;
}

std::vector<ChowLiuCandidate> marginalize_chow_liu(PoseGraph& g, VertexId v) {
  auto candidates = chow_liu_candidates(g, v);
  g.remove_vertex(v);
  std::vector<VerdictRecord> unused;
  for (const auto& c : candidates) {
    if (c.retained) insert_merged(g, c.edge, kNoGate, v, unused);
  }
  return candidates;
}

}  // namespace pgp
