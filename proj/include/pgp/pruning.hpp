#ifndef PGP_PRUNING_HPP
#define PGP_PRUNING_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pgp/density.hpp"
#include "pgp/edge_ops.hpp"
#include "pgp/pose_graph.hpp"

namespace pgp {

/// Thresholds for vertex and edge pruning.
struct PruningConfig {
  double s_hat = 5.0;             ///< scale-invariant density threshold (1/m)
  std::size_t N_hat = 10;         ///< neighbours kept in the truncated density
  std::size_t n_hat = 50;         ///< stop once this few prunable vertices remain
  std::size_t m_hat = 50;         ///< most recent vertices never pruned
  std::size_t e_hat = 5;          ///< max edges per vertex
  double d_hat = 5.0;             ///< max shortest-path detour ratio for edge removal
  double mahalanobis_gate = kDefaultMahalanobisGate;

  /// Throws std::invalid_argument when a threshold is out of range.
  void validate() const;
  friend bool operator==(const PruningConfig&, const PruningConfig&) = default;
};

PruningConfig p_aggressive();
PruningConfig p_cautious();

enum class MarginalizationMethod { sid, chow_liu };
std::string_view to_string(MarginalizationMethod method);
MarginalizationMethod parse_marginalization_method(std::string_view name);

// ---------------------------------------------------------------------------
// Prune log

struct MarginalizeRecord {
  MarginalizationMethod method = MarginalizationMethod::sid;
  VertexId vertex = 0;
  double density = 0.0;
  double gate = kDefaultMahalanobisGate;
  std::size_t vertices_before = 0, vertices_after = 0;
  std::size_t edges_before = 0, edges_after = 0;
  friend bool operator==(const MarginalizeRecord&, const MarginalizeRecord&) = default;
};

struct VerdictRecord {
  VertexId vertex = 0;  ///< vertex being marginalized when the verdict happened
  VertexId a = 0, b = 0;
  CombineVerdict verdict = CombineVerdict::fused;
  double gap = 0.0;
  friend bool operator==(const VerdictRecord&, const VerdictRecord&) = default;
};

struct EdgeRemovalRecord {
  VertexId from = 0, to = 0;
  double trace = 0.0;
  double ratio = 0.0;  ///< detour ratio at removal time
  std::size_t edges_before = 0, edges_after = 0;
  friend bool operator==(const EdgeRemovalRecord&, const EdgeRemovalRecord&) = default;
};

struct ExemptRecord {
  VertexId vertex = 0;
  friend bool operator==(const ExemptRecord&, const ExemptRecord&) = default;
};

struct PruneLog {
  using Record = std::variant<MarginalizeRecord, VerdictRecord, EdgeRemovalRecord, ExemptRecord>;
  std::vector<Record> records;

  void append(const PruneLog& other);
  std::size_t marginalizations() const;
  std::size_t edge_removals() const;
  friend bool operator==(const PruneLog&, const PruneLog&) = default;
};

/// One action per line; see parse_prune_log for the grammar.
std::string serialize_prune_log(const PruneLog& log);
PruneLog parse_prune_log(std::string_view text);
/// Re-applies the marginalizations and edge removals of `log` to `g`.
PoseGraph replay_prune_log(PoseGraph g, const PruneLog& log);

// ---------------------------------------------------------------------------
// Marginalization

struct MarginalizeOutcome {
  std::vector<VerdictRecord> verdicts;
};

/// Removes `v`, moving each of its loop closures one step along the odometry
/// chain (towards whichever chain neighbour is closer to the loop's other end)
/// and bridging the chain with the composition of its two odometry edges.
MarginalizeOutcome marginalize_sid(PoseGraph& g, VertexId v, double gate = kDefaultMahalanobisGate);

struct ChowLiuCandidate {
  Edge edge;
  double weight = 0.0;
  bool retained = false;
};

/// Pairwise constraints among the neighbours of `v`, composed through `v`.
/// Parallel edges between `v` and one neighbour are fused first.
std::vector<ChowLiuCandidate> chow_liu_candidates(const PoseGraph& g, VertexId v);

/// Removes `v`, replacing its edges by the maximum-weight spanning tree of the
/// pairwise clique (weight 0.5*log det(I + info)). The chain-bridging edge is
/// always kept as odometry. Retained edges are fused into existing edges
/// without a consistency check.
std::vector<ChowLiuCandidate> marginalize_chow_liu(PoseGraph& g, VertexId v);

/// Candidates for pruning, by id: every vertex except the m_hat most recent,
/// chain ends, the gauge and vertices flagged non-prunable.
std::vector<VertexId> prunable_vertices(const PoseGraph& g, const PruningConfig& cfg);

struct PruneResult {
  PoseGraph graph;
  PruneLog log;
};

/// Repeatedly marginalizes the prunable vertex of highest truncated
/// scale-invariant density while that density exceeds s_hat and more than
/// n_hat prunable vertices remain.
/// Called with the graph just before each marginalization of the chosen vertex.
using MarginalizationObserver = std::function<void(const PoseGraph&, VertexId)>;

PruneResult prune_vertices(PoseGraph g, const PruningConfig& cfg,
                           MarginalizationMethod method = MarginalizationMethod::sid,
                           const MarginalizationObserver& observer = {});

/// Vertex scoring hook for alternative density measures. The score is
/// recomputed from scratch for every prunable vertex on each iteration.
using VertexScore = std::function<double(const PointSet&, VertexId)>;
PruneResult prune_vertices_by(PoseGraph g, const PruningConfig& cfg, MarginalizationMethod method,
                              const VertexScore& score);

PointSet vertex_points(const PoseGraph& g);

// ---------------------------------------------------------------------------
// Edge pruning

/// Shortest-path length from i to j with Euclidean edge lengths, ignoring the
/// edge `excluded`. Infinity when j is unreachable.
double astar_len(const PoseGraph& g, VertexId i, VertexId j, std::optional<EdgeId> excluded = std::nullopt);

/// astar_len around `e` divided by the straight-line length of `e`.
double detour_ratio(const PoseGraph& g, EdgeId e);

/// Removes low-information loop closures from over-connected vertices as long
/// as the detour ratio guard holds.
PruneResult prune_edges(PoseGraph g, const PruningConfig& cfg);

}  // namespace pgp

#endif  // PGP_PRUNING_HPP
