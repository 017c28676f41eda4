#ifndef PGP_EVAL_HPP
#define PGP_EVAL_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pgp/io.hpp"
#include "pgp/optimizer.hpp"
#include "pgp/pruning.hpp"
#include "pgp/synthetic.hpp"

namespace pgp {

// ---------------------------------------------------------------------------
// Metrics

struct MetricResult {
  std::vector<double> trans_errors;    ///< meters, one per associated item
  std::vector<double> rot_errors_deg;  ///< degrees
  MetricSummary summary;
  /// Relative map error only: mean reference distance between the compared vertex pairs.
  std::optional<double> mean_pair_distance;
};

/// Mean and population standard deviation of the per-item errors.
MetricResult summarize(std::vector<double> trans, std::vector<double> rot_deg);

/// Index-associated comparison of two per-step pose streams.
MetricResult trajectory_error(const std::vector<Pose2>& estimates, const std::vector<Pose2>& reference);

/// Absolute errors of the final vertex poses after moving g so that its gauge
/// vertex coincides with the reference pose of the same id.
MetricResult map_error(const PoseGraph& g, const std::map<VertexId, Pose2>& reference);

/// Errors of the relative poses between consecutive (by insertion) vertices.
MetricResult relative_map_error(const PoseGraph& g, const std::map<VertexId, Pose2>& reference);

/// Linear-interpolation quantile; infinite values take part.
double quantile(std::vector<double> values, double q);

// ---------------------------------------------------------------------------
// Monte Carlo harness

enum class EvalMethod { none, sid, chow_liu };
std::string_view to_string(EvalMethod method);
EvalMethod parse_eval_method(std::string_view name);

/// Huber threshold used by the Monte Carlo harness, in Mahalanobis units:
/// the square root of the 95% chi-square quantile with 3 degrees of freedom.
inline constexpr double kMonteCarloHuberDelta = 2.7954834829151074;

struct MonteCarloSpec {
  GridSpec grid{30, 30, 0.3};
  Sigma3 odometry_sigma = kDefaultOdometrySigma;
  Sigma3 loop_sigma = kDefaultLoopSigma;
  std::vector<double> fractions{0.0, 0.05, 0.10, 0.15, 0.20};
  std::size_t runs = 50;
  std::vector<EvalMethod> methods{EvalMethod::none, EvalMethod::sid, EvalMethod::chow_liu};
  PruningConfig pruning;
  OptimizerConfig optimizer{.kernel = RobustKernel::huber(kMonteCarloHuberDelta), .gauge = std::nullopt};
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::string config_name = "montecarlo";
  /// Wall-clock times in the run report; off keeps reruns byte-identical.
  bool record_timings = false;

  void validate() const;
};

struct MonteCarloCell {
  EvalMethod method = EvalMethod::none;
  double fraction = 0.0;
  std::vector<double> errors;  ///< mean vertex position error of each run, in run order
  double q25 = 0.0, median = 0.0, q75 = 0.0;
};

/// In-harness checks of the wrong-loop-closure bookkeeping.
struct BookkeepingAudit {
  std::size_t sid_runs = 0;
  std::size_t sid_violations = 0;  ///< runs where corrupted loop closures increased
  std::size_t chow_liu_checks = 0;  ///< marginalizations with exactly one corrupted spoke
  std::size_t chow_liu_violations = 0;
};

struct MonteCarloResult {
  std::vector<MonteCarloCell> cells;  ///< ordered by method, then fraction
  std::vector<std::uint64_t> seeds;   ///< per run
  RunReport report;                   ///< one record per (run, fraction, method)
  BookkeepingAudit audit;

  const MonteCarloCell& cell(EvalMethod method, double fraction) const;
};

/// Seed of run `index` derived from the global seed.
std::uint64_t run_seed(std::uint64_t global_seed, std::uint64_t index);

/// Grid -> noise -> corruption -> optimize (the unpruned estimate) -> prune
/// with each method at the optimized positions -> optimize -> compare the
/// surviving vertices with the truth. A failed optimization counts as an
/// infinite error.
MonteCarloResult run_monte_carlo(const MonteCarloSpec& spec);

std::string export_monte_carlo(const MonteCarloResult& result, ReportFormat format);

// ---------------------------------------------------------------------------
// Repeated traversal

struct TraversalSpec {
  GridSpec grid{10, 10, 1.0};
  std::size_t passes = 20;
  double jitter = 0.25;  ///< fraction of the spacing
  std::uint64_t seed = 1;
  /// Empty means no pruning.
  std::optional<PruningConfig> pruning;
  /// Loop closures to at most this many of the nearest earlier vertices within
  /// grid.loop_radius_factor * grid.spacing.
  std::size_t max_loops_per_vertex = 3;
  /// Rows driven between two pruning rounds.
  std::size_t rows_per_round = 1;
};

struct TraversalResult {
  std::vector<std::size_t> vertices_after_pass;
  std::vector<std::size_t> edges_after_pass;
  PoseGraph graph;
};

/// A robot sweeping the same grid again and again, each pass adding fresh
/// vertices near the grid points with exact odometry and loop closures.
TraversalResult simulate_repeated_traversal(const TraversalSpec& spec);

}  // namespace pgp

#endif  // PGP_EVAL_HPP
