#ifndef PGP_SYNTHETIC_HPP
#define PGP_SYNTHETIC_HPP

#include <cstdint>
#include <map>

#include "pgp/pose_graph.hpp"

namespace pgp {

using GroundTruth = std::map<VertexId, Pose2>;

struct Sigma3 {
  double x = 0.0, y = 0.0, theta = 0.0;
  bool all_positive() const { return x > 0.0 && y > 0.0 && theta > 0.0; }
  /// diag(1/sx^2, 1/sy^2, 1/st^2); requires all_positive().
  InformationMatrix information() const;
};

/// Default Monte Carlo noise levels.
inline constexpr Sigma3 kDefaultOdometrySigma{0.02, 0.02, 0.01};
inline constexpr Sigma3 kDefaultLoopSigma{0.05, 0.05, 0.02};

struct GridSpec {
  std::size_t rows = 30;
  std::size_t cols = 30;
  double spacing = 1.0;
  /// Loop closures join non-consecutive vertices closer than spacing * factor.
  double loop_radius_factor = 1.5;
  InformationMatrix odometry_info = kDefaultOdometrySigma.information();
  InformationMatrix loop_info = kDefaultLoopSigma.information();

  void validate() const;
};

struct Bounds {
  double min_x = 0.0, max_x = 10.0;
  double min_y = 0.0, max_y = 10.0;
  bool contains(double x, double y) const { return x >= min_x && x <= max_x && y >= min_y && y <= max_y; }
};

struct TrajectorySpec {
  std::size_t steps = 500;
  Bounds bounds;
  double step_length = 0.3;
  double max_turn = 0.35;  ///< largest heading change per step (rad)
  double loop_radius = 0.45;
  std::uint64_t seed = 0;
  InformationMatrix odometry_info = kDefaultOdometrySigma.information();
  InformationMatrix loop_info = kDefaultLoopSigma.information();
};

struct NoiseSpec {
  Sigma3 odometry = kDefaultOdometrySigma;
  Sigma3 loop = kDefaultLoopSigma;
  std::uint64_t seed = 0;
};

struct CorruptionSpec {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  /// Area in which wrongly matched places are drawn.
  Bounds arena;
};

struct SyntheticGraph {
  PoseGraph graph;
  GroundTruth truth;
};

/// Vertices on a rows x cols lattice visited in boustrophedon order, exact
/// measurements, vertex estimates equal to the truth, vertex 0 fixed.
SyntheticGraph gen_grid(const GridSpec& spec);

/// Smooth random walk kept inside the bounds, deterministic per seed.
SyntheticGraph gen_random_trajectory(const TrajectorySpec& spec);

/// Perturbs every measurement with zero-mean Gaussian noise. A kind whose
/// sigmas are all positive gets the matching information matrix; otherwise
/// its information is left as is.
PoseGraph add_noise(PoseGraph g, const NoiseSpec& noise);

struct CorruptionResult {
  PoseGraph graph;
  std::size_t corrupted = 0;
  bool warned_no_loops = false;
};

/// Replaces floor(fraction * #loops) randomly chosen loop closures by a
/// wrong match: the pose of a uniformly random place in the arena, seen from
/// the edge's `from` vertex. Information matrices are left unchanged.
CorruptionResult corrupt_loop_closures(PoseGraph g, const CorruptionSpec& spec);

/// Sets every vertex estimate by chaining odometry measurements from the
/// start of each chain (which keeps its current estimate).
PoseGraph dead_reckoning(PoseGraph g);

/// Arena bounding the grid with one spacing of margin.
Bounds grid_arena(const GridSpec& spec);

}  // namespace pgp

#endif  // PGP_SYNTHETIC_HPP
