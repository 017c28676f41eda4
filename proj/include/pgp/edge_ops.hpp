#ifndef PGP_EDGE_OPS_HPP
#define PGP_EDGE_OPS_HPP

#include <optional>
#include <string_view>

#include "pgp/pose_graph.hpp"

// Edge algebra used by marginalization.
//
// Measurement noise is modelled as additive on the measurement vector
// (dx, dy, dtheta), i.e. expressed in the frame of the `from` vertex, and
// covariances are propagated to first order through the SE(2) Jacobians.

namespace pgp {

/// Chi-square 0.999 quantile for 3 degrees of freedom.
inline constexpr double kDefaultMahalanobisGate = 16.26623619623813;

Eigen::Matrix3d covariance_of(const InformationMatrix& info);
InformationMatrix information_of(const Eigen::Matrix3d& covariance);

/// Reverses an edge: endpoints swapped, measurement inverted, covariance mapped
/// through the inversion Jacobian.
Edge edge_invert(const Edge& e);

/// Chains e1 (a->b) and e2 (b->c) into a->c.
Edge edge_compose(const Edge& e1, const Edge& e2);

/// Returns `e` oriented as from->to, inverting it if necessary.
Edge orient(const Edge& e, VertexId from, VertexId to);

/// d^T (S1 + S2)^-1 d with d the wrapped difference of the two measurements.
/// e2 may be oriented either way along e1's vertex pair.
double mahalanobis_gap(const Edge& e1, const Edge& e2);

enum class CombineVerdict { fused, keep_odometry_drop_loop, drop_both };
std::string_view to_string(CombineVerdict verdict);

struct CombineResult {
  CombineVerdict verdict = CombineVerdict::fused;
  /// Fused edge, or the surviving odometry edge. Empty for drop_both.
  std::optional<Edge> edge;
  double gap = 0.0;
};

/// Fuses two edges on the same vertex pair, or reports a contradiction when
/// their Mahalanobis gap exceeds `gate`. The result is oriented like e1.
CombineResult edge_combine(const Edge& e1, const Edge& e2, double gate = kDefaultMahalanobisGate);

}  // namespace pgp

#endif  // PGP_EDGE_OPS_HPP
