#ifndef PGP_OPTIMIZER_HPP
#define PGP_OPTIMIZER_HPP

#include <optional>
#include <vector>

#include "pgp/pose_graph.hpp"

namespace pgp {

enum class KernelType { none, huber };

struct RobustKernel {
  KernelType type = KernelType::none;
  double delta = 1.0;

  static RobustKernel none() { return {}; }
  static RobustKernel huber(double delta) { return {KernelType::huber, delta}; }

  /// rho(s) for a squared Mahalanobis error s.
  double rho(double s) const;
  /// rho'(s), the weight applied to the edge in the normal equations.
  double weight(double s) const;
};

struct OptimizerConfig {
  int max_iterations = 100;
  double min_relative_decrease = 1e-9;
  double initial_lambda = 1e-5;
  double lambda_factor = 10.0;
  RobustKernel kernel;
  /// Fixed vertex; defaults to the graph's gauge.
  std::optional<VertexId> gauge;

  void validate() const;
};

struct OptimizerStats {
  std::vector<double> chi2;  ///< initial value, then one entry per accepted iteration
  int iterations = 0;
  bool converged = false;
};

struct OptimizeResult {
  PoseGraph graph;
  OptimizerStats stats;
};

/// Error of an edge between estimates xi and xj: the wrapped vector of
/// inverse(z) (+) (inverse(xi) (+) xj).
Eigen::Vector3d edge_residual(const Pose2& xi, const Pose2& xj, const Pose2& z);

struct ResidualJacobians {
  Eigen::Matrix3d wrt_from;
  Eigen::Matrix3d wrt_to;
};
ResidualJacobians edge_residual_jacobians(const Pose2& xi, const Pose2& xj, const Pose2& z);

/// The edge information re-expressed for edge_residual. Edge information is
/// stored for noise on the measurement vector; the residual rotates the
/// translational part by the measured heading.
InformationMatrix residual_information(const Edge& e);

/// Squared Mahalanobis error of one edge at the graph's current estimates.
double edge_chi2(const PoseGraph& g, const Edge& e);

/// Sum of rho(edge_chi2) over all edges.
double chi2(const PoseGraph& g, const RobustKernel& kernel = {});

/// Levenberg-Marquardt over all poses except the gauge vertex.
OptimizeResult optimize(PoseGraph g, const OptimizerConfig& cfg = {});

}  // namespace pgp

#endif  // PGP_OPTIMIZER_HPP
