#include "pgp/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "pgp/errors.hpp"

namespace pgp {

double RobustKernel::rho(double s) const {
  if (type == KernelType::none || s <= delta * delta) return s;
  return 2.0 * delta * std::sqrt(s) - delta * delta;
}

double RobustKernel::weight(double s) const {
  if (type == KernelType::none || s <= delta * delta) return 1.0;
  return delta / std::sqrt(s);
}

void OptimizerConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (kernel.type == KernelType::huber && !(kernel.delta > 0.0)) {
    throw std::invalid_argument("Huber delta must be positive");
  }
  if (!(initial_lambda > 0.0) || !(lambda_factor > 1.0)) {
    throw std::invalid_argument("damping must be positive with a scaling factor above 1");
  }
}

Eigen::Vector3d edge_residual(const Pose2& xi, const Pose2& xj, const Pose2& z) {
  return compose(inverse(z), between(xi, xj)).vector();
}

ResidualJacobians edge_residual_jacobians(const Pose2& xi, const Pose2& xj, const Pose2& z) {
  const double ci = std::cos(xi.theta), si = std::sin(xi.theta);
  const Eigen::Matrix2d rz_t = z.rotation().transpose();
  const Eigen::Matrix2d ri_t = xi.rotation().transpose();
  Eigen::Matrix2d dri_t;
  dri_t << -si, ci, -ci, -si;
  const Eigen::Vector2d dt(xj.x - xi.x, xj.y - xi.y);

  ResidualJacobians j;
  j.wrt_from.setZero();
  j.wrt_from.topLeftCorner<2, 2>() = -rz_t * ri_t;
  j.wrt_from.block<2, 1>(0, 2) = rz_t * dri_t * dt;
  j.wrt_from(2, 2) = -1.0;
  j.wrt_to.setZero();
  j.wrt_to.topLeftCorner<2, 2>() = rz_t * ri_t;
  j.wrt_to(2, 2) = 1.0;
  return j;
}

InformationMatrix residual_information(const Edge& e) {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  r.topLeftCorner<2, 2>() = e.measurement.rotation();
  return r.transpose() * e.info * r;
}

double edge_chi2(const PoseGraph& g, const Edge& e) {
  const Eigen::Vector3d r = edge_residual(g.vertex(e.from).pose, g.vertex(e.to).pose, e.measurement);
  return r.dot(residual_information(e) * r);
}

double chi2(const PoseGraph& g, const RobustKernel& kernel) {
  double total = 0.0;
  for (const auto& [_, e] : g.edges()) total += kernel.rho(edge_chi2(g, e));
  return total;
}

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct Linearization {
  SparseMatrix hessian;
  Eigen::VectorXd gradient;
};

Linearization linearize(const PoseGraph& g, const std::unordered_map<VertexId, int>& index, int dim,
                        const RobustKernel& kernel) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(g.edge_count() * 36);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);

  auto add_block = [&](int row, int col, const Eigen::Matrix3d& m) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) triplets.emplace_back(row + r, col + c, m(r, c));
  };

  for (const auto& [_, e] : g.edges()) {
    const Pose2& xi = g.vertex(e.from).pose;
    const Pose2& xj = g.vertex(e.to).pose;
    const Eigen::Vector3d r = edge_residual(xi, xj, e.measurement);
    const InformationMatrix info = residual_information(e);
    const double w = kernel.weight(r.dot(info * r));
    const Eigen::Matrix3d weighted = w * info;
    const ResidualJacobians j = edge_residual_jacobians(xi, xj, e.measurement);

    const auto fi = index.find(e.from);
    const auto fj = index.find(e.to);
    const bool has_i = fi != index.end(), has_j = fj != index.end();
    if (has_i) {
      add_block(fi->second, fi->second, j.wrt_from.transpose() * weighted * j.wrt_from);
      b.segment<3>(fi->second) += j.wrt_from.transpose() * weighted * r;
    }
    if (has_j) {
      add_block(fj->second, fj->second, j.wrt_to.transpose() * weighted * j.wrt_to);
      b.segment<3>(fj->second) += j.wrt_to.transpose() * weighted * r;
    }
    if (has_i && has_j) {
      const Eigen::Matrix3d off = j.wrt_from.transpose() * weighted * j.wrt_to;
      add_block(fi->second, fj->second, off);
      add_block(fj->second, fi->second, off.transpose());
    }
  }
  Linearization lin{SparseMatrix(dim, dim), std::move(b)};
  lin.hessian.setFromTriplets(triplets.begin(), triplets.end());
  return lin;
}

PoseGraph apply_step(const PoseGraph& g, const std::unordered_map<VertexId, int>& index,
                     const Eigen::VectorXd& step) {
  PoseGraph out = g;
  for (const auto& [id, k] : index) {
    const Pose2& p = g.vertex(id).pose;
    out.set_pose(id, Pose2(p.x + step[k], p.y + step[k + 1], p.theta + step[k + 2]));
  }
  return out;
}

}  // namespace

OptimizeResult optimize(PoseGraph g, const OptimizerConfig& cfg) {
  cfg.validate();
  OptimizeResult result{std::move(g), {}};
  PoseGraph& graph = result.graph;
  OptimizerStats& stats = result.stats;
  if (graph.vertex_count() < 2) {
    stats.chi2.push_back(chi2(graph, cfg.kernel));
    stats.converged = true;
    return result;
  }
  const VertexId gauge = cfg.gauge.value_or(graph.gauge());
  if (!graph.has_vertex(gauge)) throw OptimizerError("gauge vertex " + std::to_string(gauge) + " does not exist");
  if (!graph.is_connected()) throw OptimizerError("graph is disconnected; the normal equations are singular");

  std::unordered_map<VertexId, int> index;
  int dim = 0;
  for (const auto& [id, _] : graph.vertices()) {
    if (id == gauge) continue;
    index.emplace(id, dim);
    dim += 3;
  }

  double current = chi2(graph, cfg.kernel);
  stats.chi2.push_back(current);
  double lambda = cfg.initial_lambda;
  Eigen::SimplicialLDLT<SparseMatrix> solver;
  bool pattern_ready = false;

  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (current <= 0.0) {
      stats.converged = true;
      break;
    }
    const Linearization lin = linearize(graph, index, dim, cfg.kernel);
    if (!pattern_ready) {
      solver.analyzePattern(lin.hessian);
      pattern_ready = true;
    }
    const Eigen::VectorXd diag = lin.hessian.diagonal();

    bool accepted = false;
    bool factorized = false;
    double next = current;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      SparseMatrix damped = lin.hessian;
      for (int k = 0; k < dim; ++k) damped.coeffRef(k, k) += lambda * (diag[k] + 1e-9);
      solver.factorize(damped);
      if (solver.info() != Eigen::Success) {
        lambda *= cfg.lambda_factor;
        continue;
      }
      factorized = true;
      const Eigen::VectorXd step = solver.solve(-lin.gradient);
      if (!step.allFinite()) {
        lambda *= cfg.lambda_factor;
        continue;
      }
      PoseGraph candidate = apply_step(graph, index, step);
      const double value = chi2(candidate, cfg.kernel);
      if (value < current) {
        graph = std::move(candidate);
        next = value;
        accepted = true;
        lambda = std::max(lambda / cfg.lambda_factor, 1e-12);
      } else {
        lambda *= cfg.lambda_factor;
      }
    }
    if (!factorized) {
      throw OptimizerError("normal equations could not be factorized; the graph is under-constrained");
    }
    if (!accepted) {
      // No downhill step at any damping: a (numerical) local minimum.
      stats.converged = true;
      break;
    }
    ++stats.iterations;
    const double decrease = (current - next) / current;
    current = next;
    stats.chi2.push_back(current);
    if (decrease < cfg.min_relative_decrease) {
      stats.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace pgp
