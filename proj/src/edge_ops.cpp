#include "pgp/edge_ops.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pgp/errors.hpp"

namespace pgp {

namespace {

constexpr double kMinReciprocalCondition = 1e-14;

std::string pair_name(const Edge& e) {
  std::ostringstream s;
  s << e.from << "->" << e.to;
  return s.str();
}

// Symmetric inverse with a conditioning check.
Eigen::Matrix3d checked_inverse(const Eigen::Matrix3d& m, const char* what, const Edge& context) {
  const Eigen::Matrix3d sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(sym);
  const auto& ev = eig.eigenvalues();
  if (!sym.allFinite() || ev.minCoeff() <= 0.0 || ev.minCoeff() < kMinReciprocalCondition * ev.maxCoeff()) {
    std::ostringstream s;
    s << what << " of edge " << pair_name(context) << " is singular or not positive definite"
      << " (eigenvalues " << ev.transpose() << ")";
    throw EdgeOpError(s.str());
  }
  const Eigen::Matrix3d inv = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (inv + inv.transpose());
}

Provenance merge(Provenance a, Provenance b) {
  return (a == Provenance::corrupted || b == Provenance::corrupted) ? Provenance::corrupted : Provenance::genuine;
}

void require_same_pair(const Edge& e1, const Edge& e2) {
  const bool same = (e1.from == e2.from && e1.to == e2.to) || (e1.from == e2.to && e1.to == e2.from);
  if (!same) throw EdgeOpError("edges " + pair_name(e1) + " and " + pair_name(e2) + " connect different vertices");
}

}  // namespace

Eigen::Matrix3d covariance_of(const InformationMatrix& info) {
  Edge context;
  return checked_inverse(info, "information matrix", context);
}

InformationMatrix information_of(const Eigen::Matrix3d& covariance) {
  Edge context;
  return checked_inverse(covariance, "covariance", context);
}

Edge edge_invert(const Edge& e) {
  const Eigen::Matrix3d cov = checked_inverse(e.info, "information matrix", e);
  const Eigen::Matrix3d j = inverse_jacobian(e.measurement);
  Edge out = e;
  out.from = e.to;
  out.to = e.from;
  out.measurement = inverse(e.measurement);
  out.info = checked_inverse(j * cov * j.transpose(), "inverted covariance", e);
  return out;
}

Edge edge_compose(const Edge& e1, const Edge& e2) {
  if (e1.to != e2.from) {
    throw EdgeOpError("cannot compose " + pair_name(e1) + " with " + pair_name(e2) + ": endpoints do not meet");
  }
  const Eigen::Matrix3d cov1 = checked_inverse(e1.info, "information matrix", e1);
  const Eigen::Matrix3d cov2 = checked_inverse(e2.info, "information matrix", e2);
  const ComposeJacobians j = compose_jacobians(e1.measurement, e2.measurement);
  Edge out;
  out.from = e1.from;
  out.to = e2.to;
  out.measurement = compose(e1.measurement, e2.measurement);
  const Eigen::Matrix3d cov = j.wrt_a * cov1 * j.wrt_a.transpose() + j.wrt_b * cov2 * j.wrt_b.transpose();
  out.info = checked_inverse(cov, "composed covariance", out);
  out.kind = (e1.is_loop() || e2.is_loop()) ? EdgeKind::loop_closure : EdgeKind::odometry;
  out.provenance = merge(e1.provenance, e2.provenance);
  return out;
}

Edge orient(const Edge& e, VertexId from, VertexId to) {
  if (e.from == from && e.to == to) return e;
  if (e.from == to && e.to == from) return edge_invert(e);
  throw EdgeOpError("edge " + pair_name(e) + " does not connect " + std::to_string(from) + " and " +
                    std::to_string(to));
}

double mahalanobis_gap(const Edge& e1, const Edge& e2) {
  require_same_pair(e1, e2);
  const Edge b = orient(e2, e1.from, e1.to);
  const Eigen::Matrix3d combined = checked_inverse(e1.info, "information matrix", e1) +
                                   checked_inverse(b.info, "information matrix", b);
  const Eigen::LDLT<Eigen::Matrix3d> ldlt(combined);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw EdgeOpError("combined covariance of " + pair_name(e1) + " is singular");
  }
  const Eigen::Vector3d d = difference(e1.measurement, b.measurement);
  return std::max(0.0, d.dot(ldlt.solve(d)));
}

std::string_view to_string(CombineVerdict verdict) {
  switch (verdict) {
    case CombineVerdict::fused: return "fused";
    case CombineVerdict::keep_odometry_drop_loop: return "keep_odometry_drop_loop";
    case CombineVerdict::drop_both: return "drop_both";
  }
  return "unknown";
}

CombineResult edge_combine(const Edge& e1, const Edge& e2, double gate) {
  require_same_pair(e1, e2);
  const Edge b = orient(e2, e1.from, e1.to);
  CombineResult result;
  result.gap = mahalanobis_gap(e1, b);

  if (result.gap > gate && e1.kind != b.kind) {
    result.verdict = CombineVerdict::keep_odometry_drop_loop;
    result.edge = e1.is_odometry() ? e1 : b;
    return result;
  }
  if (result.gap > gate && e1.is_loop()) {
    result.verdict = CombineVerdict::drop_both;
    return result;
  }
  // Agreement, or two contradicting odometry edges which are fused anyway.
  const InformationMatrix info = e1.info + b.info;
  const Eigen::Vector3d d = difference(e1.measurement, b.measurement);
  const Eigen::Vector3d step = info.ldlt().solve(b.info * d);
  Edge out = e1;
  out.measurement = Pose2(e1.measurement.x + step.x(), e1.measurement.y + step.y(), e1.measurement.theta + step.z());
  out.info = 0.5 * (info + info.transpose());
  out.kind = (e1.is_odometry() || b.is_odometry()) ? EdgeKind::odometry : EdgeKind::loop_closure;
  out.provenance = merge(e1.provenance, b.provenance);
  result.verdict = CombineVerdict::fused;
  result.edge = out;
  return result;
}

}  // namespace pgp
