#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pgp/errors.hpp"
#include "pgp/eval.hpp"

namespace pgp {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double x : v) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / static_cast<double>(v.size()));
}

void add_error(const Pose2& estimate, const Pose2& reference, std::vector<double>& trans, std::vector<double>& rot) {
  trans.push_back((estimate.translation() - reference.translation()).norm());
  rot.push_back(std::abs(normalize_angle(estimate.theta - reference.theta)) * kDegPerRad);
}

void require_associations(const PoseGraph& g, const std::map<VertexId, Pose2>& reference) {
  std::string missing;
  for (const auto& [id, _] : g.vertices()) {
    if (!reference.contains(id)) missing += (missing.empty() ? "" : ", ") + std::to_string(id);
  }
  if (!missing.empty()) throw Error("no reference pose for vertices: " + missing);
}

}  // namespace

MetricResult summarize(std::vector<double> trans, std::vector<double> rot_deg) {
  MetricResult r;
  r.trans_errors = std::move(trans);
  r.rot_errors_deg = std::move(rot_deg);
  mean_sd(r.trans_errors, r.summary.trans_mean, r.summary.trans_sd);
  mean_sd(r.rot_errors_deg, r.summary.rot_mean, r.summary.rot_sd);
  return r;
}

MetricResult trajectory_error(const std::vector<Pose2>& estimates, const std::vector<Pose2>& reference) {
  if (estimates.size() != reference.size()) {
    throw Error("trajectory lengths differ: " + std::to_string(estimates.size()) + " vs " +
                std::to_string(reference.size()));
  }
  std::vector<double> trans, rot;
  for (std::size_t i = 0; i < estimates.size(); ++i) add_error(estimates[i], reference[i], trans, rot);
  return summarize(std::move(trans), std::move(rot));
}

MetricResult map_error(const PoseGraph& g, const std::map<VertexId, Pose2>& reference) {
  require_associations(g, reference);
  std::vector<double> trans, rot;
  if (g.empty()) return summarize({}, {});
  const VertexId gauge = g.gauge();
  // Move the estimate so that both share the gauge pose.
  const Pose2 align = compose(reference.at(gauge), inverse(g.vertex(gauge).pose));
  for (const auto& [id, v] : g.vertices()) add_error(compose(align, v.pose), reference.at(id), trans, rot);
  return summarize(std::move(trans), std::move(rot));
}

MetricResult relative_map_error(const PoseGraph& g, const std::map<VertexId, Pose2>& reference) {
  require_associations(g, reference);
  if (g.vertex_count() < 2) throw Error("relative map error needs at least 2 vertices");
  const auto order = g.ids_by_seq();
  std::vector<double> trans, rot;
  double distance = 0.0;
  for (std::size_t k = 1; k < order.size(); ++k) {
    const Pose2& ra = reference.at(order[k - 1]);
    const Pose2& rb = reference.at(order[k]);
    const Pose2 rel_ref = between(ra, rb);
    const Pose2 rel_est = between(g.vertex(order[k - 1]).pose, g.vertex(order[k]).pose);
    // |inverse(rel_ref) (+) rel_est| written so that equal inputs give exactly zero.
    trans.push_back((rel_est.translation() - rel_ref.translation()).norm());
    rot.push_back(std::abs(normalize_angle(rel_est.theta - rel_ref.theta)) * kDegPerRad);
    distance += rel_ref.translation().norm();
  }
  MetricResult r = summarize(std::move(trans), std::move(rot));
  r.mean_pair_distance = distance / static_cast<double>(order.size() - 1);
  return r;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || std::isinf(values[lo])) return values[lo];
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace pgp
