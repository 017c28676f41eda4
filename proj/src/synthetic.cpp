#include "pgp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "pgp/density.hpp"

namespace pgp {

InformationMatrix Sigma3::information() const {
  if (!all_positive()) throw std::invalid_argument("information needs strictly positive sigmas");
  return Eigen::Vector3d(1.0 / (x * x), 1.0 / (y * y), 1.0 / (theta * theta)).asDiagonal();
}

void GridSpec::validate() const {
  if (rows < 2 || cols < 2) throw std::invalid_argument("grid needs at least 2 rows and 2 columns");
  if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (!(loop_radius_factor >= 0.0)) throw std::invalid_argument("loop radius factor must be non-negative");
}

Bounds grid_arena(const GridSpec& spec) {
  return {-spec.spacing, static_cast<double>(spec.cols) * spec.spacing, -spec.spacing,
          static_cast<double>(spec.rows) * spec.spacing};
}

namespace {

// Odometry along consecutive ids, loop closures between every other pair
// closer than `radius`. Estimates start at the truth.
SyntheticGraph connect(const std::vector<Pose2>& poses, double radius, const InformationMatrix& odometry_info,
                       const InformationMatrix& loop_info) {
  SyntheticGraph out;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const auto id = static_cast<VertexId>(i);
    out.graph.add_vertex(id, poses[i]);
    out.truth.emplace(id, poses[i]);
  }
  if (!poses.empty()) out.graph.set_fixed_vertex(0);

  for (std::size_t i = 1; i < poses.size(); ++i) {
    Edge e;
    e.from = static_cast<VertexId>(i - 1);
    e.to = static_cast<VertexId>(i);
    e.measurement = between(poses[i - 1], poses[i]);
    e.info = odometry_info;
    e.kind = EdgeKind::odometry;
    out.graph.add_edge(e);
  }

  std::vector<Eigen::Vector2d> points;
  points.reserve(poses.size());
  for (const Pose2& p : poses) points.push_back(p.translation());
  const PointSet index(points);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    for (const Neighbor& n : index.within(static_cast<PointId>(i), radius)) {
      const auto j = static_cast<std::size_t>(n.id);
      if (j <= i + 1) continue;
      Edge e;
      e.from = static_cast<VertexId>(i);
      e.to = static_cast<VertexId>(j);
      e.measurement = between(poses[i], poses[j]);
      e.info = loop_info;
      e.kind = EdgeKind::loop_closure;
      out.graph.add_edge(e);
    }
  }
  return out;
}

}  // namespace

SyntheticGraph gen_grid(const GridSpec& spec) {
  spec.validate();
  std::vector<Pose2> poses;
  poses.reserve(spec.rows * spec.cols);
  for (std::size_t r = 0; r < spec.rows; ++r) {
    const bool forward = r % 2 == 0;
    for (std::size_t k = 0; k < spec.cols; ++k) {
      const std::size_t c = forward ? k : spec.cols - 1 - k;
      poses.emplace_back(static_cast<double>(c) * spec.spacing, static_cast<double>(r) * spec.spacing,
                         forward ? 0.0 : std::numbers::pi);
    }
  }
  return connect(poses, spec.spacing * spec.loop_radius_factor, spec.odometry_info, spec.loop_info);
}

SyntheticGraph gen_random_trajectory(const TrajectorySpec& spec) {
  if (spec.steps < 2) throw std::invalid_argument("a trajectory needs at least 2 steps");
  if (!(spec.bounds.max_x > spec.bounds.min_x) || !(spec.bounds.max_y > spec.bounds.min_y)) {
    throw std::invalid_argument("trajectory bounds are empty");
  }
  if (!(spec.step_length > 0.0)) throw std::invalid_argument("step length must be positive");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> turn(-spec.max_turn, spec.max_turn);
  std::uniform_real_distribution<double> heading0(-std::numbers::pi, std::numbers::pi);
  const Bounds& b = spec.bounds;
  const Eigen::Vector2d center(0.5 * (b.min_x + b.max_x), 0.5 * (b.min_y + b.max_y));

  std::vector<Pose2> poses;
  poses.reserve(spec.steps);
  Eigen::Vector2d pos = center;
  double heading = heading0(rng);
  poses.emplace_back(pos.x(), pos.y(), heading);
  while (poses.size() < spec.steps) {
    double next_heading = heading + turn(rng);
    Eigen::Vector2d next = pos + spec.step_length * Eigen::Vector2d(std::cos(next_heading), std::sin(next_heading));
    if (!b.contains(next.x(), next.y())) {
      // Head back towards the middle of the area.
      const Eigen::Vector2d to_center = center - pos;
      next_heading = std::atan2(to_center.y(), to_center.x()) + turn(rng);
      const double step = std::min(spec.step_length, std::max(to_center.norm(), 1e-3));
      next = pos + step * Eigen::Vector2d(std::cos(next_heading), std::sin(next_heading));
      next.x() = std::clamp(next.x(), b.min_x, b.max_x);
      next.y() = std::clamp(next.y(), b.min_y, b.max_y);
    }
    pos = next;
    heading = next_heading;
    poses.emplace_back(pos.x(), pos.y(), heading);
  }
  return connect(poses, spec.loop_radius, spec.odometry_info, spec.loop_info);
}

PoseGraph add_noise(PoseGraph g, const NoiseSpec& noise) {
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const std::optional<InformationMatrix> odometry_info =
      noise.odometry.all_positive() ? std::optional(noise.odometry.information()) : std::nullopt;
  const std::optional<InformationMatrix> loop_info =
      noise.loop.all_positive() ? std::optional(noise.loop.information()) : std::nullopt;

  std::vector<EdgeId> ids;
  for (const auto& [id, _] : g.edges()) ids.push_back(id);
  for (EdgeId id : ids) {
    const Edge& e = g.edge(id);
    const Sigma3& s = e.is_odometry() ? noise.odometry : noise.loop;
    // Draw all three components so the stream does not depend on zero sigmas.
    const double nx = unit(rng), ny = unit(rng), nt = unit(rng);
    const Pose2 z(e.measurement.x + s.x * nx, e.measurement.y + s.y * ny, e.measurement.theta + s.theta * nt);
    const auto& info = e.is_odometry() ? odometry_info : loop_info;
    g.set_edge_measurement(id, z, info.value_or(e.info));
  }
  return g;
}

CorruptionResult corrupt_loop_closures(PoseGraph g, const CorruptionSpec& spec) {
  if (!(spec.fraction >= 0.0 && spec.fraction <= 1.0)) {
    throw std::invalid_argument("corruption fraction must lie in [0, 1]");
  }
  CorruptionResult out;
  std::vector<EdgeId> loops;
  for (const auto& [id, e] : g.edges()) {
    if (e.is_loop()) loops.push_back(id);
  }
  if (spec.fraction > 0.0 && loops.empty()) {
    out.warned_no_loops = true;
    out.graph = std::move(g);
    return out;
  }
  const auto count = static_cast<std::size_t>(std::floor(spec.fraction * static_cast<double>(loops.size()) + 1e-9));

  std::mt19937_64 rng(spec.seed);
  // Partial Fisher-Yates: the first `count` entries become a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, loops.size() - 1);
    std::swap(loops[i], loops[pick(rng)]);
  }
  std::uniform_real_distribution<double> ux(spec.arena.min_x, spec.arena.max_x);
  std::uniform_real_distribution<double> uy(spec.arena.min_y, spec.arena.max_y);
  std::uniform_real_distribution<double> ut(-std::numbers::pi, std::numbers::pi);
  std::sort(loops.begin(), loops.begin() + static_cast<std::ptrdiff_t>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const Edge& e = g.edge(loops[i]);
    const double x = ux(rng), y = uy(rng), t = ut(rng);
    const Pose2 wrong_place(x, y, t);
    g.set_edge_measurement(e.id, between(g.vertex(e.from).pose, wrong_place), e.info);
    g.set_edge_provenance(e.id, Provenance::corrupted);
  }
  out.corrupted = count;
  out.graph = std::move(g);
  return out;
}

PoseGraph dead_reckoning(PoseGraph g) {
  for (VertexId head : g.ids_by_seq()) {
    if (g.odometry_in(head)) continue;
    for (VertexId v = head;;) {
      const auto out = g.odometry_out(v);
      if (!out) break;
      const Edge& e = g.edge(*out);
      g.set_pose(e.to, compose(g.vertex(v).pose, e.measurement));
      v = e.to;
    }
  }
  return g;
}

}  // namespace pgp
