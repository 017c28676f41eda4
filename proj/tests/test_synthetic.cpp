#include <doctest.h>

#include <cmath>
#include <random>

#include "pgp/optimizer.hpp"
#include "pgp/synthetic.hpp"

using namespace pgp;

namespace {

// Loop count by enumerating every vertex pair of the construction.
std::size_t expected_loops(const SyntheticGraph& s, double radius) {
  const auto order = s.graph.ids_by_seq();
  std::size_t count = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 2; j < order.size(); ++j) {
      if (distance(s.truth.at(order[i]), s.truth.at(order[j])) < radius) ++count;
    }
  }
  return count;
}

bool same_graph(const PoseGraph& a, const PoseGraph& b) {
  if (a.vertex_ids() != b.vertex_ids() || a.edge_count() != b.edge_count()) return false;
  for (const auto& [id, v] : a.vertices()) {
    if (v.pose.vector() != b.vertex(id).pose.vector()) return false;
  }
  for (const auto& [id, e] : a.edges()) {
    const Edge& f = b.edge(id);
    if (e.from != f.from || e.to != f.to || e.kind != f.kind || e.provenance != f.provenance ||
        e.measurement.vector() != f.measurement.vector() || e.info != f.info) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("2x2 grid") {
  const SyntheticGraph s = gen_grid({2, 2, 1.0});
  CHECK(s.graph.vertex_count() == 4);
  CHECK(s.graph.count_edges(EdgeKind::odometry) == 3);
  CHECK(s.graph.count_edges(EdgeKind::loop_closure) == 3);
  CHECK(chi2(s.graph) < 1e-20);
}

TEST_CASE("30x30 grid") {
  for (double spacing : {1.0, 0.3}) {
    const SyntheticGraph s = gen_grid({30, 30, spacing});
    CHECK(s.graph.vertex_count() == 900);
    CHECK(s.graph.count_edges(EdgeKind::odometry) == 899);
    CHECK(s.graph.count_edges(EdgeKind::loop_closure) == expected_loops(s, 1.5 * spacing));
    CHECK(s.graph.count_corrupted(EdgeKind::loop_closure) == 0);
    CHECK(chi2(s.graph) < 1e-16);
    CHECK_NOTHROW(s.graph.check_invariants(true));
    // Consecutive vertices are one spacing apart (boustrophedon order).
    const auto order = s.graph.ids_by_seq();
    for (std::size_t i = 1; i < order.size(); ++i) {
      CHECK(distance(s.truth.at(order[i - 1]), s.truth.at(order[i])) == doctest::Approx(spacing));
    }
  }
  CHECK_THROWS_AS(GridSpec({1, 5, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec({5, 5, 0.0}).validate(), std::invalid_argument);
}

TEST_CASE("random trajectories") {
  TrajectorySpec spec;
  spec.steps = 2;
  const SyntheticGraph two = gen_random_trajectory(spec);
  CHECK(two.graph.count_edges(EdgeKind::odometry) == 1);
  CHECK(two.graph.count_edges(EdgeKind::loop_closure) == 0);

  spec.steps = 800;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    spec.seed = seed;
    const SyntheticGraph a = gen_random_trajectory(spec);
    CHECK(same_graph(a.graph, gen_random_trajectory(spec).graph));
    CHECK(a.graph.vertex_count() == 800);
    CHECK(a.graph.count_edges(EdgeKind::odometry) == 799);
    CHECK(a.graph.count_edges(EdgeKind::loop_closure) == expected_loops(a, spec.loop_radius));
    CHECK(a.graph.count_edges(EdgeKind::loop_closure) > 0);
    CHECK(chi2(a.graph) < 1e-16);
    for (const auto& [id, p] : a.truth) CHECK(spec.bounds.contains(p.x, p.y));
  }
}

TEST_CASE("noise") {
  const SyntheticGraph s = gen_grid({5, 5, 1.0});
  SUBCASE("zero sigma leaves measurements unchanged") {
    const PoseGraph g = add_noise(s.graph, {Sigma3{}, Sigma3{}, 4});
    CHECK(same_graph(g, s.graph));
  }
  SUBCASE("information follows the sigmas") {
    const Sigma3 odo{0.1, 0.2, 0.05}, loop{0.3, 0.3, 0.1};
    const PoseGraph g = add_noise(s.graph, {odo, loop, 4});
    for (const auto& [id, e] : g.edges()) {
      const Sigma3& sig = e.is_odometry() ? odo : loop;
      CHECK(e.info(0, 0) == doctest::Approx(1 / (sig.x * sig.x)));
      CHECK(e.info(1, 1) == doctest::Approx(1 / (sig.y * sig.y)));
      CHECK(e.info(2, 2) == doctest::Approx(1 / (sig.theta * sig.theta)));
      CHECK(e.info(0, 1) == 0.0);
    }
    CHECK(same_graph(add_noise(s.graph, {odo, loop, 4}), g));
    CHECK_FALSE(same_graph(add_noise(s.graph, {odo, loop, 5}), g));
  }
  SUBCASE("perturbations are zero-mean") {
    const Sigma3 odo{0.1, 0.2, 0.05};
    const EdgeId id = *s.graph.odometry_out(0);
    const Eigen::Vector3d truth = s.graph.edge(id).measurement.vector();
    const int n = 10000;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (int k = 0; k < n; ++k) {
      const PoseGraph g = add_noise(s.graph, {odo, Sigma3{}, static_cast<std::uint64_t>(k)});
      Eigen::Vector3d d = g.edge(id).measurement.vector() - truth;
      d(2) = normalize_angle(d(2));
      sum += d;
    }
    const Eigen::Vector3d mean = sum / n;
    CHECK(std::abs(mean.x()) < 3 * odo.x / std::sqrt(n));
    CHECK(std::abs(mean.y()) < 3 * odo.y / std::sqrt(n));
    CHECK(std::abs(mean.z()) < 3 * odo.theta / std::sqrt(n));
  }
}

TEST_CASE("loop closure corruption") {
  const GridSpec spec{30, 30, 1.0};
  const SyntheticGraph s = gen_grid(spec);
  const std::size_t loops = s.graph.count_edges(EdgeKind::loop_closure);

  auto r = corrupt_loop_closures(s.graph, {0.0, 1, grid_arena(spec)});
  CHECK(r.corrupted == 0);
  CHECK(same_graph(r.graph, s.graph));

  r = corrupt_loop_closures(s.graph, {0.1, 1, grid_arena(spec)});
  CHECK(r.corrupted == static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(loops))));
  CHECK(r.graph.count_corrupted(EdgeKind::loop_closure) == r.corrupted);

  r = corrupt_loop_closures(s.graph, {1.0, 1, grid_arena(spec)});
  CHECK(r.graph.count_corrupted(EdgeKind::loop_closure) == loops);
  CHECK(r.graph.count_corrupted(EdgeKind::odometry) == 0);
  for (const auto& [id, e] : s.graph.edges()) {
    const Edge& f = r.graph.edge(id);
    CHECK(f.from == e.from);
    CHECK(f.to == e.to);
    CHECK(f.info == e.info);
    if (e.is_odometry()) CHECK(f.measurement.vector() == e.measurement.vector());
  }

  const SyntheticGraph chain = gen_grid({2, 2, 1.0});
  PoseGraph only_odometry = chain.graph;
  for (const auto& [id, e] : chain.graph.edges()) {
    if (e.is_loop()) only_odometry.remove_edge(id);
  }
  r = corrupt_loop_closures(only_odometry, {0.5, 1, grid_arena(spec)});
  CHECK(r.warned_no_loops);
  CHECK(r.corrupted == 0);
}

TEST_CASE("dead reckoning chains odometry from the start") {
  const SyntheticGraph s = gen_grid({6, 6, 0.5});
  PoseGraph g = s.graph;
  for (const auto& [id, v] : s.graph.vertices()) {
    if (id != 0) g.set_pose(id, {100, 100, 1});
  }
  const PoseGraph d = dead_reckoning(g);
  for (const auto& [id, v] : d.vertices()) {
    CHECK((v.pose.translation() - s.truth.at(id).translation()).norm() < 1e-9);
  }
}
