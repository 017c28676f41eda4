#include <doctest.h>

#include "pgp/errors.hpp"
#include "pgp/pose_graph.hpp"

using namespace pgp;

namespace {

Edge edge(VertexId from, VertexId to, EdgeKind kind = EdgeKind::odometry) {
  Edge e;
  e.from = from;
  e.to = to;
  e.measurement = Pose2(1, 0, 0);
  e.kind = kind;
  return e;
}

PoseGraph chain(int n) {
  PoseGraph g;
  for (int i = 0; i < n; ++i) g.add_vertex(i, Pose2(i, 0, 0));
  for (int i = 1; i < n; ++i) g.add_edge(edge(i - 1, i));
  return g;
}

}  // namespace

TEST_CASE("vertices keep insertion order and unique ids") {
  PoseGraph g;
  g.add_vertex(10, {0, 0, 0});
  g.add_vertex(3, {1, 0, 0});
  g.add_vertex(7, {2, 0, 0});
  CHECK(g.ids_by_seq() == std::vector<VertexId>{10, 3, 7});
  CHECK(g.vertex_ids() == std::vector<VertexId>{3, 7, 10});
  CHECK(g.vertex(3).seq < g.vertex(7).seq);
  CHECK_THROWS_AS(g.add_vertex(3, {0, 0, 0}), GraphError);
  CHECK_THROWS_AS(g.add_vertex(4, {std::nan(""), 0, 0}), GraphError);
  CHECK(g.gauge() == 10);
  g.set_fixed_vertex(7);
  CHECK(g.gauge() == 7);
}

TEST_CASE("edge validation") {
  PoseGraph g = chain(3);
  CHECK_THROWS_AS(g.add_edge(edge(0, 0, EdgeKind::loop_closure)), GraphError);
  CHECK_THROWS_AS(g.add_edge(edge(0, 9, EdgeKind::loop_closure)), GraphError);
  // Branching and cyclic odometry.
  CHECK_THROWS_AS(g.add_edge(edge(0, 2)), GraphError);
  CHECK_THROWS_AS(g.add_edge(edge(2, 0)), GraphError);
  Edge bad = edge(0, 2, EdgeKind::loop_closure);
  bad.info(0, 0) = -1;
  CHECK_THROWS_AS(g.add_edge(bad), GraphError);
  Edge asym = edge(0, 2, EdgeKind::loop_closure);
  asym.info(0, 1) = 0.5;
  CHECK_THROWS_AS(g.add_edge(asym), GraphError);
  const EdgeId id = g.add_edge(edge(0, 2, EdgeKind::loop_closure));
  CHECK(g.edge(id).is_loop());
  CHECK(g.degree(0) == 2);
  CHECK(g.edges_between(2, 0) == std::vector<EdgeId>{id});
  CHECK_NOTHROW(g.check_invariants());
}

TEST_CASE("odometry chain queries") {
  PoseGraph g = chain(4);
  CHECK_FALSE(g.odometry_in(0));
  REQUIRE(g.odometry_out(0));
  CHECK(g.edge(*g.odometry_out(0)).to == 1);
  CHECK(g.is_session_boundary(0));
  CHECK(g.is_session_boundary(3));
  CHECK_FALSE(g.is_session_boundary(1));
  CHECK(g.count_edges(EdgeKind::odometry) == 3);
  CHECK(g.neighbors(1) == std::vector<VertexId>{0, 2});
}

TEST_CASE("removal and connectivity") {
  PoseGraph g = chain(4);
  CHECK(g.is_connected());
  g.remove_edge(*g.odometry_out(1));
  CHECK_FALSE(g.is_connected());
  CHECK_THROWS_AS(g.check_invariants(), GraphError);
  CHECK_NOTHROW(g.check_invariants(false));
  g.remove_vertex(3);
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge_count() == 1);
  CHECK_THROWS_AS(g.vertex(3), GraphError);
}

TEST_CASE("provenance counting") {
  PoseGraph g = chain(3);
  Edge l = edge(0, 2, EdgeKind::loop_closure);
  l.provenance = Provenance::corrupted;
  const EdgeId id = g.add_edge(l);
  CHECK(g.count_corrupted(EdgeKind::loop_closure) == 1);
  g.set_edge_provenance(id, Provenance::genuine);
  CHECK(g.count_corrupted(EdgeKind::loop_closure) == 0);
  CHECK(relative_pose(g, 0, 2).x == doctest::Approx(2.0));
  CHECK(vertex_distance(g, 0, 2) == doctest::Approx(2.0));
}
