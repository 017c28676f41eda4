#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pgp/density.hpp"

using namespace pgp;
using std::numbers::pi;

namespace {

std::vector<Eigen::Vector2d> grid3() {
  std::vector<Eigen::Vector2d> p;
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 3; ++x) p.emplace_back(x, y);
  }
  return p;
}

std::vector<Eigen::Vector2d> random_points(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Eigen::Vector2d> p;
  for (std::size_t i = 0; i < n; ++i) p.emplace_back(u(rng), u(rng));
  return p;
}

}  // namespace

TEST_CASE("r-density examples") {
  const std::vector<Eigen::Vector2d> two{{0, 0}, {0.5, 0}};
  const PointSet a(two);
  CHECK(r_density(a, 0, 1.0) == doctest::Approx(1 / pi));
  CHECK(r_density(a, 0, 0.5) == 0.0);  // strictly inside only
  CHECK(r_density(a, 0, 0.1) == 0.0);
  const PointSet g(grid3());
  CHECK(r_density(g, 4, 1.2) == doctest::Approx(4 / (pi * 1.44)));
  CHECK_THROWS_AS(r_density(g, 4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(r_density(g, 4, -1.0), std::invalid_argument);
}

TEST_CASE("scale-invariant density examples") {
  const std::vector<Eigen::Vector2d> two{{0, 0}, {2, 0}};
  CHECK(sid_exact(PointSet(two), 0).value == doctest::Approx(1 / (2 * pi)));
  CHECK(oracle::integrated_sid(two, 0) == doctest::Approx(1 / (2 * pi)).epsilon(1e-9));

  const std::vector<Eigen::Vector2d> three{{0, 0}, {1, 0}, {2, 0}};
  CHECK(sid_exact(PointSet(three), 1).value == doctest::Approx(2 / pi));
  CHECK(oracle::integrated_sid(three, 1) == doctest::Approx(2 / pi).epsilon(1e-9));

  const std::vector<Eigen::Vector2d> one{{0, 0}};
  CHECK(sid_exact(PointSet(one), 0).value == 0.0);

  const PointSet g(grid3());
  CHECK(sid_truncated(g, 4, 4).value == doctest::Approx(4 / pi));
  CHECK(sid_truncated(g, 4, 10).value == doctest::Approx((4 + 4 / std::sqrt(2.0)) / pi));
  CHECK(std::abs(sid_truncated(g, 0, 8).value - sid_exact(g, 0).value) < 1e-12);
  CHECK(std::abs(sid_truncated(g, 0, 100).value - sid_exact(g, 0).value) < 1e-12);
  CHECK_THROWS(sid_truncated(g, 0, 0));
}

TEST_CASE("closed form matches numerical integration") {
  std::mt19937_64 rng(101);
  for (int set = 0; set < 10; ++set) {
    const auto pts = random_points(rng, 5 + static_cast<std::size_t>(set) * 4);
    const PointSet ps(pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double exact = sid_exact(ps, static_cast<PointId>(i)).value;
      CHECK(std::abs(exact - oracle::integrated_sid(pts, i)) < 1e-6 * exact);
    }
  }
}

TEST_CASE("scaling positions scales the density inversely") {
  std::mt19937_64 rng(5);
  const auto pts = random_points(rng, 40);
  const PointSet ps(pts);
  for (double s : {0.1, 0.45, 3.0, 10.0}) {
    std::vector<Eigen::Vector2d> scaled;
    for (const auto& p : pts) scaled.push_back(s * p);
    const PointSet ss(scaled);
    for (PointId i = 0; i < 40; ++i) {
      const double expected = sid_exact(ps, i).value / s;
      CHECK(std::abs(sid_exact(ss, i).value - expected) <= 1e-9 * expected);
    }
  }
}

TEST_CASE("truncated density is non-decreasing in the neighbour count") {
  std::mt19937_64 rng(9);
  const auto pts = random_points(rng, 60);
  const PointSet ps(pts);
  for (PointId i = 0; i < 60; ++i) {
    double previous = 0.0;
    for (std::size_t n = 1; n < 70; ++n) {
      const double d = sid_truncated(ps, i, n).value;
      CHECK(d >= previous);
      previous = d;
    }
  }
}

TEST_CASE("adding a point increases every other density") {
  std::mt19937_64 rng(21);
  auto pts = random_points(rng, 30);
  PointSet ps(pts);
  std::vector<double> before;
  for (PointId i = 0; i < 30; ++i) before.push_back(sid_exact(ps, i).value);
  ps.insert(30, {0.5, 0.5});
  for (PointId i = 0; i < 30; ++i) CHECK(sid_exact(ps, i).value > before[static_cast<std::size_t>(i)]);
}

TEST_CASE("near-duplicate points are clamped and counted") {
  const std::vector<Eigen::Vector2d> pts{{0, 0}, {0, 0}, {1, 0}};
  const Density d = sid_exact(PointSet(pts), 0);
  CHECK(d.clamped == 1);
  CHECK(d.value == doctest::Approx((1 / kMinPointDistance + 1) / pi));
  const PointSet clean(grid3());
  for (PointId i = 0; i < 9; ++i) CHECK(sid_exact(clean, i).clamped == 0);
}

TEST_CASE("knn examples") {
  const std::vector<Eigen::Vector2d> three{{0, 0}, {1, 0}, {2, 0}};
  const PointSet ps(three);
  const auto n = knn(ps, 1, 2);
  REQUIRE(n.size() == 2);
  CHECK(n[0].id == 0);
  CHECK(n[1].id == 2);
  CHECK(knn(ps, 0, 10).size() == 2);
}

TEST_CASE("knn agrees with an exhaustive sort") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 10);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 200; ++i) {
    // A coarse lattice produces many exact distance ties.
    pts.emplace_back(std::round(u(rng) * 2) / 2, std::round(u(rng) * 2) / 2);
  }
  std::vector<Eigen::Vector2d> unique;
  for (const auto& p : pts) {
    if (std::none_of(unique.begin(), unique.end(), [&](const auto& q) { return (q - p).norm() == 0; })) {
      unique.push_back(p);
    }
  }
  const PointSet ps(unique);
  for (std::size_t i = 0; i < unique.size(); ++i) {
    for (std::size_t k : {1u, 5u, 17u}) {
      const auto got = knn(ps, static_cast<PointId>(i), k);
      const auto expected = oracle::brute_knn(unique, i, k);
      REQUIRE(got.size() == expected.size());
      for (std::size_t j = 0; j < got.size(); ++j) CHECK(static_cast<std::size_t>(got[j].id) == expected[j]);
    }
  }
}

TEST_CASE("point set survives many removals") {
  std::mt19937_64 rng(4);
  const auto pts = random_points(rng, 300);
  PointSet ps(pts);
  std::vector<Eigen::Vector2d> remaining = pts;
  std::vector<bool> alive(300, true);
  for (PointId i = 0; i < 300; i += 2) {
    ps.erase(i);
    alive[static_cast<std::size_t>(i)] = false;
  }
  CHECK(ps.size() == 150);
  for (PointId i = 1; i < 300; i += 2) {
    const auto got = ps.knn(i, 3);
    std::vector<std::pair<double, PointId>> brute;
    for (PointId j = 0; j < 300; ++j) {
      if (j != i && alive[static_cast<std::size_t>(j)]) {
        brute.emplace_back((pts[static_cast<std::size_t>(j)] - pts[static_cast<std::size_t>(i)]).norm(), j);
      }
    }
    std::sort(brute.begin(), brute.end());
    for (std::size_t k = 0; k < 3; ++k) CHECK(got[k].id == brute[k].second);
  }
}

TEST_CASE("incremental density cache matches recomputation") {
  std::mt19937_64 rng(8);
  const auto pts = random_points(rng, 120);
  DensityCache cache(PointSet(pts), 10);
  PointSet reference(pts);
  std::uniform_int_distribution<PointId> pick(0, 119);
  for (int step = 0; step < 60; ++step) {
    PointId v;
    do v = pick(rng);
    while (!reference.contains(v));
    cache.erase(v);
    reference.erase(v);
    for (PointId id : reference.ids()) {
      CHECK(cache.density(id) == doctest::Approx(sid_truncated(reference, id, 10).value).epsilon(1e-12));
    }
  }
}
