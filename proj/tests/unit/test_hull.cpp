#include "doctest.h"

#include <chrono>
#include <random>

#include "oracles.hpp"
#include "softjig/hull.hpp"

using namespace softjig;

namespace {

VecX v2(double x, double y) { return (VecX(2) << x, y).finished(); }
VecX v1(double x) { return (VecX(1) << x).finished(); }

std::vector<VecX> random_points(std::mt19937_64& rng, int n, int d, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<VecX> pts;
  for (int i = 0; i < n; ++i) {
    VecX p(d);
    for (int k = 0; k < d; ++k) p[k] = u(rng);
    pts.push_back(p);
  }
  return pts;
}

std::vector<VecX> unit_square() { return {v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)}; }

}  // namespace

TEST_CASE("square hull keeps its corners") {
  auto hull = convex_hull(unit_square(), 2);
  CHECK(hull.vertices.size() == 4);
  CHECK(hull.halfspaces.size() == 4);
  CHECK(hull.full_dimensional());
}

TEST_CASE("interior point is eliminated") {
  auto pts = unit_square();
  pts.push_back(v2(0.5, 0.5));
  auto hull = convex_hull(pts, 2);
  CHECK(hull.vertices.size() == 4);
  CHECK(oracle::same_point_set(hull.vertices, unit_square(), 0.0));
}

TEST_CASE("3-D hull matches the O(n^4) facet enumeration oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    auto pts = random_points(rng, 20, 3, 10.0);
    std::vector<Vec3> p3;
    for (const auto& p : pts) p3.emplace_back(p[0], p[1], p[2]);
    std::vector<VecX> expected;
    for (int i : oracle::brute_force_hull_vertices_3d(p3)) expected.push_back(pts[i]);
    auto hull = convex_hull(pts, 3);
    CHECK(oracle::same_point_set(hull.vertices, expected, 0.0));
  }
}

TEST_CASE("affinely dependent input is rejected") {
  std::vector<VecX> line = {v2(0, 0), v2(1, 1), v2(2, 2)};
  CHECK_THROWS_AS(convex_hull(line, 2), DegenerateInput);
  std::mt19937_64 rng(3);
  std::vector<VecX> planar;
  for (auto& p : random_points(rng, 30, 3)) {
    p[2] = 0.5 * p[0] - 0.25 * p[1];
    planar.push_back(p);
  }
  CHECK_THROWS_AS(convex_hull(planar, 3), DegenerateInput);
  auto any = convex_hull_any(planar, 3);
  CHECK(any.affine_dimension == 2);
  for (const auto& v : any.vertices) CHECK(contains(any, v, 1e-7));
}

TEST_CASE("contains: closed set semantics") {
  std::vector<VecX> simplex = {v2(0, 0), v2(3, 0), v2(0, 3)};
  auto hull = convex_hull(simplex, 2);
  CHECK(contains(hull, v2(1, 1), 0.0));
  for (const auto& v : hull.vertices) CHECK(contains(hull, v, 1e-12));
  CHECK_FALSE(contains(hull, v2(2, 2), 1e-9));
  CHECK_THROWS_AS(contains(hull, VecX::Zero(3), 0.0), DimensionMismatch);
}

TEST_CASE("contains agrees with an LP feasibility oracle") {
  std::mt19937_64 rng(99);
  int agree = 0;
  for (int trial = 0; trial < 50; ++trial) {
    int d = 2 + trial % 4;
    auto pts = random_points(rng, 12 + d * 3, d);
    auto hull = convex_hull(pts, d);
    VecX x = random_points(rng, 1, d, 0.9).front();
    bool lp = oracle::in_hull_lp(pts, x);
    // Stay away from the boundary, where neither side is well defined.
    if (std::abs(boundary_distance(hull, x)) < 1e-6) continue;
    CHECK(contains(hull, x, 0.0) == lp);
    ++agree;
  }
  CHECK(agree > 40);
}

TEST_CASE("boundary distance of the unit square") {
  auto sq = convex_hull(unit_square(), 2);
  CHECK(boundary_distance(sq, v2(0.5, 0.5)) == doctest::Approx(0.5));
  CHECK(boundary_distance(sq, v2(0.5, 0.0)) == doctest::Approx(0.0));
  // Nearest edge x = 1 is one unit away.
  CHECK(boundary_distance(sq, v2(2.0, 0.5)) == doctest::Approx(-1.0));
  // Corner region: Euclidean distance to (1, 1).
  CHECK(boundary_distance(sq, v2(4.0, 5.0)) == doctest::Approx(-5.0));
  CHECK_THROWS_AS(boundary_distance(sq, v1(0.0)), DimensionMismatch);
}

TEST_CASE("boundary distance sign matches strict containment") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    int d = 2 + trial % 3;
    auto hull = convex_hull(random_points(rng, 15, d), d);
    VecX x = random_points(rng, 1, d, 1.2).front();
    double bd = boundary_distance(hull, x);
    if (bd > 1e-9) CHECK(contains(hull, x, 0.0));
    if (bd < -1e-9) CHECK_FALSE(contains(hull, x, 0.0));
  }
}

TEST_CASE("hull is idempotent and contains its vertices") {
  std::mt19937_64 rng(5);
  for (int d = 2; d <= 6; ++d) {
    auto hull = convex_hull(random_points(rng, 40, d), d);
    for (const auto& v : hull.vertices) CHECK(contains(hull, v, 1e-7));
    auto again = convex_hull(hull.vertices, d);
    CHECK(oracle::same_point_set(again.vertices, hull.vertices, 1e-9));
  }
}

TEST_CASE("vertex and halfspace descriptions agree under sampling") {
  std::mt19937_64 rng(17);
  for (int d = 3; d <= 6; ++d) {
    auto pts = random_points(rng, 30, d);
    auto hull = convex_hull(pts, d);
    for (int s = 0; s < 30; ++s) {
      VecX x = random_points(rng, 1, d).front();
      if (std::abs(boundary_distance(hull, x)) < 1e-6) continue;
      CHECK(contains(hull, x, 0.0) == oracle::in_hull_lp(hull.vertices, x));
    }
  }
}

TEST_CASE("hull is equivariant under rigid motion") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    auto pts = random_points(rng, 30, 3, 20.0);
    Pose motion = oracle::random_pose(rng, kPi, 50.0);
    std::vector<VecX> moved;
    for (const auto& p : pts) moved.emplace_back(motion.apply(Vec3(p[0], p[1], p[2])));
    auto a = convex_hull(pts, 3);
    auto b = convex_hull(moved, 3);
    std::vector<VecX> a_moved;
    for (const auto& v : a.vertices) a_moved.emplace_back(motion.apply(Vec3(v[0], v[1], v[2])));
    CHECK(oracle::same_point_set(a_moved, b.vertices, 1e-7));
  }
}

TEST_CASE("six-dimensional hull of a few hundred points") {
  std::mt19937_64 rng(31);
  auto pts = random_points(rng, 300, 6);
  auto t0 = std::chrono::steady_clock::now();
  auto hull = convex_hull(pts, 6);
  auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 20.0);
  for (const auto& p : pts) CHECK(contains(hull, p, 1e-7));
}

TEST_CASE("cross-polytope inradius") {
  for (int d = 2; d <= 6; ++d) {
    std::vector<VecX> pts;
    for (int k = 0; k < d; ++k) {
      VecX e = VecX::Zero(d);
      e[k] = 2.0;
      pts.push_back(e);
      pts.push_back(-e);
    }
    auto hull = convex_hull(pts, d);
    CHECK(hull.vertices.size() == static_cast<std::size_t>(2 * d));
    CHECK(hull.halfspaces.size() == (std::size_t{1} << d));
    CHECK(boundary_distance(hull, VecX::Zero(d)) == doctest::Approx(2.0 / std::sqrt(d)));
  }
}

TEST_CASE("minkowski sum: identity, intervals, oracle") {
  auto sq = convex_hull(unit_square(), 2);
  std::vector<ConvexPolytope> one{sq};
  auto same = minkowski_sum(one);
  CHECK(oracle::same_point_set(same.vertices, sq.vertices, 1e-12));

  std::vector<VecX> a = {v1(0), v1(1)}, b = {v1(0), v1(2)};
  std::vector<ConvexPolytope> segs{convex_hull(a, 1), convex_hull(b, 1)};
  auto sum = minkowski_sum(segs);
  CHECK(oracle::same_point_set(sum.vertices, {v1(0), v1(3)}, 1e-12));

  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ConvexPolytope> tris;
    std::vector<std::vector<VecX>> sets;
    for (int i = 0; i < 3; ++i) {
      auto pts = random_points(rng, 3, 2);
      tris.push_back(convex_hull(pts, 2));
      sets.push_back(tris.back().vertices);
    }
    auto got = minkowski_sum(tris);
    auto expected = convex_hull_any(oracle::all_tuple_sums(sets), 2);
    CHECK(oracle::same_point_set(got.vertices, expected.vertices, 1e-9));
    CHECK(oracle::same_point_set(got.vertices, oracle::extreme_points_lp(oracle::all_tuple_sums(sets)),
                                 1e-9));
  }
}

TEST_CASE("minkowski sum enforces the enumeration cap") {
  std::mt19937_64 rng(43);
  std::vector<ConvexPolytope> polys;
  for (int i = 0; i < 3; ++i) polys.push_back(convex_hull(random_points(rng, 20, 2), 2));
  std::size_t product = 1;
  for (const auto& p : polys) product *= p.vertices.size();
  CHECK_THROWS_AS(minkowski_sum(polys, product - 1), CapExceeded);
  CHECK_NOTHROW(minkowski_sum(polys, product));
}

TEST_CASE("min norm point") {
  std::vector<VecX> seg = {v2(-1, 1), v2(1, 1)};
  CHECK((min_norm_point(seg) - v2(0, 1)).norm() < 1e-12);
  std::vector<VecX> tri = {v2(1, -1), v2(1, 1), v2(3, 0)};
  CHECK((min_norm_point(tri) - v2(1, 0)).norm() < 1e-12);
}

namespace {

// Planar convex polygon with `n` vertices embedded in R^d.
std::vector<VecX> random_polygon(std::mt19937_64& rng, int n, int d) {
  auto frame = random_points(rng, 3, d);
  VecX e1 = frame[1].normalized();
  VecX e2 = frame[2] - frame[2].dot(e1) * e1;
  e2.normalize();
  std::uniform_real_distribution<double> r(0.5, 1.5);
  std::vector<VecX> out;
  for (int k = 0; k < n; ++k) {
    double a = 2.0 * kPi * k / n;
    out.push_back(frame[0] + r(rng) * (std::cos(a) * e1 + std::sin(a) * e2));
  }
  return out;
}

void check_against_tuples(const std::vector<std::vector<VecX>>& sets, std::mt19937_64& rng) {
  std::vector<ConvexPolytope> polys;
  const int d = static_cast<int>(sets.front().front().size());
  for (const auto& s : sets) polys.push_back(convex_hull_any(s, d));
  auto sum = minkowski_sum(polys);
  auto tuples = oracle::all_tuple_sums(sets);
  CHECK(oracle::same_point_set(sum.vertices, oracle::extreme_points_lp(tuples), 1e-7));
  for (const auto& h : sum.halfspaces) {
    double worst = -1e300;
    for (const auto& t : tuples) worst = std::max(worst, h.normal.dot(t) - h.offset);
    CHECK(std::abs(worst) < 1e-7);
  }
  VecX centre = VecX::Zero(d);
  for (const auto& t : tuples) centre += t;
  centre /= static_cast<double>(tuples.size());
  std::uniform_int_distribution<std::size_t> pick(0, tuples.size() - 1);
  std::uniform_real_distribution<double> stretch(0.6, 1.3);
  for (int k = 0; k < 40; ++k) {
    VecX x = centre + stretch(rng) * (0.5 * (tuples[pick(rng)] + tuples[pick(rng)]) - centre);
    bool in = oracle::in_hull_lp(tuples, x);
    double slack = 1e300;
    for (const auto& h : sum.halfspaces) slack = std::min(slack, h.offset - h.normal.dot(x));
    if (std::abs(slack) > 1e-7) CHECK(contains(sum, x, 0.0) == in);
  }
}

}  // namespace

TEST_CASE("minkowski sum of segments and polygons in 6-D matches the tuple oracle") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<std::vector<VecX>> sets;
    sets.push_back(random_polygon(rng, 5, 6));
    sets.push_back(random_polygon(rng, 4, 6));
    sets.push_back(random_points(rng, 2, 6));
    if (trial % 2 == 1) sets.push_back(random_polygon(rng, 3, 6));
    check_against_tuples(sets, rng);
  }
}

TEST_CASE("minkowski sum with parallel edges across operands") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 4; ++trial) {
    auto poly = random_polygon(rng, 6, 5);
    std::vector<VecX> shifted;
    VecX offset = random_points(rng, 1, 5).front();
    for (const auto& p : poly) shifted.push_back(0.5 * p + offset);
    // A segment parallel to one polygon edge, and a scaled copy of the polygon.
    std::vector<VecX> seg = {offset, offset + 0.7 * (poly[1] - poly[0])};
    check_against_tuples({poly, shifted, seg}, rng);
  }
}

TEST_CASE("distance to a minkowski sum without enumerating it") {
  std::vector<VecX> sq = unit_square();
  std::vector<std::vector<VecX>> two{sq, sq};
  CHECK(distance_to_minkowski_sum(two, v2(3, 3)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(distance_to_minkowski_sum(two, v2(1.5, 0.5)) < 1e-12);
  CHECK(distance_to_minkowski_sum(two, v2(1, -2)) == doctest::Approx(2.0));

  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<VecX>> sets;
    for (int i = 0; i < 3; ++i) sets.push_back(random_points(rng, 4, 4));
    auto tuples = oracle::all_tuple_sums(sets);
    VecX x = random_points(rng, 1, 4, 4.0).front();
    double got = distance_to_minkowski_sum(sets, x);
    CHECK((got > 1e-9) == !oracle::in_hull_lp(tuples, x));
    std::vector<VecX> shifted;
    for (const auto& t : tuples) shifted.push_back(t - x);
    CHECK(got == doctest::Approx(min_norm_point(shifted).norm()).epsilon(1e-9));
  }
}
