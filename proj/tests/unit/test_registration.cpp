#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "softjig/cavity.hpp"
#include "softjig/kdtree.hpp"
#include "softjig/registration.hpp"

using namespace softjig;
using oracle::random_pose;
using oracle::random_unit;

namespace {

CavityOrientation lopsided() {
  return CavityOrientation::explicit_angles(45.0, rad2deg(std::asin(std::sqrt(0.3))),
                                            rad2deg(std::asin(std::sqrt(0.2))));
}

CavitySpec lopsided_cavity(double depth) {
  return build_cavity(depth, Vec2::Zero(), lopsided(), 0.0, JigSpec{});
}

PointCloud noisy(const PointCloud& c, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  PointCloud out = c;
  for (auto& p : out.points) p += Vec3(g(rng), g(rng), g(rng));
  return out;
}

// Uniform random points on the three faces. Unlike the lattice from
// cavity_point_cloud, a displaced copy has no aliased near-fits.
PointCloud random_face_cloud(const CavitySpec& c, int per_face, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud out;
  for (int f = 0; f < 3; ++f) {
    const auto tri = c.face_triangle(f);
    for (int i = 0; i < per_face; ++i) {
      double a = u(rng), b = u(rng);
      if (a + b > 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
      }
      out.points.push_back(tri[0] + a * (tri[1] - tri[0]) + b * (tri[2] - tri[0]));
    }
  }
  return out;
}

// Points on every downward-facing triangle, on a barycentric grid.
PointCloud sample_lower_surface(const TriMesh& mesh, double spacing) {
  PointCloud out;
  const auto& v = mesh.vertices();
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
    if (mesh.triangle_normal(t).z() > -1e-9) continue;
    const auto& tri = mesh.triangles()[t];
    const Vec3 a = v[tri[0]], b = v[tri[1]], c = v[tri[2]];
    const double longest = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    const int n = std::max(1, static_cast<int>(std::ceil(longest / spacing)));
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j)
        out.points.push_back(a + (double(i) / n) * (b - a) + (double(j) / n) * (c - a));
  }
  return out;
}

double rotation_error_deg(const Pose& a, const Pose& b) { return rad2deg(Pose::rotation_angle_between(a, b)); }

}  // namespace

TEST_CASE("kd-tree queries match brute force") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 700; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  for (int i = 0; i < 30; ++i) pts.push_back(pts[i]);  // duplicates
  const KdTree tree(pts);
  for (int q = 0; q < 200; ++q) {
    const Vec3 p(u(rng), u(rng), u(rng));
    std::vector<std::pair<double, int>> all;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) all.emplace_back((pts[i] - p).squaredNorm(), i);
    std::sort(all.begin(), all.end());

    auto nb = tree.nearest(p);
    CHECK(nb.index == all[0].second);
    CHECK(nb.dist2 == all[0].first);

    auto k = tree.knn(p, 7);
    REQUIRE(k.size() == 7);
    for (int i = 0; i < 7; ++i) CHECK(k[i].dist2 == all[i].first);

    const double r = 12.0;
    auto in = tree.radius(p, r);
    const auto expected = std::count_if(all.begin(), all.end(), [&](const auto& e) { return e.first <= r * r; });
    CHECK(static_cast<long>(in.size()) == expected);

    const double cap = std::sqrt(all[0].first) * 0.5;
    CHECK(tree.nearest(p, cap).index == -1);
  }
  CHECK(KdTree().nearest(Vec3::Zero()).index == -1);
  CHECK(KdTree(std::vector<Vec3>(20, Vec3::Ones())).knn(Vec3::Zero(), 3).size() == 3);
}

TEST_CASE("fit_rigid recovers an exact motion") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Pose m = random_pose(rng, M_PI, 60.0);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    std::vector<Vec3> src, dst;
    for (int i = 0; i < 10; ++i) {
      src.emplace_back(u(rng), u(rng), u(rng));
      dst.push_back(m.apply(src.back()));
    }
    const Pose fit = fit_rigid(src, dst);
    CHECK(rotation_error_deg(fit, m) < 1e-8);
    CHECK((fit.translation() - m.translation()).norm() < 1e-9);
    CHECK(fit.rotation().determinant() == doctest::Approx(1.0));
  }
  std::vector<Vec3> two{Vec3::Zero(), Vec3::UnitX()};
  CHECK_THROWS_AS(fit_rigid(two, two), DegenerateInput);
}

TEST_CASE("params validation") {
  RegistrationParams p;
  CHECK_NOTHROW(p.validate());
  p.ransac_sample_size = 2;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = RegistrationParams{};
  p.inlier_threshold = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("ransac: a cloud aligns to itself at the identity") {
  for (double depth : {15.0, 30.0}) {
    PointCloud c = cavity_point_cloud(lopsided_cavity(depth), 1.5);
    Pose t = ransac_align(c, c, RegistrationParams{}, 1);
    CHECK(rotation_error_deg(t, Pose()) < 1e-6);
    CHECK(t.translation().norm() < 1e-6);
  }
}

TEST_CASE("ransac: known motion without noise") {
  PointCloud target = cavity_point_cloud(lopsided_cavity(25.0), 1.5);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 3; ++trial) {
    const Pose m = Pose::from_axis_angle(random_unit(rng), deg2rad(10.0 + 8.0 * trial), Vec3(5.0, -12.0, 7.0));
    PointCloud source = target.transformed(m);
    const Pose t = ransac_align(source, target, RegistrationParams{}, trial);
    const Pose err = compose(t, m);
    CHECK(rotation_error_deg(err, Pose()) < 0.01);
    CHECK(err.translation().norm() < 1e-3);
  }
}

TEST_CASE("ransac: unrelated shapes have no consensus") {
  std::mt19937_64 rng(5);
  PointCloud sphere;
  for (int i = 0; i < 1500; ++i) sphere.points.push_back(60.0 * random_unit(rng));
  PointCloud cube;
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1500; ++i) {
    Vec3 p(u(rng), u(rng), u(rng));
    p[i % 3] = (i % 2) ? 10.0 : -10.0;
    cube.points.push_back(p);
  }
  CHECK_THROWS_AS(ransac_align(sphere, cube, RegistrationParams{}, 3), NoConsensus);
}

TEST_CASE("icp: identical clouds are a fixed point") {
  PointCloud c = cavity_point_cloud(lopsided_cavity(20.0), 1.0);
  auto r = icp_refine(c, c, Pose(), RegistrationParams{});
  CHECK(r.rmse < 1e-9);
  CHECK(r.iterations_used == 1);
  CHECK(r.inlier_fraction == 1.0);
}

TEST_CASE("icp: 3 mm displacement from the identity converges") {
  PointCloud target = random_face_cloud(lopsided_cavity(20.0), 1500, 7);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    const Vec3 shift = 3.0 * random_unit(rng);
    PointCloud source = target.transformed(Pose::from_translation(shift));
    auto r = icp_refine(source, target, Pose(), RegistrationParams{});
    CHECK(r.rmse <= 1e-3);
    CHECK((r.transform.translation() + shift).norm() <= 1e-3);
    CHECK(r.rmse <= r.initial_rmse);
  }
}

TEST_CASE("icp: noisy cavity cloud lands in the noise band") {
  PointCloud target = cavity_point_cloud(lopsided_cavity(30.0), 1.0);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    PointCloud source = noisy(target, 1.0, seed);
    auto r = icp_refine(source, target, Pose(), RegistrationParams{});
    CHECK(r.rmse >= 0.8);
    CHECK(r.rmse <= 1.3);
  }
}

TEST_CASE("icp: never worse than the initial alignment") {
  PointCloud target = cavity_point_cloud(lopsided_cavity(20.0), 1.0);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 8; ++trial) {
    const Pose init = Pose::from_axis_angle(random_unit(rng), deg2rad(20.0), 4.0 * random_unit(rng));
    PointCloud source = noisy(target, 0.5, trial);
    auto r = icp_refine(source, target, init, RegistrationParams{});
    CHECK(r.rmse <= r.initial_rmse);
    CHECK(r.rmse >= 0.0);
    CHECK(r.transform.is_valid());
  }
}

TEST_CASE("rmse is invariant under a common rigid motion") {
  PointCloud target = cavity_point_cloud(lopsided_cavity(20.0), 1.0);
  PointCloud source = noisy(target, 0.7, 2);
  const Pose m = Pose::from_rpy(0.3, -0.5, 1.1, Vec3(20, -4, 9));
  auto a = icp_refine(source, target, Pose(), RegistrationParams{});
  // The identity is its own conjugate, so both runs start from the same relative guess.
  auto b = icp_refine(source.transformed(m), target.transformed(m), Pose(), RegistrationParams{});
  CHECK(a.rmse == doctest::Approx(b.rmse).epsilon(1e-9));
  CHECK(std::abs(a.rmse - b.rmse) < 1e-6);
}

TEST_CASE("registration is deterministic for a seed") {
  PointCloud target = cavity_point_cloud(lopsided_cavity(25.0), 1.5);
  PointCloud source = noisy(target.transformed(Pose::from_rpy(0.2, 0.1, -0.3, Vec3(3, 4, 5))), 1.0, 7);
  Pose a = ransac_align(source, target, RegistrationParams{}, 99);
  Pose b = ransac_align(source, target, RegistrationParams{}, 99);
  CHECK(a.rotation() == b.rotation());
  CHECK(a.translation() == b.translation());
}

TEST_CASE("shape error: exact, chamfered and wrong-depth cavities") {
  const CavitySpec cavity = lopsided_cavity(30.0);
  RegistrationParams p;

  auto exact = shape_error(cavity_point_cloud(cavity, p.target_spacing), cavity, p, 1);
  CHECK(exact.rmse < 1e-6);

  // The chamfered stamp lives in C_f; its lower surface is the pressed cavity.
  CavitySpec chamfered = build_cavity(30.0, Vec2::Zero(), lopsided(), 2.0, JigSpec{});
  PointCloud pressed = sample_lower_surface(build_stamp_tool(chamfered, 0.0, 1.0), 1.0).transformed(chamfered.frame);
  auto fillet = shape_error(pressed, cavity, p, 2);
  CHECK(fillet.rmse > 0.0);
  CHECK(fillet.rmse <= kReportedShapeErrorMm);

  // Deepest lopsided cavity that fits the membrane is about 34 mm.
  for (std::uint64_t seed : {3, 4}) {
    auto deeper = shape_error(cavity_point_cloud(lopsided_cavity(30.0), 1.0), lopsided_cavity(20.0), p, seed);
    CHECK(deeper.rmse > 1.25 * kReportedShapeErrorMm);
  }
}
