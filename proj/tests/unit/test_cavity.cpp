#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "softjig/cavity.hpp"

using namespace softjig;

namespace {

JigSpec default_jig() { return JigSpec{}; }

CavitySpec equal_cavity(double depth, double fillet = 0.0, double yaw = 0.0) {
  return build_cavity(depth, Vec2(0, 0), CavityOrientation::equal_angle(yaw), fillet, default_jig());
}

}  // namespace

TEST_CASE("equal-angle corner: axis angles, apex depth, rim plane") {
  CavitySpec c = equal_cavity(20.0);
  const double expected = std::acos(1.0 / std::sqrt(3.0));
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(axis_angle_from_vertical_rad(c.axis(i)) - expected) <= 1e-9);
    // z-component of each axis is 1/sqrt(3) by symmetry of the corner.
    CHECK(c.axis(i).z() == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(std::abs(c.rim[i].z() - 0.0) < 1e-12);
  }
  CHECK(c.apex.z() == doctest::Approx(-20.0));
  CHECK(c.frame.is_valid(1e-12));
  CHECK(c.frame.rotation().determinant() == doctest::Approx(1.0));
}

TEST_CASE("rim triangle of the equal-angle corner") {
  const double d = 20.0;
  CavitySpec c = equal_cavity(d);
  // Each rim vertex lies sqrt(2) d from the axis; the equilateral rim has side sqrt(6) d.
  for (int i = 0; i < 3; ++i) {
    CHECK(Vec2(c.rim[i].x(), c.rim[i].y()).norm() == doctest::Approx(std::sqrt(2.0) * d));
    CHECK((c.rim[i] - c.rim[(i + 1) % 3]).norm() == doctest::Approx(std::sqrt(6.0) * d));
    for (int f = 0; f < 3; ++f)
      if (f != i) CHECK(std::abs(c.faces[f].signed_distance(c.rim[i])) < 1e-9);
  }
}

TEST_CASE("explicit angles must describe an orthonormal frame") {
  CHECK_THROWS_AS(build_cavity(20, Vec2(0, 0), CavityOrientation::explicit_angles(45, 45, 45), 0,
                               default_jig()),
                  InfeasibleOrientation);
  CHECK_THROWS_AS(build_cavity(20, Vec2(0, 0), CavityOrientation::explicit_angles(90, 0, 0), 0,
                               default_jig()),
                  InfeasibleOrientation);
  // sin^2 45 + sin^2 30 + sin^2 30 = 1.
  auto c = build_cavity(20, Vec2(0, 0), CavityOrientation::explicit_angles(45, 30, 30), 0,
                        default_jig());
  const double want[3] = {45, 30, 30};
  for (int i = 0; i < 3; ++i)
    CHECK(rad2deg(std::asin(c.axis(i).z())) == doctest::Approx(want[i]).epsilon(1e-10));
}

TEST_CASE("depth and jig validation") {
  CHECK_THROWS_AS(equal_cavity(0.0), InvalidArgument);
  CHECK_THROWS_AS(equal_cavity(40.5), InvalidArgument);
  CHECK_NOTHROW(equal_cavity(40.0));
  JigSpec small = default_jig();
  small.lateral_extent = 20.0;
  CHECK_THROWS_AS(build_cavity(20, Vec2(0, 0), CavityOrientation::equal_angle(), 0, small),
                  InvalidArgument);
}

TEST_CASE("surface height field") {
  CavitySpec c = equal_cavity(20.0, 0.0, 17.0);
  CHECK(c.surface_height_at(0, 0) == doctest::Approx(-20.0));
  CHECK(c.surface_height_at(50, 50) == doctest::Approx(0.0));
  // Midpoint of a valley edge lies halfway down.
  Vec3 mid = 0.5 * (c.apex + c.rim[0]);
  CHECK(c.surface_height_at(mid.x(), mid.y()) == doctest::Approx(mid.z()));
  CHECK(c.inside_rim(0, 0));
  CHECK_FALSE(c.inside_rim(50, 0));
}

TEST_CASE("sharp stamp is the 4-vertex mirror pyramid") {
  const double d = 20.0;
  CavitySpec c = equal_cavity(d);
  TriMesh stamp = build_stamp_tool(c, 0.0, 0.0);
  CHECK(stamp.vertices().size() == 4);
  CHECK(stamp.is_watertight());
  // Octant tetrahedron with legs d / s_i, s_i = 1/sqrt(3).
  const double leg = d * std::sqrt(3.0);
  CHECK(stamp.volume() == doctest::Approx(leg * leg * leg / 6.0));
  TriMesh world = stamp.transformed(c.frame);
  auto [lo, hi] = world.bounds();
  CHECK(hi.z() - lo.z() == doctest::Approx(d));
  // In the stamp frame the apex is the origin.
  bool has_origin = false;
  for (const auto& v : stamp.vertices()) has_origin |= v.norm() < 1e-9;
  CHECK(has_origin);
}

TEST_CASE("chamfered stamp stays inside the sharp one and is closed") {
  const double d = 20.0, r = 2.0;
  CavitySpec c = equal_cavity(d, r);
  TriMesh sharp = build_stamp_tool(equal_cavity(d), 0.0, 0.0);
  TriMesh soft = build_stamp_tool(c, 0.0, 0.0);
  CHECK(soft.is_watertight());
  CHECK(soft.volume() < sharp.volume());
  CHECK(soft.vertices().size() > 4);
  // In the stamp frame the sharp solid is the octant below the top plane.
  for (const auto& v : soft.vertices()) {
    CHECK(v.minCoeff() >= -1e-9);
    CHECK(v.x() + v.y() >= r / std::sqrt(2.0) - 1e-9);
    CHECK(v.sum() >= r * std::sqrt(3.0) - 1e-9);
  }
  auto [lo, hi] = soft.transformed(c.frame).bounds();
  auto [slo, shi] = sharp.transformed(c.frame).bounds();
  CHECK(hi.z() == doctest::Approx(shi.z()));
  CHECK(lo.z() > slo.z());
}

TEST_CASE("handle adds a closed prism on the base") {
  const double d = 20.0, len = 30.0, rad = 6.0;
  const int seg = 8;
  CavitySpec c = equal_cavity(d, 1.0);
  TriMesh body = build_stamp_tool(c, 0.0, 0.0);
  TriMesh tool = build_stamp_tool(c, len, rad, seg);
  CHECK(tool.is_watertight());
  const double prism = 0.5 * seg * rad * rad * std::sin(2.0 * kPi / seg) * len;
  CHECK(tool.volume() == doctest::Approx(body.volume() + prism).epsilon(1e-9));
  auto [lo, hi] = tool.transformed(c.frame).bounds();
  CHECK(hi.z() == doctest::Approx(len));
  CHECK_THROWS_AS(build_stamp_tool(c, len, 100.0), InvalidArgument);
}

TEST_CASE("cavity point cloud lies on the faces at the requested pitch") {
  CavitySpec c = equal_cavity(25.0, 0.0, 40.0);
  const double spacing = 2.0;
  PointCloud cloud = cavity_point_cloud(c, spacing);
  CHECK(cloud.size() > 100);
  for (const auto& p : cloud.points) {
    double best = 1e9;
    for (int f = 0; f < 3; ++f) best = std::min(best, std::abs(c.faces[f].signed_distance(p)));
    CHECK(best <= 1e-9);
    CHECK(p.z() <= c.rim_height + 1e-9);
  }
  // Corners are present and no two points coincide.
  for (const auto& corner : {c.apex, c.rim[0], c.rim[1], c.rim[2]}) {
    bool found = false;
    for (const auto& p : cloud.points) found |= (p - corner).norm() < 1e-9;
    CHECK(found);
  }
  // Random face points have a cloud point within the pitch.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 200; ++s) {
    auto tri = c.face_triangle(s % 3);
    double a = u(rng), b = u(rng);
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    Vec3 q = tri[0] + a * (tri[1] - tri[0]) + b * (tri[2] - tri[0]);
    double best = 1e9;
    for (const auto& p : cloud.points) best = std::min(best, (p - q).norm());
    CHECK(best <= spacing);
  }
}

TEST_CASE("stamp transform maps the object frame onto the cavity frame") {
  CavitySpec c = equal_cavity(20.0);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10; ++i) {
    Pose source = oracle::random_pose(rng, kPi, 40.0);
    Pose t = stamp_transform(c, source);
    Pose back = compose(source, t);
    CHECK((back.rotation() - c.frame.rotation()).norm() < 1e-9);
    CHECK((back.translation() - c.frame.translation()).norm() < 1e-9);
  }
}

TEST_CASE("rigidly moved cavity keeps its incidences") {
  CavitySpec c = equal_cavity(20.0);
  std::mt19937_64 rng(12);
  Pose motion = Pose::from_axis_angle(Vec3::UnitZ(), 0.7, Vec3(3, -4, 5));
  CavitySpec m = c.transformed(motion);
  for (int i = 0; i < 3; ++i)
    for (int f = 0; f < 3; ++f)
      if (f != i) CHECK(std::abs(m.faces[f].signed_distance(m.rim[i])) < 1e-9);
  CHECK(m.rim_height == doctest::Approx(5.0));
  CHECK(m.surface_height_at(m.apex.x(), m.apex.y()) == doctest::Approx(m.apex.z()));
}
