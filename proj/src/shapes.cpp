#include "softjig/shapes.hpp"

#include <cmath>
#include <vector>

#include "softjig/hull.hpp"

namespace softjig {

TriMesh make_box(const Vec3& size) {
  if ((size.array() <= 0.0).any()) throw InvalidArgument("box size must be positive");
  Vec3 h = 0.5 * size;
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i)
    v.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  std::vector<TriMesh::Triangle> t = {
      {0, 2, 1}, {1, 2, 3},  // -z
      {4, 5, 6}, {5, 7, 6},  // +z
      {0, 1, 4}, {1, 5, 4},  // -y
      {2, 6, 3}, {3, 6, 7},  // +y
      {0, 4, 2}, {2, 4, 6},  // -x
      {1, 3, 5}, {3, 7, 5},  // +x
  };
  return TriMesh(std::move(v), std::move(t));
}

TriMesh make_cylinder(double diameter, double length, int segments) {
  if (diameter <= 0.0 || length <= 0.0) throw InvalidArgument("cylinder size must be positive");
  if (segments < 3) throw InvalidArgument("cylinder needs at least 3 segments");
  const double r = 0.5 * diameter;
  const double h = 0.5 * length;
  std::vector<Vec3> v;
  for (int i = 0; i < segments; ++i) {
    double a = 2.0 * kPi * i / segments;
    v.emplace_back(r * std::cos(a), r * std::sin(a), -h);
  }
  for (int i = 0; i < segments; ++i) {
    double a = 2.0 * kPi * i / segments;
    v.emplace_back(r * std::cos(a), r * std::sin(a), h);
  }
  const int bottom_c = static_cast<int>(v.size());
  v.emplace_back(0.0, 0.0, -h);
  const int top_c = static_cast<int>(v.size());
  v.emplace_back(0.0, 0.0, h);

  std::vector<TriMesh::Triangle> t;
  for (int i = 0; i < segments; ++i) {
    int j = (i + 1) % segments;
    t.push_back({i, j, segments + j});
    t.push_back({i, segments + j, segments + i});
    t.push_back({bottom_c, j, i});
    t.push_back({top_c, segments + i, segments + j});
  }
  return TriMesh(std::move(v), std::move(t));
}

TriMesh mesh_from_convex_points(std::span<const Vec3> points) {
  std::vector<VecX> pts;
  pts.reserve(points.size());
  for (const auto& p : points) pts.emplace_back(p);
  HullFacets hull = convex_hull_facets(pts, 3);

  std::vector<int> remap(points.size(), -1);
  std::vector<Vec3> verts;
  std::vector<TriMesh::Triangle> tris;
  for (const auto& f : hull.facets) {
    TriMesh::Triangle tri{};
    for (int k = 0; k < 3; ++k) {
      int src = f[k];
      if (remap[src] < 0) {
        remap[src] = static_cast<int>(verts.size());
        verts.push_back(points[src]);
      }
      tri[k] = remap[src];
    }
    Vec3 a = verts[tri[0]], b = verts[tri[1]], c = verts[tri[2]];
    if (0.5 * (b - a).cross(c - a).norm() >= TriMesh::kMinTriangleArea) tris.push_back(tri);
  }
  return TriMesh(std::move(verts), std::move(tris));
}

TriMesh make_sphere(double radius, int samples, std::span<const Vec3> extra) {
  if (radius <= 0.0) throw InvalidArgument("sphere radius must be positive");
  std::vector<Vec3> pts(extra.begin(), extra.end());
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < samples; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / samples;
    double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
    double a = golden * i;
    pts.push_back(radius * Vec3(rr * std::cos(a), rr * std::sin(a), z));
  }
  return mesh_from_convex_points(pts);
}

}  // namespace softjig
