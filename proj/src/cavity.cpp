#include "softjig/cavity.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "softjig/shapes.hpp"

namespace softjig {

void JigSpec::validate() const {
  if (!(jig_thickness > 0.0)) throw InvalidArgument("jig_thickness must be positive");
  if (!(membrane_friction >= 0.0)) throw InvalidArgument("membrane_friction must be >= 0");
  if (!(lateral_extent > 0.0)) throw InvalidArgument("lateral_extent must be positive");
}

double equal_angle_face_inclination_rad() { return std::acos(1.0 / std::sqrt(3.0)); }
double equal_angle_elevation_rad() { return std::asin(1.0 / std::sqrt(3.0)); }

double axis_angle_from_vertical_rad(const Vec3& axis) {
  Vec3 a = axis.normalized();
  return std::atan2(Vec2(a.x(), a.y()).norm(), a.z());
}

namespace {

// Rotation whose columns are the cavity axes, given each axis' z-component.
Mat3 corner_frame(const Vec3& z_components, double yaw_rad) {
  const Vec3 s = z_components.normalized();
  Vec3 a = Vec3::UnitX();
  if (std::abs(s.dot(a)) > 0.9) a = Vec3::UnitY();
  Vec3 r1 = (a - a.dot(s) * s).normalized();
  Vec3 r2 = s.cross(r1);
  Mat3 rows;
  rows.row(0) = r1.transpose();
  rows.row(1) = r2.transpose();
  rows.row(2) = s.transpose();
  Mat3 yaw = Eigen::AngleAxisd(yaw_rad, Vec3::UnitZ()).toRotationMatrix();
  return orthonormalize(yaw * rows);
}

}  // namespace

CavitySpec build_cavity(double depth, const Vec2& apex_xy, const CavityOrientation& orientation,
                        double fillet_radius, const JigSpec& jig) {
  jig.validate();
  if (!(depth > 0.0) || depth > jig.jig_thickness)
    throw InvalidArgument("depth must lie in (0, jig_thickness]; got " + std::to_string(depth));
  if (!(fillet_radius >= 0.0)) throw InvalidArgument("fillet_radius must be >= 0");

  Vec3 z_comp;
  if (orientation.mode == CavityOrientation::Mode::EqualAngle) {
    z_comp = Vec3::Constant(std::sin(equal_angle_elevation_rad()));
  } else {
    for (int i = 0; i < 3; ++i) {
      double a = orientation.angles_deg[i];
      if (!(a > 0.0 && a < 90.0))
        throw InfeasibleOrientation("axis elevation must lie in (0, 90) degrees");
      z_comp[i] = std::sin(deg2rad(a));
    }
    double sum = z_comp.squaredNorm();
    if (std::abs(sum - 1.0) > 1e-6)
      throw InfeasibleOrientation("sum of squared sines is " + std::to_string(sum) +
                                  "; an orthonormal frame needs exactly 1");
  }

  CavitySpec c;
  c.depth = depth;
  c.fillet_radius = fillet_radius;
  c.orientation = orientation;
  c.rim_height = jig.surface_height;
  c.apex = Vec3(apex_xy.x(), apex_xy.y(), jig.surface_height - depth);
  c.frame = Pose(corner_frame(z_comp, deg2rad(orientation.yaw_deg)), c.apex);
  for (int i = 0; i < 3; ++i) {
    Vec3 e = c.axis(i);
    c.faces[i] = Plane{e, e.dot(c.apex)};
    c.rim[i] = c.apex + (depth / e.z()) * e;
  }
  for (const auto& r : c.rim) {
    if (Vec2(r.x(), r.y()).norm() > jig.lateral_extent)
      throw InvalidArgument("cavity rim exceeds the usable membrane radius of " +
                            std::to_string(jig.lateral_extent) + " mm");
  }
  return c;
}

double CavitySpec::face_height_at(int i, double x, double y) const {
  const Vec3& n = faces[i].normal;
  return apex.z() - (n.x() * (x - apex.x()) + n.y() * (y - apex.y())) / n.z();
}

double CavitySpec::surface_height_at(double x, double y) const {
  double floor = face_height_at(0, x, y);
  for (int i = 1; i < 3; ++i) floor = std::max(floor, face_height_at(i, x, y));
  return std::min(rim_height, floor);
}

bool CavitySpec::inside_rim(double x, double y, double tol) const {
  // Inside the octant projection: every face plane is at or below the rim there.
  for (int i = 0; i < 3; ++i)
    if (face_height_at(i, x, y) > rim_height + tol) return false;
  return true;
}

std::array<Vec3, 3> CavitySpec::face_triangle(int i) const {
  return {apex, rim[(i + 1) % 3], rim[(i + 2) % 3]};
}

CavitySpec CavitySpec::transformed(const Pose& motion) const {
  CavitySpec c = *this;
  c.apex = motion.apply(apex);
  c.frame = compose(motion, frame);
  for (int i = 0; i < 3; ++i) {
    Vec3 n = motion.rotate(faces[i].normal);
    c.faces[i] = Plane{n, n.dot(c.apex)};
    c.rim[i] = motion.apply(rim[i]);
  }
  c.rim_height = c.rim[0].z();
  return c;
}

// ---------------------------------------------------------------------------

namespace {

struct HalfspaceW {
  Vec3 n;  // n . p >= o
  double o;
};

std::vector<Vec3> halfspace_vertices(const std::vector<HalfspaceW>& hs) {
  std::vector<Vec3> out;
  const int m = static_cast<int>(hs.size());
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      for (int c = b + 1; c < m; ++c) {
        Mat3 mat;
        mat.row(0) = hs[a].n.transpose();
        mat.row(1) = hs[b].n.transpose();
        mat.row(2) = hs[c].n.transpose();
        if (std::abs(mat.determinant()) < 1e-12) continue;
        Vec3 p = mat.fullPivLu().solve(Vec3(hs[a].o, hs[b].o, hs[c].o));
        bool ok = std::all_of(hs.begin(), hs.end(),
                              [&](const HalfspaceW& h) { return h.n.dot(p) >= h.o - 1e-9; });
        if (!ok) continue;
        bool dup = std::any_of(out.begin(), out.end(),
                               [&](const Vec3& q) { return (q - p).norm() < 1e-9; });
        if (!dup) out.push_back(p);
      }
  return out;
}

}  // namespace

TriMesh build_stamp_tool(const CavitySpec& cavity, double handle_length, double handle_radius,
                         int handle_segments) {
  if (handle_length < 0.0 || handle_radius < 0.0)
    throw InvalidArgument("handle dimensions must be >= 0");
  const double top = cavity.rim_height;
  std::vector<HalfspaceW> hs;
  for (int i = 0; i < 3; ++i) hs.push_back({cavity.axis(i), cavity.axis(i).dot(cavity.apex)});
  hs.push_back({-Vec3::UnitZ(), -top});
  const double r = cavity.fillet_radius;
  if (r > 0.0) {
    // Edge chamfer strips of width r; the apex is cut at distance r along the diagonal.
    for (int i = 0; i < 3; ++i) {
      Vec3 m = (cavity.axis((i + 1) % 3) + cavity.axis((i + 2) % 3)) / std::sqrt(2.0);
      hs.push_back({m, m.dot(cavity.apex) + 0.5 * r});
    }
    Vec3 diag = (cavity.axis(0) + cavity.axis(1) + cavity.axis(2)) / std::sqrt(3.0);
    hs.push_back({diag, diag.dot(cavity.apex) + r});
  }
  std::vector<Vec3> corners = halfspace_vertices(hs);
  TriMesh pyramid = mesh_from_convex_points(corners);

  std::vector<Vec3> verts = pyramid.vertices();
  std::vector<TriMesh::Triangle> tris;
  std::vector<TriMesh::Triangle> top_tris;
  for (std::size_t t = 0; t < pyramid.triangles().size(); ++t) {
    const auto& tri = pyramid.triangles()[t];
    bool on_top = std::all_of(tri.begin(), tri.end(),
                              [&](int v) { return std::abs(verts[v].z() - top) < 1e-9; });
    (on_top && handle_length > 0.0 ? top_tris : tris).push_back(tri);
  }

  if (handle_length > 0.0) {
    // Outer loop: boundary of the top face, counter-clockwise seen from +z.
    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : top_tris)
      for (int k = 0; k < 3; ++k) ++directed[{t[k], t[(k + 1) % 3]}];
    std::map<int, int> next;
    for (const auto& [e, n] : directed)
      if (!directed.count({e.second, e.first})) next[e.first] = e.second;
    std::vector<int> outer;
    int start = next.begin()->first, cur = start;
    do {
      outer.push_back(cur);
      cur = next.at(cur);
    } while (cur != start && outer.size() <= next.size());

    Vec3 centre = Vec3::Zero();
    for (int v : outer) centre += verts[v];
    centre /= static_cast<double>(outer.size());
    double inradius = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < outer.size(); ++k) {
      Vec3 a = verts[outer[k]], b = verts[outer[(k + 1) % outer.size()]];
      Vec3 dir = (b - a).normalized();
      Vec3 off = centre - a;
      inradius = std::min(inradius, (off - off.dot(dir) * dir).norm());
    }
    if (!(handle_radius < inradius))
      throw InvalidArgument("handle radius must be smaller than the stamp base inradius (" +
                            std::to_string(inradius) + " mm)");

    auto angle_of = [&](const Vec3& p) { return std::atan2(p.y() - centre.y(), p.x() - centre.x()); };
    const double a0 = angle_of(verts[outer[0]]);
    auto unwrap = [&](double a) {
      while (a < a0) a += 2.0 * kPi;
      while (a >= a0 + 2.0 * kPi) a -= 2.0 * kPi;
      return a;
    };

    const int n = handle_segments;
    std::vector<int> inner(n), upper(n);
    std::vector<double> inner_angle(n);
    for (int k = 0; k < n; ++k) {
      double a = a0 + 2.0 * kPi * (k + 0.5) / n;
      inner_angle[k] = a;
      inner[k] = static_cast<int>(verts.size());
      verts.push_back(centre + handle_radius * Vec3(std::cos(a), std::sin(a), 0.0));
    }
    for (int k = 0; k < n; ++k) {
      upper[k] = static_cast<int>(verts.size());
      verts.push_back(verts[inner[k]] + Vec3(0, 0, handle_length));
    }
    const int cap = static_cast<int>(verts.size());
    verts.push_back(centre + Vec3(0, 0, handle_length));

    // Zip the annulus between the outer loop and the handle footprint by angle.
    const int m = static_cast<int>(outer.size());
    std::vector<double> outer_angle(m + 1);
    for (int k = 0; k < m; ++k) outer_angle[k] = k == 0 ? a0 : unwrap(angle_of(verts[outer[k]]));
    outer_angle[m] = a0 + 2.0 * kPi;
    // Inner loop starts one step back so both loops begin below angle a0.
    std::vector<int> ring(n + 1);
    std::vector<double> ring_angle(n + 1);
    ring[0] = inner[n - 1];
    ring_angle[0] = inner_angle[n - 1] - 2.0 * kPi;
    for (int k = 1; k <= n; ++k) {
      ring[k] = inner[k - 1];
      ring_angle[k] = inner_angle[k - 1];
    }
    int i = 0, j = 0;
    while (i < m || j < n) {
      bool advance_outer = j == n || (i < m && outer_angle[i + 1] <= ring_angle[j + 1]);
      if (advance_outer) {
        tris.push_back({outer[i % m], outer[(i + 1) % m], ring[j]});
        ++i;
      } else {
        tris.push_back({outer[i % m], ring[j + 1], ring[j]});
        ++j;
      }
    }
    for (int k = 0; k < n; ++k) {
      int k1 = (k + 1) % n;
      tris.push_back({inner[k], inner[k1], upper[k1]});
      tris.push_back({inner[k], upper[k1], upper[k]});
      tris.push_back({cap, upper[k], upper[k1]});
    }
  }

  TriMesh world(std::move(verts), std::move(tris));
  return world.transformed(cavity.frame.inverse());
}

PointCloud cavity_point_cloud(const CavitySpec& cavity, double spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("spacing must be positive");
  double longest = 0.0;
  for (int i = 0; i < 3; ++i) {
    longest = std::max(longest, (cavity.rim[i] - cavity.apex).norm());
    longest = std::max(longest, (cavity.rim[i] - cavity.rim[(i + 1) % 3]).norm());
  }
  const int n = std::max(1, static_cast<int>(std::ceil(longest / spacing)));
  std::map<std::array<double, 3>, int> seen;
  PointCloud cloud;
  for (int f = 0; f < 3; ++f) {
    auto tri = cavity.face_triangle(f);
    Vec3 u = tri[1] - tri[0], v = tri[2] - tri[0];
    for (int a = 0; a <= n; ++a)
      for (int b = 0; a + b <= n; ++b) {
        Vec3 p = tri[0] + (static_cast<double>(a) / n) * u + (static_cast<double>(b) / n) * v;
        if (seen.emplace(std::array<double, 3>{p.x(), p.y(), p.z()}, 0).second)
          cloud.points.push_back(p);
      }
  }
  return cloud;
}

Pose stamp_transform(const CavitySpec& cavity, const Pose& object_source) {
  return compose(invert(object_source), cavity.frame);
}

}  // namespace softjig
