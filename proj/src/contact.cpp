#include "softjig/contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <utility>

namespace softjig {

VecX WrenchVector::as_vector() const {
  VecX w(6);
  w << force, torque;
  return w;
}

WrenchVector WrenchVector::from_vector(const VecX& w) {
  if (w.size() != 6) throw DimensionMismatch("wrench vectors have 6 components");
  return {w.head<3>(), w.tail<3>()};
}

namespace {

enum class Kind { Vertex, ValleyCross, RimCross, ApexProjection, RimVertexProjection };

struct Candidate {
  Vec3 p;
  Kind kind;
  int a = -1;  // faces involved, meaning depends on kind
  int b = -1;
};

struct Crease {
  Vec2 from, to;
  Kind kind;
  int a, b;
};

Vec2 xy(const Vec3& p) { return {p.x(), p.y()}; }

double cross2(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

std::vector<Crease> creases(const CavitySpec& c) {
  std::vector<Crease> out;
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3, k = (i + 2) % 3;
    // Axis i is the intersection of faces j and k; the rim edge of face i joins rim j and k.
    out.push_back({xy(c.apex), xy(c.rim[i]), Kind::ValleyCross, j, k});
    out.push_back({xy(c.rim[j]), xy(c.rim[k]), Kind::RimCross, i, CavitySpec::kRimFace});
  }
  return out;
}

std::vector<Candidate> candidates(const std::vector<Vec3>& verts, const TriMesh& mesh,
                                  const CavitySpec& cavity) {
  std::vector<Candidate> out;
  out.reserve(verts.size() * 2);
  for (const auto& v : verts) out.push_back({v, Kind::Vertex});

  std::set<std::pair<int, int>> edges;
  for (const auto& t : mesh.triangles())
    for (int k = 0; k < 3; ++k) edges.insert(std::minmax(t[k], t[(k + 1) % 3]));
  const auto lines = creases(cavity);
  for (const auto& [ia, ib] : edges) {
    const Vec3& a = verts[ia];
    const Vec3& b = verts[ib];
    Vec2 d = xy(b) - xy(a);
    if (d.squaredNorm() < 1e-18) continue;
    for (const auto& cr : lines) {
      Vec2 e = cr.to - cr.from;
      double den = cross2(d, e);
      if (std::abs(den) < 1e-12 * d.norm() * e.norm()) continue;
      Vec2 w = cr.from - xy(a);
      double t = cross2(w, e) / den;
      double u = cross2(w, d) / den;
      if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) continue;
      out.push_back({a + t * (b - a), cr.kind, cr.a, cr.b});
    }
  }

  struct Corner {
    Vec2 q;
    Kind kind;
    int a;
  };
  std::vector<Corner> corners{{xy(cavity.apex), Kind::ApexProjection, -1}};
  for (int i = 0; i < 3; ++i) corners.push_back({xy(cavity.rim[i]), Kind::RimVertexProjection, i});
  for (const auto& t : mesh.triangles()) {
    const Vec3 &p0 = verts[t[0]], &p1 = verts[t[1]], &p2 = verts[t[2]];
    Vec2 e1 = xy(p1) - xy(p0), e2 = xy(p2) - xy(p0);
    double area = cross2(e1, e2);
    if (std::abs(area) < 1e-12) continue;
    for (const auto& c : corners) {
      Vec2 r = c.q - xy(p0);
      double l1 = cross2(r, e2) / area;
      double l2 = cross2(e1, r) / area;
      double l0 = 1.0 - l1 - l2;
      if (l0 < -1e-12 || l1 < -1e-12 || l2 < -1e-12) continue;
      Vec3 p = l0 * p0 + l1 * p1 + l2 * p2;
      p.x() = c.q.x();
      p.y() = c.q.y();
      out.push_back({p, c.kind, c.a});
    }
  }
  return out;
}

std::vector<Vec3> posed_vertices(const TriMesh& mesh, const Pose& pose) {
  std::vector<Vec3> v;
  v.reserve(mesh.vertices().size());
  for (const auto& p : mesh.vertices()) v.push_back(pose.apply(p));
  return v;
}

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// In-plane distance from the projection of p onto face f to the face polygon.
double lateral_distance(const CavitySpec& c, int f, const Vec3& p) {
  if (f == CavitySpec::kRimFace) {
    Vec2 q = xy(p);
    if (!c.inside_rim(q.x(), q.y())) return 0.0;
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) d = std::min(d, distance_to_segment(q, xy(c.rim[i]), xy(c.rim[(i + 1) % 3])));
    return d;
  }
  const Plane& pl = c.faces[f];
  Vec3 q = p - pl.signed_distance(p) * pl.normal;
  auto tri = c.face_triangle(f);
  bool inside = true;
  for (int k = 0; k < 3; ++k) {
    Vec3 e = tri[(k + 1) % 3] - tri[k];
    Vec3 third = tri[(k + 2) % 3] - tri[k];
    double side = e.cross(q - tri[k]).dot(pl.normal);
    double ref = e.cross(third).dot(pl.normal);
    if (side * ref < 0.0) inside = false;
  }
  if (inside) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    Vec3 a = tri[k], b = tri[(k + 1) % 3];
    Vec3 ab = b - a;
    double t = std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    d = std::min(d, (q - (a + t * ab)).norm());
  }
  return d;
}

Plane patch_plane(const CavitySpec& c, int f) {
  return f == CavitySpec::kRimFace ? c.rim_plane() : c.faces[f];
}

}  // namespace

double jig_penetration(const CavitySpec& c, const Vec3& p) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i)
    best = std::max(best, std::min(c.rim_height - p.z(), -c.faces[i].signed_distance(p)));
  return best;
}

double vertical_clearance(const TriMesh& object, const Pose& pose, const CavitySpec& cavity) {
  auto verts = posed_vertices(object, pose);
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& cand : candidates(verts, object, cavity))
    gap = std::min(gap, cand.p.z() - cavity.surface_height_at(cand.p.x(), cand.p.y()));
  return gap;
}

Pose lower_onto_jig(const TriMesh& object, const Pose& pose, const CavitySpec& cavity) {
  if (object.empty()) throw InvalidArgument("cannot lower an empty mesh");
  double gap = vertical_clearance(object, pose, cavity);
  return Pose(pose.rotation(), pose.translation() - Vec3(0, 0, gap));
}

std::vector<ContactPoint> detect_contacts(const TriMesh& object, const Pose& pose,
                                          const CavitySpec& cavity, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("contact tolerance must be positive");
  auto verts = posed_vertices(object, pose);
  std::vector<ContactPoint> raw;
  auto consider = [&](const Vec3& p, int f, bool need_lateral) {
    Plane pl = patch_plane(cavity, f);
    double s = pl.signed_distance(p);
    if (s > tol) return;
    if (need_lateral && lateral_distance(cavity, f, p) > tol) return;
    raw.push_back({p, pl.normal, f, -s});
  };
  for (const auto& cand : candidates(verts, object, cavity)) {
    double pen = jig_penetration(cavity, cand.p);
    if (pen > 10.0 * tol)
      throw PenetrationTooDeep("object point penetrates the jig by " + std::to_string(pen) + " mm");
    switch (cand.kind) {
      case Kind::Vertex:
        for (int f = 0; f <= CavitySpec::kRimFace; ++f) consider(cand.p, f, true);
        break;
      case Kind::ValleyCross:
        consider(cand.p, cand.a, false);
        consider(cand.p, cand.b, false);
        break;
      case Kind::RimCross:
      case Kind::RimVertexProjection:
        // A convex crease pushes on the object through the rim plane.
        consider(cand.p, CavitySpec::kRimFace, false);
        break;
      case Kind::ApexProjection:
        for (int f = 0; f < 3; ++f) consider(cand.p, f, false);
        break;
    }
  }

  // Deepest first; within a face, drop points closer than tol to a kept one.
  std::stable_sort(raw.begin(), raw.end(), [](const ContactPoint& a, const ContactPoint& b) {
    if (a.face_id != b.face_id) return a.face_id < b.face_id;
    return a.penetration > b.penetration;
  });
  std::vector<ContactPoint> kept;
  for (const auto& c : raw) {
    bool near = std::any_of(kept.begin(), kept.end(), [&](const ContactPoint& k) {
      return k.face_id == c.face_id && (k.position - c.position).norm() < tol;
    });
    if (!near) kept.push_back(c);
  }
  return kept;
}

WrenchSet friction_cone(const ContactPoint& contact, double mu, int k, const Vec3& com, double rho,
                        const Vec3& reference) {
  if (!(mu >= 0.0)) throw InvalidArgument("friction coefficient must be >= 0");
  if (!(rho > 0.0)) throw InvalidArgument("moment scale must be positive");
  if (mu > 0.0 && k < 3) throw InvalidArgument("a friction cone needs at least 3 edges");
  const Vec3 n = contact.normal.normalized();
  const Vec3 lever = contact.position - com;
  WrenchSet set{contact, {}};
  if (mu == 0.0) {
    set.vertices.push_back({n, lever.cross(n) / rho});
    return set;
  }
  Vec3 t1 = Vec3::UnitZ().cross(n);
  if (t1.norm() < 1e-6) t1 = reference - reference.dot(n) * n;
  if (t1.norm() < 1e-6) t1 = n.unitOrthogonal();
  t1.normalize();
  const Vec3 t2 = n.cross(t1);
  for (int j = 0; j < k; ++j) {
    double a = 2.0 * kPi * j / k;
    Vec3 f = (n + mu * (std::cos(a) * t1 + std::sin(a) * t2)).normalized();
    set.vertices.push_back({f, lever.cross(f) / rho});
  }
  return set;
}

WrenchVector gravity_wrench(double mass_kg, const Vec3& com, double rho, double g) {
  (void)com;  // referenced at the COM itself: no lever arm
  if (!(mass_kg > 0.0)) throw InvalidArgument("mass must be positive");
  if (!(rho > 0.0)) throw InvalidArgument("moment scale must be positive");
  if (!(g > 0.0)) throw InvalidArgument("gravity must be positive");
  return {Vec3(0, 0, -mass_kg * g), Vec3::Zero()};
}

}  // namespace softjig
