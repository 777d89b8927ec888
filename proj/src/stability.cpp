#include "softjig/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace softjig {

const char* to_string(StabilityKind kind) {
  switch (kind) {
    case StabilityKind::WrenchStable: return "WrenchStable";
    case StabilityKind::GeometricStable: return "GeometricStable";
    case StabilityKind::Unstable: return "Unstable";
  }
  return "Unknown";
}

double StabilityParams::resolve_moment_scale(const RigidPart& part) const {
  double rho = moment_scale > 0.0 ? moment_scale : part.bounding_radius();
  if (!(rho > 0.0)) throw InvalidArgument("moment scale must be positive");
  return rho;
}

namespace {

std::vector<VecX> set_points(const WrenchSet& s) {
  std::vector<VecX> pts;
  for (const auto& w : s.vertices) pts.push_back(w.as_vector());
  return pts;
}

constexpr double kInsideTol = 1e-9;

std::size_t tuple_count(const std::vector<WrenchSet>& sets) {
  std::vector<std::size_t> counts;
  for (const auto& s : sets) counts.push_back(s.vertices.size());
  return enumeration_size(counts);
}

// Deepest set per face, used when the full tuple enumeration is too large.
std::vector<WrenchSet> reduce_sets(const std::vector<WrenchSet>& sets) {
  std::map<int, const WrenchSet*> best;
  for (const auto& s : sets) {
    auto it = best.find(s.contact.face_id);
    if (it == best.end() || s.contact.penetration > it->second->contact.penetration)
      best[s.contact.face_id] = &s;
  }
  std::vector<WrenchSet> out;
  for (const auto& [face, s] : best) out.push_back(*s);
  return out;
}

ConvexPolytope sum_of_sets(const std::vector<WrenchSet>& sets, std::size_t cap) {
  std::vector<ConvexPolytope> polys;
  polys.reserve(sets.size());
  for (const auto& s : sets) polys.push_back(convex_hull_any(set_points(s), 6));
  return minkowski_sum(polys, cap);
}

}  // namespace

ConvexPolytope wrench_space(const std::vector<WrenchSet>& sets, std::size_t cap) {
  if (sets.empty()) throw InvalidArgument("wrench_space needs at least one contact");
  if (tuple_count(sets) <= cap) return sum_of_sets(sets, cap);
  auto reduced = reduce_sets(sets);
  if (tuple_count(reduced) > cap)
    throw CapExceeded("wrench sets exceed the enumeration cap even after per-face reduction");
  return sum_of_sets(reduced, cap);
}

std::vector<ContactPoint> deepest_per_face(const std::vector<ContactPoint>& contacts) {
  std::map<int, ContactPoint> best;
  for (const auto& c : contacts) {
    auto it = best.find(c.face_id);
    if (it == best.end() || c.penetration > it->second.penetration) best[c.face_id] = c;
  }
  std::vector<ContactPoint> out;
  for (const auto& [f, c] : best) out.push_back(c);
  return out;
}

SupportPolygon support_polygon(const std::vector<ContactPoint>& contacts) {
  if (contacts.empty()) throw NoContacts("support polygon of an empty contact set");
  SupportPolygon poly;
  poly.plane_z = std::numeric_limits<double>::infinity();
  std::vector<VecX> pts;
  for (const auto& c : contacts) {
    poly.plane_z = std::min(poly.plane_z, c.position.z());
    pts.push_back((VecX(2) << c.position.x(), c.position.y()).finished());
  }
  poly.hull = convex_hull_any(pts, 2);
  Vec2 centre = Vec2::Zero();
  for (const auto& v : poly.hull.vertices) centre += Vec2(v[0], v[1]);
  centre /= static_cast<double>(poly.hull.vertices.size());
  for (const auto& v : poly.hull.vertices) poly.vertices.emplace_back(v[0], v[1]);
  std::sort(poly.vertices.begin(), poly.vertices.end(), [&](const Vec2& a, const Vec2& b) {
    return std::atan2(a.y() - centre.y(), a.x() - centre.x()) <
           std::atan2(b.y() - centre.y(), b.x() - centre.x());
  });
  return poly;
}

StabilityVerdict evaluate_stability(const RigidPart& part, const Pose& pose,
                                    const std::vector<ContactPoint>& contacts,
                                    const CavitySpec& cavity, const StabilityParams& params) {
  if (contacts.empty()) throw NoContacts("the part does not touch the jig");
  const double rho = params.resolve_moment_scale(part);
  const Vec3 com = pose.apply(part.com);

  StabilityVerdict v;
  v.contacts = contacts;
  std::vector<WrenchSet> sets;
  sets.reserve(contacts.size());
  for (const auto& c : contacts)
    sets.push_back(friction_cone(c, params.mu, params.cone_edges, com, rho, cavity.axis(0)));
  if (tuple_count(sets) > params.minkowski_cap) sets = reduce_sets(sets);
  v.wrench_sets_used = static_cast<int>(sets.size());

  // Contacts must supply the wrench that balances gravity.
  const VecX balance = -gravity_wrench(part.mass_kg, com, rho, params.gravity).as_vector();
  // Hulling W is costly; only do it when the balancing wrench lies in W.
  std::vector<std::vector<VecX>> raw;
  raw.reserve(sets.size());
  for (const auto& s : sets) raw.push_back(set_points(s));
  if (distance_to_minkowski_sum(raw, balance) <= kInsideTol) {
    ConvexPolytope w = wrench_space(sets, params.minkowski_cap);
    double d = boundary_distance(w, balance);
    v.wrench_hull = std::move(w);
    if (d > 0.0) {
      v.kind = StabilityKind::WrenchStable;
      v.margin = d;
      return v;
    }
  }

  SupportPolygon poly = support_polygon(contacts);
  VecX pg = (VecX(2) << com.x(), com.y()).finished();
  double d = boundary_distance(poly.hull, pg);
  v.support_polygon = std::move(poly);
  v.kind = d > 0.0 ? StabilityKind::GeometricStable : StabilityKind::Unstable;
  v.margin = d;
  return v;
}

StabilityVerdict spp_test(const RigidPart& part, const Pose& pose, const CavitySpec& cavity,
                          const StabilityParams& params) {
  auto contacts = detect_contacts(part.mesh, pose, cavity, params.contact_tol);
  if (contacts.empty()) throw NoContacts("the part does not touch the jig at this pose");
  return evaluate_stability(part, pose, contacts, cavity, params);
}

}  // namespace softjig
