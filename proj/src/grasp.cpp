#include "softjig/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <set>

namespace softjig {

void GripperSpec::validate() const {
  for (double v : {max_opening, finger_width, finger_thickness, finger_length, palm_clearance,
                   approach_standoff, palm_depth})
    if (!(v > 0.0)) throw InvalidArgument("gripper dimensions must be positive");
  if (!(max_opening > finger_thickness))
    throw InvalidArgument("gripper max_opening must exceed finger_thickness");
  if (approach_count < 1) throw InvalidArgument("gripper approach_count must be at least 1");
}

std::array<Vec3, 8> OrientedBox::corners() const {
  std::array<Vec3, 8> out;
  for (int k = 0; k < 8; ++k) {
    Vec3 s((k & 1) ? 1.0 : -1.0, (k & 2) ? 1.0 : -1.0, (k & 4) ? 1.0 : -1.0);
    out[k] = centre + axes * s.cwiseProduct(half);
  }
  return out;
}

OrientedBox OrientedBox::inflated(double by) const {
  return {centre, axes, half + Vec3::Constant(by)};
}

OrientedBox OrientedBox::transformed(const Pose& pose) const {
  return {pose.apply(centre), pose.rotation() * axes, half};
}

namespace {

// Box from coordinate ranges in a frame.
OrientedBox box_in_frame(const Pose& frame, const Vec3& lo, const Vec3& hi) {
  OrientedBox b{0.5 * (lo + hi), Mat3::Identity(), 0.5 * (hi - lo)};
  return b.transformed(frame);
}

struct Hit {
  double t;
  int triangle;
};

// Nearest hit strictly in front of the origin, ignoring triangle `skip`.
std::optional<Hit> cast_ray(const TriMesh& mesh, const Vec3& origin, const Vec3& dir, int skip) {
  std::optional<Hit> best;
  const auto& v = mesh.vertices();
  for (int i = 0; i < static_cast<int>(mesh.triangles().size()); ++i) {
    if (i == skip) continue;
    const auto& t = mesh.triangles()[i];
    Vec3 e1 = v[t[1]] - v[t[0]];
    Vec3 e2 = v[t[2]] - v[t[0]];
    Vec3 p = dir.cross(e2);
    double det = e1.dot(p);
    if (std::abs(det) < 1e-14) continue;
    Vec3 s = origin - v[t[0]];
    double u = s.dot(p) / det;
    if (u < -1e-12 || u > 1.0 + 1e-12) continue;
    Vec3 q = s.cross(e1);
    double w = dir.dot(q) / det;
    if (w < -1e-12 || u + w > 1.0 + 1e-12) continue;
    double dist = e2.dot(q) / det;
    if (dist <= 1e-9) continue;
    if (!best || dist < best->t) best = Hit{dist, i};
  }
  return best;
}

bool collides_with_mesh(const OrientedBox& box, const TriMesh& mesh) {
  // Axis-aligned bounds of the box for a cheap pre-filter.
  Vec3 reach = box.axes.cwiseAbs() * box.half;
  Vec3 lo = box.centre - reach, hi = box.centre + reach;
  const auto& v = mesh.vertices();
  for (const auto& t : mesh.triangles()) {
    Vec3 tlo = v[t[0]].cwiseMin(v[t[1]]).cwiseMin(v[t[2]]);
    Vec3 thi = v[t[0]].cwiseMax(v[t[1]]).cwiseMax(v[t[2]]);
    if ((tlo.array() > hi.array()).any() || (thi.array() < lo.array()).any()) continue;
    if (box_intersects_triangle(box, v[t[0]], v[t[1]], v[t[2]])) return true;
  }
  return false;
}

}  // namespace

GraspCandidate make_grasp(const Vec3& contact_a, const Vec3& contact_b, const Vec3& approach,
                          int pair_id) {
  const Vec3 d = contact_b - contact_a;
  const double width = d.norm();
  if (!(width > 0.0)) throw DegenerateInput("grasp contacts coincide");
  const Vec3 axis = d / width;
  if (std::abs(axis.dot(approach.normalized())) > 1e-9)
    throw InvalidArgument("approach must be orthogonal to the closing axis");
  const Vec3 z = approach.normalized();
  Mat3 r;
  r << axis, z.cross(axis), z;
  return {contact_a, contact_b, axis, z, Pose(orthonormalize(r), 0.5 * (contact_a + contact_b)),
          width, pair_id};
}

std::array<OrientedBox, 3> swept_gripper(const GraspCandidate& g, const GripperSpec& s) {
  const double hw = 0.5 * g.width;
  const double hy = 0.5 * s.finger_width;
  const double tip = GripperSpec::kTipOvershoot;
  const double root = tip - s.finger_length;
  const double back = s.approach_standoff;
  return {
      box_in_frame(g.gripper_pose, Vec3(-hw - s.finger_thickness, -hy, root - back), Vec3(-hw, hy, tip)),
      box_in_frame(g.gripper_pose, Vec3(hw, -hy, root - back), Vec3(hw + s.finger_thickness, hy, tip)),
      box_in_frame(g.gripper_pose, Vec3(-hw - s.finger_thickness, -hy, root - s.palm_depth - back),
                   Vec3(hw + s.finger_thickness, hy, root)),
  };
}

bool box_intersects_triangle(const OrientedBox& box, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Mat3 rt = box.axes.transpose();
  const std::array<Vec3, 3> v{rt * (a - box.centre), rt * (b - box.centre), rt * (c - box.centre)};
  const double scale = std::max({box.half.maxCoeff(), v[0].norm(), v[1].norm(), v[2].norm(), 1.0});
  const double eps = 1e-9 * scale;
  auto separated_on = [&](const Vec3& axis) {
    if (axis.squaredNorm() < 1e-24) return false;
    const double r = box.half.dot(axis.cwiseAbs());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : v) {
      double d = axis.dot(p);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    const double len = axis.norm();
    return lo >= r - eps * len || hi <= -r + eps * len;
  };
  const std::array<Vec3, 3> edges{v[1] - v[0], v[2] - v[1], v[0] - v[2]};
  for (int k = 0; k < 3; ++k)
    if (separated_on(Vec3::Unit(k))) return false;
  if (separated_on(edges[0].cross(edges[1]))) return false;
  for (int k = 0; k < 3; ++k)
    for (const auto& e : edges)
      if (separated_on(Vec3::Unit(k).cross(e))) return false;
  return true;
}

bool box_hits_jig(const OrientedBox& box, const CavitySpec& cavity, double surface_height) {
  // Part of the box at or below the membrane surface, as a vertex set.
  const auto c = box.corners();
  std::vector<Vec3> below;
  for (const auto& p : c)
    if (p.z() <= surface_height) below.push_back(p);
  if (below.empty()) return false;
  for (int i = 0; i < 8; ++i)
    for (int bit : {1, 2, 4}) {
      int j = i | bit;
      if (j == i) continue;
      double zi = c[i].z() - surface_height, zj = c[j].z() - surface_height;
      if (zi * zj < 0.0) below.push_back(c[i] + (zi / (zi - zj)) * (c[j] - c[i]));
    }
  // Below the surface only the open cavity is free space.
  for (const auto& face : cavity.faces)
    for (const auto& p : below)
      if (face.signed_distance(p) < 0.0) return true;
  return false;
}

std::vector<GraspCandidate> generate_grasps(const TriMesh& object, const GripperSpec& gripper,
                                            double mu_finger, int sample_count, std::uint64_t seed) {
  gripper.validate();
  if (sample_count <= 0) throw InvalidArgument("sample_count must be positive");
  if (!(mu_finger >= 0.0)) throw InvalidArgument("finger friction must be >= 0");
  std::vector<GraspCandidate> out;
  if (object.empty()) return out;

  std::vector<double> areas;
  for (std::size_t i = 0; i < object.triangles().size(); ++i) areas.push_back(object.triangle_area(i));
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(areas.begin(), areas.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double cos_limit = 1.0 / std::sqrt(1.0 + mu_finger * mu_finger);

  int pair_id = 0;
  for (int s = 0; s < sample_count; ++s) {
    const int tri = pick(rng);
    const double r1 = std::sqrt(unit(rng)), r2 = unit(rng);
    const auto& t = object.triangles()[tri];
    const auto& v = object.vertices();
    const Vec3 p = (1.0 - r1) * v[t[0]] + r1 * (1.0 - r2) * v[t[1]] + r1 * r2 * v[t[2]];
    const Vec3 axis = -object.triangle_normal(tri);

    auto hit = cast_ray(object, p, axis, tri);
    if (!hit) continue;
    const double width = hit->t;
    if (width > gripper.max_opening) continue;
    // The ray runs along -n_a, so only the far normal needs the cone check.
    if (axis.dot(object.triangle_normal(hit->triangle)) < cos_limit - 1e-9) continue;
    const Vec3 q = p + width * axis;

    const Vec3 b1 = axis.unitOrthogonal();
    const Vec3 b2 = axis.cross(b1);
    bool any = false;
    for (int j = 0; j < gripper.approach_count; ++j) {
      const double ang = 2.0 * kPi * j / gripper.approach_count;
      const Vec3 approach = std::cos(ang) * b1 + std::sin(ang) * b2;
      GraspCandidate g = make_grasp(p, q, approach, pair_id);
      auto boxes = swept_gripper(g, gripper);
      if (collides_with_mesh(boxes[0], object) || collides_with_mesh(boxes[1], object) ||
          collides_with_mesh(boxes[2].inflated(gripper.palm_clearance), object))
        continue;
      out.push_back(g);
      any = true;
    }
    if (any) ++pair_id;
  }
  return out;
}

bool approach_feasible(const GraspCandidate& grasp, const TriMesh& object, const Pose& object_pose,
                       const CavitySpec& cavity, const JigSpec& jig, const GripperSpec& gripper) {
  (void)object;  // gripper-object clearance is settled when the candidate is generated
  for (const auto& box : swept_gripper(grasp, gripper))
    if (box_hits_jig(box.transformed(object_pose).inflated(kGripperInflation), cavity,
                     jig.surface_height))
      return false;
  return true;
}

int count_feasible(const TriMesh& object, const Pose& spp, const CavitySpec& cavity,
                   const JigSpec& jig, const GripperSpec& gripper,
                   const std::vector<GraspCandidate>& grasps) {
  std::set<int> feasible;
  for (const auto& g : grasps) {
    if (feasible.count(g.pair_id)) continue;
    if (approach_feasible(g, object, spp, cavity, jig, gripper)) feasible.insert(g.pair_id);
  }
  return static_cast<int>(feasible.size());
}

}  // namespace softjig
