#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "softjig/cavity.hpp"
#include "softjig/geom.hpp"

namespace softjig {

/// Parallel two-finger gripper, all dimensions in mm.
///
/// In the gripper frame x is the closing axis, z the approach (direction of
/// travel) and the origin the midpoint of the two contacts. Each finger is a box
/// whose inner face touches its contact and whose tip reaches `kTipOvershoot`
/// past the contacts; the palm is a box behind the finger roots.
struct GripperSpec {
  double max_opening = 40.0;
  double finger_width = 10.0;      ///< extent along y
  double finger_thickness = 5.0;   ///< extent along x
  double finger_length = 40.0;     ///< extent along z
  double palm_clearance = 2.0;     ///< required gap between palm and object
  double approach_standoff = 30.0; ///< length of the straight-line approach
  double palm_depth = 10.0;        ///< extent of the palm along z
  int approach_count = 8;          ///< approach directions per antipodal pair

  static constexpr double kTipOvershoot = 1.0;
  void validate() const;
};

inline constexpr double kGripperInflation = 0.5;

struct OrientedBox {
  Vec3 centre = Vec3::Zero();
  Mat3 axes = Mat3::Identity();  ///< columns are the box axes
  Vec3 half = Vec3::Zero();

  std::array<Vec3, 8> corners() const;
  OrientedBox inflated(double by) const;
  OrientedBox transformed(const Pose& pose) const;
};

/// One (antipodal pair, approach direction) hypothesis, expressed in the object frame.
struct GraspCandidate {
  Vec3 contact_a = Vec3::Zero();
  Vec3 contact_b = Vec3::Zero();
  Vec3 axis = Vec3::UnitX();      ///< unit, from contact_a to contact_b
  Vec3 approach = -Vec3::UnitZ(); ///< unit, orthogonal to axis
  Pose gripper_pose;
  double width = 0.0;
  int pair_id = 0;  ///< candidates sharing a pair differ only in approach
};

/// Candidate with the gripper frame built from two contacts and an approach
/// direction orthogonal to the closing axis.
GraspCandidate make_grasp(const Vec3& contact_a, const Vec3& contact_b, const Vec3& approach,
                          int pair_id = 0);

/// Finger, finger and palm boxes at the grasp, extended backwards along the
/// approach by the standoff. Object frame.
std::array<OrientedBox, 3> swept_gripper(const GraspCandidate& grasp, const GripperSpec& gripper);

/// Separating-axis test; boxes that only touch a triangle do not intersect it.
bool box_intersects_triangle(const OrientedBox& box, const Vec3& a, const Vec3& b, const Vec3& c);

/// True when the box reaches into the jig: below the membrane surface and
/// outside the cavity.
bool box_hits_jig(const OrientedBox& box, const CavitySpec& cavity, double surface_height);

/// Antipodal candidates from `sample_count` area-weighted surface samples.
/// Deterministic for a given seed.
std::vector<GraspCandidate> generate_grasps(const TriMesh& object, const GripperSpec& gripper,
                                            double mu_finger, int sample_count, std::uint64_t seed);

/// Swept gripper, inflated by kGripperInflation, clears the jig.
bool approach_feasible(const GraspCandidate& grasp, const TriMesh& object, const Pose& object_pose,
                       const CavitySpec& cavity, const JigSpec& jig, const GripperSpec& gripper);

/// N_g: antipodal pairs with at least one feasible approach.
int count_feasible(const TriMesh& object, const Pose& spp, const CavitySpec& cavity,
                   const JigSpec& jig, const GripperSpec& gripper,
                   const std::vector<GraspCandidate>& grasps);

}  // namespace softjig
