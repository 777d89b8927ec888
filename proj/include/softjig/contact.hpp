#pragma once

#include <vector>

#include "softjig/cavity.hpp"
#include "softjig/geom.hpp"

namespace softjig {

inline constexpr double kGravity = 9.81;  // N/kg

struct ContactPoint {
  Vec3 position;
  Vec3 normal;        ///< unit, pointing from the jig into the object
  int face_id = 0;    ///< cavity face 0..2, or CavitySpec::kRimFace
  double penetration = 0.0;  ///< positive when inside the jig, >= -tol
};

/// Wrench referenced at the object COM; torque is divided by the moment scale rho.
struct WrenchVector {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();

  VecX as_vector() const;
  static WrenchVector from_vector(const VecX& w);
};

struct WrenchSet {
  ContactPoint contact;
  std::vector<WrenchVector> vertices;
};

/// Lift (or drop) the posed object vertically until it just touches the jig surface.
/// The result is exact: every candidate contact point of the object surface is checked.
Pose lower_onto_jig(const TriMesh& object, const Pose& pose, const CavitySpec& cavity);

/// Vertical gap between the posed object and the jig surface (negative if interpenetrating).
double vertical_clearance(const TriMesh& object, const Pose& pose, const CavitySpec& cavity);

/// Depth of a point inside the jig solid (<= 0 when the point is in free space).
double jig_penetration(const CavitySpec& cavity, const Vec3& p);

std::vector<ContactPoint> detect_contacts(const TriMesh& object, const Pose& pose,
                                          const CavitySpec& cavity, double tol = 0.5);

/// Linearised friction cone. `reference` fixes the tangent basis for vertical normals;
/// pass a direction that moves with the scene (the planner uses the first cavity axis).
WrenchSet friction_cone(const ContactPoint& contact, double mu, int k, const Vec3& com, double rho,
                        const Vec3& reference = Vec3::UnitX());

WrenchVector gravity_wrench(double mass_kg, const Vec3& com, double rho, double g = kGravity);

}  // namespace softjig
