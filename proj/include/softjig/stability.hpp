#pragma once

#include <optional>
#include <vector>

#include "softjig/cavity.hpp"
#include "softjig/contact.hpp"
#include "softjig/hull.hpp"

namespace softjig {

/// P(D): contact points projected onto the horizontal plane through the lowest contact.
struct SupportPolygon {
  double plane_z = 0.0;
  std::vector<Vec2> vertices;  ///< counter-clockwise; fewer than 3 when degenerate
  ConvexPolytope hull;         ///< same polygon as a 2-D polytope
};

enum class StabilityKind { WrenchStable, GeometricStable, Unstable };

const char* to_string(StabilityKind kind);

struct StabilityVerdict {
  StabilityKind kind = StabilityKind::Unstable;
  double margin = 0.0;  ///< N on the wrench branch, mm on the geometric branch
  std::optional<ConvexPolytope> wrench_hull;  ///< built only when -w_g lies in W
  std::optional<SupportPolygon> support_polygon;
  std::vector<ContactPoint> contacts;
  int wrench_sets_used = 0;  ///< after the deepest-per-face fallback, if it fired
};

struct StabilityParams {
  double mu = 1.97;
  int cone_edges = 8;
  double contact_tol = 0.5;
  double moment_scale = 0.0;  ///< rho in mm; 0 selects the object's bounding-sphere radius
  std::size_t minkowski_cap = kDefaultMinkowskiCap;
  double gravity = kGravity;  ///< N/kg

  double resolve_moment_scale(const RigidPart& part) const;
};

/// W_Linf: hull of the Minkowski sum of the per-contact wrench sets (6-D).
ConvexPolytope wrench_space(const std::vector<WrenchSet>& sets,
                            std::size_t cap = kDefaultMinkowskiCap);

SupportPolygon support_polygon(const std::vector<ContactPoint>& contacts);

/// Keep only the deepest contact on each face (at most four).
std::vector<ContactPoint> deepest_per_face(const std::vector<ContactPoint>& contacts);

/// Stability of `part` at `pose`, given already detected contacts.
StabilityVerdict evaluate_stability(const RigidPart& part, const Pose& pose,
                                    const std::vector<ContactPoint>& contacts,
                                    const CavitySpec& cavity, const StabilityParams& params);

/// Detects contacts, then applies the wrench test with the support-polygon fallback.
/// Throws NoContacts when the part does not touch the jig.
StabilityVerdict spp_test(const RigidPart& part, const Pose& pose, const CavitySpec& cavity,
                          const StabilityParams& params);

inline double stability_margin(const StabilityVerdict& verdict) { return verdict.margin; }

}  // namespace softjig
