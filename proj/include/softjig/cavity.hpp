#pragma once

#include <array>
#include <optional>

#include "softjig/geom.hpp"

namespace softjig {

/// Physical constants of the jamming jig. Lengths in mm.
struct JigSpec {
  double surface_height = 0.0;     ///< z of the undeformed membrane (rim plane)
  double jig_thickness = 40.0;     ///< also the maximum stamping depth
  double membrane_friction = 1.97;
  double lateral_extent = 60.0;    ///< radius of the usable membrane surface

  void validate() const;
};

/// How the cavity frame C_f is tilted relative to the horizontal plane.
struct CavityOrientation {
  enum class Mode { EqualAngle, ExplicitAngles };

  Mode mode = Mode::EqualAngle;
  std::array<double, 3> angles_deg{};  ///< elevation of each frame axis (ExplicitAngles)
  double yaw_deg = 0.0;                ///< rotation of the whole corner about the vertical

  static CavityOrientation equal_angle(double yaw_deg = 0.0) { return {Mode::EqualAngle, {}, yaw_deg}; }
  static CavityOrientation explicit_angles(double a, double b, double c, double yaw_deg = 0.0) {
    return {Mode::ExplicitAngles, {a, b, c}, yaw_deg};
  }
};

/// EqualAngle corner: every axis makes arccos(1/sqrt(3)) ~ 54.7356 deg with the vertical,
/// so every face is inclined by that angle; the axis elevation is its complement.
double equal_angle_face_inclination_rad();
double equal_angle_elevation_rad();

/// Angle between a frame axis and the vertical (equals the inclination of its face).
double axis_angle_from_vertical_rad(const Vec3& axis);

/// Oriented plane: points p with normal . p == offset; `normal` is unit length.
struct Plane {
  Vec3 normal;
  double offset = 0.0;
  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

/// Triangular-pyramid cavity: the positive octant of frame C_f, cut by the rim plane.
///
/// Face i is the coordinate plane of C_f orthogonal to axis i; its inward normal is
/// that axis. Rim vertex i lies on axis i, i.e. on faces j and k.
struct CavitySpec {
  double depth = 0.0;
  Vec3 apex = Vec3::Zero();
  Pose frame;
  std::array<Plane, 3> faces;
  std::array<Vec3, 3> rim;
  double fillet_radius = 0.0;
  double rim_height = 0.0;  ///< z of the rim plane
  CavityOrientation orientation;

  static constexpr int kRimFace = 3;

  Vec3 axis(int i) const { return frame.rotation().col(i); }
  Plane rim_plane() const { return {Vec3::UnitZ(), rim_height}; }

  /// Height of the jig surface (cavity floor inside the rim, membrane outside).
  double surface_height_at(double x, double y) const;
  /// Height of face plane i above (x, y).
  double face_height_at(int i, double x, double y) const;
  /// Is (x, y) inside the rim triangle (closed)?
  bool inside_rim(double x, double y, double tol = 0.0) const;
  /// Face i as a triangle: apex plus the two rim vertices that lie on it.
  std::array<Vec3, 3> face_triangle(int i) const;

  /// Same cavity with every point moved by a rigid motion (used for frame-invariance checks).
  CavitySpec transformed(const Pose& motion) const;
};

CavitySpec build_cavity(double depth, const Vec2& apex_xy, const CavityOrientation& orientation,
                        double fillet_radius, const JigSpec& jig);

/// Convex stamp (mirror of the cavity) with chamfered apex and side edges plus a
/// prismatic handle. Returned in the stamp frame C_f (apex at the origin).
TriMesh build_stamp_tool(const CavitySpec& cavity, double handle_length, double handle_radius,
                         int handle_segments = 8);

/// Points on the three faces at a pitch of at most `spacing`, face corners included.
PointCloud cavity_point_cloud(const CavitySpec& cavity, double spacing);

/// Source-to-stamp transform: invert(object_source) composed with the cavity frame.
Pose stamp_transform(const CavitySpec& cavity, const Pose& object_source);

}  // namespace softjig
