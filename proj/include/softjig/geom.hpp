#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <span>
#include <vector>

#include "softjig/errors.hpp"

namespace softjig {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Rigid transform x -> R x + t. Lengths are millimetres.
class Pose {
 public:
  Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  /// Throws InvalidArgument unless `rotation` is orthonormal with det +1 (tol 1e-9).
  Pose(const Mat3& rotation, const Vec3& translation);

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& t) { return Pose(Mat3::Identity(), t); }
  static Pose from_axis_angle(const Vec3& axis, double angle_rad,
                              const Vec3& translation = Vec3::Zero());
  static Pose rot_z(double angle_rad) { return from_axis_angle(Vec3::UnitZ(), angle_rad); }
  /// Roll-pitch-yaw in radians, applied as Rz(yaw) * Ry(pitch) * Rx(roll).
  static Pose from_rpy(double roll, double pitch, double yaw,
                       const Vec3& translation = Vec3::Zero());

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 rotate(const Vec3& v) const { return rotation_ * v; }

  Pose inverse() const;

  /// Geodesic angle of the relative rotation between two poses, radians.
  static double rotation_angle_between(const Pose& a, const Pose& b);

  bool is_valid(double tol = 1e-9) const;

 private:
  struct Unchecked {};
  Pose(Unchecked, const Mat3& r, const Vec3& t) : rotation_(r), translation_(t) {}
  friend Pose compose(const Pose& a, const Pose& b);

  Mat3 rotation_;
  Vec3 translation_;
};

/// Applies `b` first, then `a`.
Pose compose(const Pose& a, const Pose& b);
inline Pose invert(const Pose& p) { return p.inverse(); }

/// Nearest rotation matrix (polar decomposition) with det +1.
Mat3 orthonormalize(const Mat3& m);

/// Indexed triangle mesh. Construction validates indices and rejects slivers.
class TriMesh {
 public:
  using Triangle = std::array<int, 3>;

  TriMesh() = default;
  TriMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  bool empty() const { return triangles_.empty(); }

  Vec3 triangle_normal(std::size_t i) const;  // outward for consistently wound meshes
  double triangle_area(std::size_t i) const;
  double surface_area() const;
  /// Signed volume from the divergence theorem; positive for outward winding.
  double volume() const;
  /// Centroid of the enclosed solid; falls back to the area centroid for open meshes.
  Vec3 centroid() const;
  std::pair<Vec3, Vec3> bounds() const;

  TriMesh transformed(const Pose& pose) const;

  /// True when every undirected edge is shared by exactly two triangles.
  bool is_watertight() const;

  static constexpr double kMinTriangleArea = 1e-12;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
};

struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  Vec3 centroid() const;
  PointCloud transformed(const Pose& pose) const;
};

/// Rigid part: mesh in its own frame plus mass properties (kg, mm).
struct RigidPart {
  TriMesh mesh;
  double mass_kg = 0.1;
  Vec3 com = Vec3::Zero();

  /// Uses the solid centroid as the centre of mass.
  static RigidPart from_mesh(TriMesh mesh, double mass_kg);
  /// Largest distance from the centre of mass to a vertex.
  double bounding_radius() const;
};

}  // namespace softjig
