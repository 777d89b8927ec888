#include "softjig/geom.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace softjig {

namespace {

constexpr double kRotationTol = 1e-9;

double orthonormality_error(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace

Mat3 orthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite())
    throw InvalidArgument("pose contains non-finite values");
  if (orthonormality_error(rotation) > kRotationTol ||
      std::abs(rotation.determinant() - 1.0) > kRotationTol)
    throw InvalidArgument("rotation is not orthonormal with determinant +1");
}

Pose Pose::from_axis_angle(const Vec3& axis, double angle_rad, const Vec3& translation) {
  if (axis.norm() == 0.0) throw InvalidArgument("zero rotation axis");
  Mat3 r = Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
  return Pose(orthonormalize(r), translation);
}

Pose Pose::from_rpy(double roll, double pitch, double yaw, const Vec3& translation) {
  Mat3 r = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
            Eigen::AngleAxisd(roll, Vec3::UnitX()))
               .toRotationMatrix();
  return Pose(orthonormalize(r), translation);
}

Pose Pose::inverse() const {
  Mat3 rt = rotation_.transpose();
  return Pose(Unchecked{}, rt, -(rt * translation_));
}

bool Pose::is_valid(double tol) const {
  return orthonormality_error(rotation_) <= tol &&
         std::abs(rotation_.determinant() - 1.0) <= tol && translation_.allFinite();
}

double Pose::rotation_angle_between(const Pose& a, const Pose& b) {
  Mat3 rel = a.rotation().transpose() * b.rotation();
  double c = std::clamp((rel.trace() - 1.0) * 0.5, -1.0, 1.0);
  // acos loses precision near zero; recover the angle from the skew part there.
  Vec3 skew(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  double s = 0.5 * skew.norm();
  return std::atan2(s, c);
}

Pose compose(const Pose& a, const Pose& b) {
  Mat3 r = a.rotation_ * b.rotation_;
  if (orthonormality_error(r) > kRotationTol) r = orthonormalize(r);
  return Pose(Pose::Unchecked{}, r, a.rotation_ * b.translation_ + a.translation_);
}

// ---------------------------------------------------------------------------

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int n = static_cast<int>(vertices_.size());
  for (std::size_t i = 0; i < triangles_.size(); ++i) {
    for (int idx : triangles_[i]) {
      if (idx < 0 || idx >= n)
        throw InvalidArgument("triangle " + std::to_string(i) + " has index out of range");
    }
    if (triangle_area(i) < kMinTriangleArea)
      throw InvalidArgument("triangle " + std::to_string(i) + " has zero area");
  }
}

Vec3 TriMesh::triangle_normal(std::size_t i) const {
  const auto& t = triangles_[i];
  Vec3 n = (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]);
  return n.normalized();
}

double TriMesh::triangle_area(std::size_t i) const {
  const auto& t = triangles_[i];
  return 0.5 * (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]).norm();
}

double TriMesh::surface_area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < triangles_.size(); ++i) a += triangle_area(i);
  return a;
}

double TriMesh::volume() const {
  double v = 0.0;
  for (const auto& t : triangles_)
    v += vertices_[t[0]].dot(vertices_[t[1]].cross(vertices_[t[2]]));
  return v / 6.0;
}

Vec3 TriMesh::centroid() const {
  double vol = 0.0;
  Vec3 acc = Vec3::Zero();
  for (const auto& t : triangles_) {
    const Vec3& a = vertices_[t[0]];
    const Vec3& b = vertices_[t[1]];
    const Vec3& c = vertices_[t[2]];
    double v = a.dot(b.cross(c)) / 6.0;
    vol += v;
    acc += v * (a + b + c) / 4.0;
  }
  if (std::abs(vol) > 1e-12 && is_watertight()) return acc / vol;
  double area = 0.0;
  acc.setZero();
  for (std::size_t i = 0; i < triangles_.size(); ++i) {
    const auto& t = triangles_[i];
    double w = triangle_area(i);
    area += w;
    acc += w * (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
  }
  if (area <= 0.0) throw DegenerateInput("mesh has no area");
  return acc / area;
}

std::pair<Vec3, Vec3> TriMesh::bounds() const {
  if (vertices_.empty()) throw DegenerateInput("empty mesh");
  Vec3 lo = vertices_.front(), hi = vertices_.front();
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

TriMesh TriMesh::transformed(const Pose& pose) const {
  TriMesh out;
  out.vertices_.reserve(vertices_.size());
  for (const auto& v : vertices_) out.vertices_.push_back(pose.apply(v));
  out.triangles_ = triangles_;
  return out;
}

bool TriMesh::is_watertight() const {
  if (triangles_.empty()) return false;
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : triangles_) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      ++edge_count[{std::min(a, b), std::max(a, b)}];
    }
  }
  return std::all_of(edge_count.begin(), edge_count.end(),
                     [](const auto& kv) { return kv.second == 2; });
}

// ---------------------------------------------------------------------------

Vec3 PointCloud::centroid() const {
  if (points.empty()) throw DegenerateInput("empty point cloud");
  Vec3 c = Vec3::Zero();
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

PointCloud PointCloud::transformed(const Pose& pose) const {
  PointCloud out;
  out.points.reserve(points.size());
  for (const auto& p : points) out.points.push_back(pose.apply(p));
  return out;
}

RigidPart RigidPart::from_mesh(TriMesh mesh, double mass_kg) {
  if (!(mass_kg > 0.0)) throw InvalidArgument("mass must be positive");
  RigidPart part;
  part.com = mesh.centroid();
  part.mesh = std::move(mesh);
  part.mass_kg = mass_kg;
  return part;
}

double RigidPart::bounding_radius() const {
  double r = 0.0;
  for (const auto& v : mesh.vertices()) r = std::max(r, (v - com).norm());
  return r;
}

}  // namespace softjig
