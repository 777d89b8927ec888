#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "softjig/cavity.hpp"
#include "softjig/geom.hpp"

namespace softjig {

/// Shape error the hardware evaluation reported as its worst case, mm. Context only.
inline constexpr double kReportedShapeErrorMm = 4.4;

struct RegistrationParams {
  int ransac_iterations = 2000;
  int ransac_sample_size = 3;
  double inlier_threshold = 2.0;     ///< mm
  int icp_max_iterations = 100;
  double icp_convergence = 1e-4;     ///< mm of rmse improvement
  double max_correspondence = 10.0;  ///< mm
  double feature_radius = 8.0;       ///< mm, neighbourhood for normals and curvature
  double target_spacing = 1.0;       ///< mm, sampling pitch of the cavity cloud in shape_error

  void validate() const;
};

struct RegistrationResult {
  Pose transform;              ///< maps source points onto the target
  double rmse = 0.0;           ///< mm, over correspondences within max_correspondence
  double initial_rmse = 0.0;   ///< mm, at the initial transform
  double inlier_fraction = 0.0;  ///< source points within inlier_threshold of the target
  int iterations_used = 0;
};

/// Least-squares rigid motion taking src[i] to dst[i] (Kabsch, reflection-safe).
Pose fit_rigid(std::span<const Vec3> src, std::span<const Vec3> dst);

/// Coarse alignment: 3-point RANSAC over descriptor correspondences, scored by
/// inliers at inlier_threshold (ties go to the lower inlier residual) and
/// refined on the winning inlier set.
/// Throws NoConsensus when the best inlier fraction is below 10%.
Pose ransac_align(const PointCloud& source, const PointCloud& target,
                  const RegistrationParams& params, std::uint64_t seed);

/// Point-to-point ICP from `init`. Pairs whose target point lies on the rim of
/// the target cloud are rejected. Returns the best transform seen, so the
/// reported rmse never exceeds the initial one. Throws Diverged when the rmse
/// rises for 5 consecutive iterations.
RegistrationResult icp_refine(const PointCloud& source, const PointCloud& target, const Pose& init,
                              const RegistrationParams& params);

/// RANSAC then ICP of `generated` against a cloud sampled from the cavity faces.
/// The returned rmse is taken over all generated points at the final transform,
/// without the correspondence cap or rim rejection used during ICP.
RegistrationResult shape_error(const PointCloud& generated, const CavitySpec& target_cavity,
                               const RegistrationParams& params, std::uint64_t seed);

}  // namespace softjig
