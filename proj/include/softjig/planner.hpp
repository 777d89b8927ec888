#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "softjig/cavity.hpp"
#include "softjig/grasp.hpp"
#include "softjig/stability.hpp"

namespace softjig {

enum class MomentScaleMode { BoundingSphereRadius, Explicit };

struct PlannerConfig {
  double lambda = 0.5;
  double depth_min = 5.0;
  double depth_max = 40.0;
  double depth_step = 1.0;
  double mu_cavity = 1.97;
  int cone_edges = 8;
  MomentScaleMode moment_scale_mode = MomentScaleMode::BoundingSphereRadius;
  double moment_scale = 0.0;  ///< mm, used when the mode is Explicit
  double gravity = kGravity;

  double contact_tol = 0.5;
  std::size_t minkowski_cap = kDefaultMinkowskiCap;
  Vec2 apex_xy = Vec2::Zero();
  CavityOrientation orientation = CavityOrientation::equal_angle();
  double fillet_radius = 0.0;
  int yaw_samples = 4;    ///< rotations about the vertical per resting facet
  int settle_steps = 3;   ///< tipping steps for hypotheses that start unstable

  int grasp_samples = 300;
  double mu_finger = 0.5;
  std::uint64_t seed = 1;

  void validate(const JigSpec& jig) const;
  StabilityParams stability_params() const;
  /// Depth grid: depth_min + k * depth_step up to depth_max, each snapped to kDepthQuantum.
  std::vector<double> depth_grid() const;
};

/// Poses and depths live on a 2^-30 mm grid so the drop offset is exact in binary.
inline constexpr double kDepthQuantum = 1.0 / 1073741824.0;
double quantize_length(double mm);

/// Relative margin difference below which two SPPs count as tied.
inline constexpr double kMarginTieTol = 1e-9;

/// Scores closer than this count as tied in the argmax.
inline constexpr double kScoreTieTol = 1e-12;

/// A resting hypothesis that passed the stability test.
struct PlacementCandidate {
  Pose pose;
  StabilityVerdict verdict;
  double margin = 0.0;  ///< unified margin, see unified_margin()
};

/// Wrench-branch margins are forces (N). Geometric margins d (mm) become the
/// gravity moment about the nearest support edge over rho, m g d / rho, also in N.
double unified_margin(const StabilityVerdict& verdict, const RigidPart& part,
                      const StabilityParams& params);

struct DepthEvaluation {
  double depth = 0.0;
  bool valid = false;  ///< false when no hypothesis was stable at this depth
  double margin = 0.0;
  int grasp_count = 0;
  double margin_norm = 0.0;
  double count_norm = 0.0;
  double score = -std::numeric_limits<double>::infinity();
  StabilityKind kind = StabilityKind::Unstable;
  double raw_margin = 0.0;  ///< N or mm depending on `kind`
  Pose spp;
  std::optional<StabilityVerdict> verdict;
};

struct PlanResult {
  double best_depth = 0.0;
  double lambda = 0.5;
  Pose spp;
  Pose ddp;
  std::vector<DepthEvaluation> sweep;
  Pose stamp_transform;  ///< ^{Cs}T_{Cf} with the source frame at the world origin
  StabilityVerdict verdict_at_best;
  CavitySpec cavity;
  int grasp_total = 0;  ///< antipodal pairs generated for the object
};

/// Resting hypotheses that pass the stability test, most stable first.
/// Throws NoStablePose when none does.
std::vector<PlacementCandidate> candidate_spps(const RigidPart& part, const CavitySpec& cavity,
                                               const PlannerConfig& cfg);

/// Raw M(D) and N_g(D) at the maximum-margin SPP; margin ties go to the larger N_g.
/// Normalisation happens in the sweep.
DepthEvaluation evaluate_depth(const RigidPart& part, double depth, const PlannerConfig& cfg,
                               const GripperSpec& gripper, const JigSpec& jig,
                               const std::vector<GraspCandidate>& grasps);

/// Evaluates every grid depth; invalid depths are kept with valid = false.
std::vector<DepthEvaluation> sweep_depths(const RigidPart& part, const PlannerConfig& cfg,
                                          const GripperSpec& gripper, const JigSpec& jig,
                                          const std::vector<GraspCandidate>& grasps);

/// Min-max normalises over valid depths and scores with `lambda`. Returns the
/// index of D*, ties going to the larger depth. Throws NoStablePose if no depth is valid.
std::size_t score_sweep(std::vector<DepthEvaluation>& sweep, double lambda);

/// SPP raised by twice the cavity depth, rotation untouched.
Pose drop_pose(const Pose& spp, const CavitySpec& cavity);

/// Full plan: grasp generation, sweep, scoring and the output poses.
PlanResult optimize_depth(const RigidPart& part, const PlannerConfig& cfg,
                          const GripperSpec& gripper, const JigSpec& jig);

/// Re-scores an existing sweep for another lambda without re-evaluating depths.
PlanResult plan_from_sweep(const RigidPart& part, std::vector<DepthEvaluation> sweep,
                           const PlannerConfig& cfg, const JigSpec& jig, int grasp_total);

}  // namespace softjig
