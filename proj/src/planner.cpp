#include "softjig/planner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "softjig/hull.hpp"

namespace softjig {

double quantize_length(double mm) { return std::round(mm / kDepthQuantum) * kDepthQuantum; }

void PlannerConfig::validate(const JigSpec& jig) const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0, 1]");
  if (!(depth_min > 0.0)) throw InvalidArgument("depth_min must be positive");
  if (!(depth_max > depth_min)) throw InvalidArgument("depth_max must exceed depth_min");
  if (depth_max > jig.jig_thickness) throw InvalidArgument("depth_max exceeds the jig thickness");
  if (!(depth_step > 0.0)) throw InvalidArgument("depth_step must be positive");
  if (!(mu_cavity >= 0.0)) throw InvalidArgument("mu_cavity must be >= 0");
  if (cone_edges < 3) throw InvalidArgument("cone_edges must be at least 3");
  if (moment_scale_mode == MomentScaleMode::Explicit && !(moment_scale > 0.0))
    throw InvalidArgument("explicit moment scale must be positive");
  if (!(gravity > 0.0)) throw InvalidArgument("gravity must be positive");
  if (!(contact_tol > 0.0)) throw InvalidArgument("contact_tol must be positive");
  if (yaw_samples < 1) throw InvalidArgument("yaw_samples must be at least 1");
  if (settle_steps < 0) throw InvalidArgument("settle_steps must be >= 0");
  if (grasp_samples < 1) throw InvalidArgument("grasp_samples must be at least 1");
  if (!(mu_finger >= 0.0)) throw InvalidArgument("mu_finger must be >= 0");
  if (!(fillet_radius >= 0.0)) throw InvalidArgument("fillet_radius must be >= 0");
}

StabilityParams PlannerConfig::stability_params() const {
  StabilityParams p;
  p.mu = mu_cavity;
  p.cone_edges = cone_edges;
  p.contact_tol = contact_tol;
  p.moment_scale = moment_scale_mode == MomentScaleMode::Explicit ? moment_scale : 0.0;
  p.minkowski_cap = minkowski_cap;
  p.gravity = gravity;
  return p;
}

std::vector<double> PlannerConfig::depth_grid() const {
  const double top = std::floor(depth_max / kDepthQuantum) * kDepthQuantum;
  const int n = static_cast<int>(std::floor((depth_max - depth_min) / depth_step + 1e-9));
  std::vector<double> out;
  for (int k = 0; k <= n; ++k) out.push_back(std::min(quantize_length(depth_min + k * depth_step), top));
  return out;
}

double unified_margin(const StabilityVerdict& verdict, const RigidPart& part,
                      const StabilityParams& params) {
  if (verdict.kind == StabilityKind::WrenchStable) return verdict.margin;
  return verdict.margin * part.mass_kg * params.gravity / params.resolve_moment_scale(part);
}

namespace {

std::vector<Vec3> resting_normals(const TriMesh& mesh) {
  std::vector<VecX> pts;
  for (const auto& v : mesh.vertices()) pts.emplace_back(v);
  auto hull = convex_hull_facets(pts, 3);
  std::vector<Vec3> out;
  std::set<std::array<long long, 3>> seen;
  for (const auto& h : hull.planes) {
    Vec3 n = Vec3(h.normal[0], h.normal[1], h.normal[2]).normalized();
    std::array<long long, 3> key{std::llround(n.x() * 1e6), std::llround(n.y() * 1e6),
                                 std::llround(n.z() * 1e6)};
    if (seen.insert(key).second) out.push_back(n);
  }
  return out;
}

Pose rotate_about(const Pose& pose, const Vec3& pivot, const Vec3& axis, double angle) {
  Pose r = Pose::from_axis_angle(axis, angle);
  Pose shift = compose(Pose::from_translation(pivot), compose(r, Pose::from_translation(-pivot)));
  return compose(shift, pose);
}

Pose snap(const Pose& p) {
  Vec3 t = p.translation();
  t.z() = quantize_length(t.z());
  return Pose(p.rotation(), t);
}

// One quasi-static tipping step about the support edge nearest the COM. Returns
// nullopt when no progress is possible.
std::optional<Pose> tip_once(const RigidPart& part, const Pose& pose, const CavitySpec& cavity,
                             const StabilityVerdict& verdict) {
  if (!verdict.support_polygon || verdict.contacts.empty()) return std::nullopt;
  const auto& poly = verdict.support_polygon->vertices;
  const Vec3 com = pose.apply(part.com);
  const Vec2 g(com.x(), com.y());
  Vec2 a = poly.empty() ? Vec2(verdict.contacts.front().position.head<2>()) : poly.front();
  Vec2 b = a;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t edges = poly.size() < 2 ? 0 : (poly.size() == 2 ? 1 : poly.size());
  for (std::size_t i = 0; i < edges; ++i) {
    Vec2 p = poly[i], q = poly[(i + 1) % poly.size()];
    Vec2 e = q - p;
    double t = std::clamp((g - p).dot(e) / e.squaredNorm(), 0.0, 1.0);
    double d = (g - (p + t * e)).norm();
    if (d < best) {
      best = d;
      a = p;
      b = q;
    }
  }
  Vec3 axis;
  if ((b - a).norm() > 1e-9) {
    axis = Vec3(b.x() - a.x(), b.y() - a.y(), 0.0).normalized();
  } else {
    Vec2 r = g - a;
    if (r.norm() < 1e-9) return std::nullopt;
    axis = Vec3(-r.y(), r.x(), 0.0).normalized();
  }
  // Pivot height from the contact nearest to a.
  Vec3 pivot(a.x(), a.y(), verdict.contacts.front().position.z());
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& c : verdict.contacts) {
    double d = (c.position.head<2>() - a).norm();
    if (d < nearest) {
      nearest = d;
      pivot.z() = c.position.z();
    }
  }
  if (axis.cross(com - pivot).z() > 0.0) axis = -axis;

  const double scale = std::max(1.0, part.bounding_radius());
  auto penetrates = [&](double ang) {
    return vertical_clearance(part.mesh, rotate_about(pose, pivot, axis, ang), cavity) < -1e-6 * scale;
  };
  const double step = deg2rad(2.0);
  double lo = 0.0, hi = -1.0;
  for (double ang = step; ang <= kPi / 2 + 1e-12; ang += step) {
    if (penetrates(ang)) {
      hi = ang;
      break;
    }
    lo = ang;
  }
  if (hi > 0.0)
    for (int it = 0; it < 20; ++it) {
      double mid = 0.5 * (lo + hi);
      (penetrates(mid) ? hi : lo) = mid;
    }
  if (lo < 1e-6) return std::nullopt;
  return lower_onto_jig(part.mesh, rotate_about(pose, pivot, axis, lo), cavity);
}

}  // namespace

std::vector<PlacementCandidate> candidate_spps(const RigidPart& part, const CavitySpec& cavity,
                                               const PlannerConfig& cfg) {
  const StabilityParams params = cfg.stability_params();
  const Vec3 ref = cavity.axis(0);
  const double yaw0 = std::atan2(ref.y(), ref.x());
  const double lift = cavity.rim_height + 2.0 * part.bounding_radius() + 10.0;

  std::vector<PlacementCandidate> out;
  for (const Vec3& n : resting_normals(part.mesh)) {
    const Mat3 down = Eigen::Quaterniond::FromTwoVectors(n, -Vec3::UnitZ()).toRotationMatrix();
    for (int k = 0; k < cfg.yaw_samples; ++k) {
      const Mat3 rot = Pose::rot_z(yaw0 + 2.0 * kPi * k / cfg.yaw_samples).rotation() * down;
      const Vec3 c = rot * part.com;
      Pose pose(orthonormalize(rot), Vec3(cavity.apex.x() - c.x(), cavity.apex.y() - c.y(), lift - c.z()));
      pose = snap(lower_onto_jig(part.mesh, pose, cavity));
      try {
        for (int step = 0;; ++step) {
          StabilityVerdict v = spp_test(part, pose, cavity, params);
          if (v.kind != StabilityKind::Unstable) {
            double m = unified_margin(v, part, params);
            out.push_back({pose, std::move(v), m});
            break;
          }
          if (step >= cfg.settle_steps) break;
          auto next = tip_once(part, pose, cavity, v);
          if (!next) break;
          pose = snap(*next);
        }
      } catch (const NoContacts&) {
      } catch (const PenetrationTooDeep&) {
      }
    }
  }
  if (out.empty()) throw NoStablePose("no resting hypothesis is stable at depth " + std::to_string(cavity.depth));
  std::stable_sort(out.begin(), out.end(),
                   [](const PlacementCandidate& a, const PlacementCandidate& b) { return a.margin > b.margin; });
  return out;
}

DepthEvaluation evaluate_depth(const RigidPart& part, double depth, const PlannerConfig& cfg,
                               const GripperSpec& gripper, const JigSpec& jig,
                               const std::vector<GraspCandidate>& grasps) {
  if (depth < cfg.depth_min - 1e-9 || depth > cfg.depth_max + 1e-9)
    throw InvalidArgument("depth outside [depth_min, depth_max]");
  CavitySpec cavity = build_cavity(depth, cfg.apex_xy, cfg.orientation, cfg.fillet_radius, jig);
  DepthEvaluation e;
  e.depth = depth;
  std::vector<PlacementCandidate> cands;
  try {
    cands = candidate_spps(part, cavity, cfg);
  } catch (const NoStablePose&) {
    return e;
  }
  // Candidates tied on margin (symmetric rests) are separated by N_g.
  const double tie = kMarginTieTol * std::max(1.0, std::abs(cands.front().margin));
  const PlacementCandidate* best = nullptr;
  int best_count = -1;
  for (const auto& c : cands) {
    if (c.margin < cands.front().margin - tie) break;
    const int n = count_feasible(part.mesh, c.pose, cavity, jig, gripper, grasps);
    if (n > best_count) {
      best = &c;
      best_count = n;
    }
  }
  e.valid = true;
  e.margin = best->margin;
  e.kind = best->verdict.kind;
  e.raw_margin = best->verdict.margin;
  e.spp = best->pose;
  e.verdict = best->verdict;
  e.grasp_count = best_count;
  return e;
}

std::vector<DepthEvaluation> sweep_depths(const RigidPart& part, const PlannerConfig& cfg,
                                          const GripperSpec& gripper, const JigSpec& jig,
                                          const std::vector<GraspCandidate>& grasps) {
  std::vector<DepthEvaluation> out;
  for (double d : cfg.depth_grid()) out.push_back(evaluate_depth(part, d, cfg, gripper, jig, grasps));
  return out;
}

std::size_t score_sweep(std::vector<DepthEvaluation>& sweep, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0, 1]");
  double m_lo = std::numeric_limits<double>::infinity(), m_hi = -m_lo;
  int n_lo = std::numeric_limits<int>::max(), n_hi = std::numeric_limits<int>::min();
  for (const auto& e : sweep) {
    if (!e.valid) continue;
    m_lo = std::min(m_lo, e.margin);
    m_hi = std::max(m_hi, e.margin);
    n_lo = std::min(n_lo, e.grasp_count);
    n_hi = std::max(n_hi, e.grasp_count);
  }
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    auto& e = sweep[i];
    if (!e.valid) {
      e.margin_norm = e.count_norm = 0.0;
      e.score = -std::numeric_limits<double>::infinity();
      continue;
    }
    e.margin_norm = m_hi - m_lo > kMarginTieTol * std::max(1.0, std::abs(m_hi))
                        ? (e.margin - m_lo) / (m_hi - m_lo)
                        : 1.0;
    e.count_norm = n_hi > n_lo ? double(e.grasp_count - n_lo) / double(n_hi - n_lo) : 1.0;
    e.score = lambda * e.count_norm + (1.0 - lambda) * e.margin_norm;
    // Ties, up to round-off, go to the later and deeper grid point.
    if (!best || e.score >= sweep[*best].score - kScoreTieTol) best = i;
  }
  if (!best) throw NoStablePose("no depth in the sweep admits a stable placement");
  return *best;
}

Pose drop_pose(const Pose& spp, const CavitySpec& cavity) {
  Vec3 t = spp.translation();
  t.z() += 2.0 * cavity.depth;
  return Pose(spp.rotation(), t);
}

PlanResult plan_from_sweep(const RigidPart& part, std::vector<DepthEvaluation> sweep,
                           const PlannerConfig& cfg, const JigSpec& jig, int grasp_total) {
  (void)part;
  PlanResult r;
  r.lambda = cfg.lambda;
  const std::size_t best = score_sweep(sweep, cfg.lambda);
  r.sweep = std::move(sweep);
  const DepthEvaluation& e = r.sweep[best];
  r.best_depth = e.depth;
  r.cavity = build_cavity(e.depth, cfg.apex_xy, cfg.orientation, cfg.fillet_radius, jig);
  r.spp = e.spp;
  r.ddp = drop_pose(e.spp, r.cavity);
  r.verdict_at_best = *e.verdict;
  r.stamp_transform = stamp_transform(r.cavity, Pose());
  r.grasp_total = grasp_total;
  return r;
}

PlanResult optimize_depth(const RigidPart& part, const PlannerConfig& cfg,
                          const GripperSpec& gripper, const JigSpec& jig) {
  jig.validate();
  gripper.validate();
  cfg.validate(jig);
  auto grasps = generate_grasps(part.mesh, gripper, cfg.mu_finger, cfg.grasp_samples, cfg.seed);
  std::set<int> pairs;
  for (const auto& g : grasps) pairs.insert(g.pair_id);
  auto sweep = sweep_depths(part, cfg, gripper, jig, grasps);
  return plan_from_sweep(part, std::move(sweep), cfg, jig, static_cast<int>(pairs.size()));
}

}  // namespace softjig
