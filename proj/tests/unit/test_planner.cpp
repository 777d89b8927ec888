#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <set>

#include "oracles.hpp"
#include "softjig/contact.hpp"
#include "softjig/planner.hpp"
#include "softjig/shapes.hpp"

using namespace softjig;

namespace {

DepthEvaluation synthetic(double depth, double margin, int count, bool valid = true) {
  DepthEvaluation e;
  e.depth = depth;
  e.margin = margin;
  e.grasp_count = count;
  e.valid = valid;
  e.kind = valid ? StabilityKind::GeometricStable : StabilityKind::Unstable;
  e.verdict = StabilityVerdict{};
  return e;
}

// Exhaustive scan written without the planner's normalisation or argmax code.
std::size_t scan_argmax(const std::vector<double>& m, const std::vector<int>& n,
                        const std::vector<bool>& valid, double lambda) {
  double mlo = 1e300, mhi = -1e300;
  double nlo = 1e300, nhi = -1e300;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (valid[i]) {
      mlo = std::min(mlo, m[i]);
      mhi = std::max(mhi, m[i]);
      nlo = std::min(nlo, double(n[i]));
      nhi = std::max(nhi, double(n[i]));
    }
  std::size_t best = m.size();
  double best_score = -1e300;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!valid[i]) continue;
    double mn = mhi - mlo > 1e-9 * std::max(1.0, std::abs(mhi)) ? (m[i] - mlo) / (mhi - mlo) : 1.0;
    double nn = nhi > nlo ? (n[i] - nlo) / (nhi - nlo) : 1.0;
    double s = lambda * nn + (1.0 - lambda) * mn;
    if (best == m.size() || s >= best_score - 1e-12) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

PlannerConfig fast_config() {
  PlannerConfig cfg;
  cfg.grasp_samples = 60;
  return cfg;
}

bool same_bits(const Pose& a, const Pose& b) {
  return std::memcmp(a.rotation().data(), b.rotation().data(), 9 * sizeof(double)) == 0 &&
         std::memcmp(a.translation().data(), b.translation().data(), 3 * sizeof(double)) == 0;
}

std::set<int> contact_faces(const StabilityVerdict& v) {
  std::set<int> out;
  for (const auto& c : v.contacts) out.insert(c.face_id);
  return out;
}

}  // namespace

TEST_CASE("config validation") {
  JigSpec jig;
  PlannerConfig cfg;
  CHECK_NOTHROW(cfg.validate(jig));
  cfg.lambda = 1.5;
  CHECK_THROWS_AS(cfg.validate(jig), InvalidArgument);
  cfg = PlannerConfig{};
  cfg.depth_max = jig.jig_thickness + 1.0;
  CHECK_THROWS_AS(cfg.validate(jig), InvalidArgument);
  cfg = PlannerConfig{};
  cfg.depth_min = cfg.depth_max;
  CHECK_THROWS_AS(cfg.validate(jig), InvalidArgument);
  cfg = PlannerConfig{};
  cfg.depth_step = 0.0;
  CHECK_THROWS_AS(cfg.validate(jig), InvalidArgument);
}

TEST_CASE("depth grid covers the range on the quantum") {
  PlannerConfig cfg;
  auto grid = cfg.depth_grid();
  REQUIRE(grid.size() == 36);
  CHECK(grid.front() == 5.0);
  CHECK(grid.back() == 40.0);
  cfg.depth_step = 35.0 / 49.0;
  grid = cfg.depth_grid();
  REQUIRE(grid.size() == 50);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(grid[i] == quantize_length(grid[i]));
    CHECK(grid[i] == doctest::Approx(5.0 + i * 35.0 / 49.0).epsilon(1e-9));
    CHECK(grid[i] <= 40.0);
  }
}

TEST_CASE("drop pose: translation by twice the depth, rotation untouched") {
  JigSpec jig;
  CavitySpec cavity = build_cavity(20.0, Vec2::Zero(), CavityOrientation::equal_angle(), 0.0, jig);
  Pose spp = Pose(Pose::from_axis_angle(Vec3(1, 2, 3), 0.7).rotation(), Vec3(1.5, -2.25, quantize_length(-7.3)));
  Pose ddp = drop_pose(spp, cavity);
  CHECK(ddp.translation().z() - spp.translation().z() == 40.0);
  CHECK(ddp.translation().x() == spp.translation().x());
  CHECK(ddp.translation().y() == spp.translation().y());
  CHECK(std::memcmp(ddp.rotation().data(), spp.rotation().data(), 9 * sizeof(double)) == 0);
  CHECK(drop_pose(ddp, cavity).translation().z() - spp.translation().z() == 80.0);
}

TEST_CASE("score: lambda extremes pick the single-term argmax") {
  std::vector<DepthEvaluation> sweep{synthetic(5, 0.1, 30), synthetic(6, 0.4, 10), synthetic(7, 0.2, 20)};
  CHECK(score_sweep(sweep, 1.0) == 0);
  CHECK(score_sweep(sweep, 0.0) == 1);
  for (const auto& e : sweep) {
    CHECK(e.score >= 0.0);
    CHECK(e.score <= 1.0);
    CHECK(e.score == doctest::Approx(0.0 * e.count_norm + 1.0 * e.margin_norm));
  }
  CHECK(sweep[0].count_norm == 1.0);
  CHECK(sweep[1].count_norm == 0.0);
  CHECK(sweep[1].margin_norm == 1.0);
}

TEST_CASE("score: ties go to the deeper grid point") {
  std::vector<DepthEvaluation> sweep{synthetic(5, 0.3, 10), synthetic(6, 0.3, 10), synthetic(7, 0.1, 5)};
  CHECK(score_sweep(sweep, 0.5) == 1);
  std::vector<DepthEvaluation> flat{synthetic(5, 0.2, 7), synthetic(6, 0.2, 7), synthetic(7, 0.2, 7)};
  CHECK(score_sweep(flat, 0.3) == 2);
  for (const auto& e : flat) {
    CHECK(e.margin_norm == 1.0);
    CHECK(e.count_norm == 1.0);
  }
}

TEST_CASE("score: invalid depths are never selected") {
  std::vector<DepthEvaluation> sweep{synthetic(5, 9.0, 99, false), synthetic(6, 0.1, 3), synthetic(7, 0.2, 1)};
  for (double lambda : {0.0, 0.5, 1.0}) CHECK(score_sweep(sweep, lambda) != 0);
  CHECK(sweep[0].score == -std::numeric_limits<double>::infinity());
  std::vector<DepthEvaluation> none{synthetic(5, 0.1, 3, false)};
  CHECK_THROWS_AS(score_sweep(none, 0.5), NoStablePose);
  CHECK_THROWS_AS(score_sweep(sweep, -0.1), InvalidArgument);
}

TEST_CASE("score: argmax is invariant to scaling the margins") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> c(0, 200);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DepthEvaluation> a, b;
    const double scale = 0.01 + 100.0 * u(rng);
    for (int i = 0; i < 12; ++i) {
      double m = u(rng);
      int n = c(rng);
      a.push_back(synthetic(5 + i, m, n));
      b.push_back(synthetic(5 + i, m * scale, n));
    }
    const double lambda = u(rng);
    CHECK(score_sweep(a, lambda) == score_sweep(b, lambda));
  }
}

TEST_CASE("score matches the exhaustive scan on random sweeps") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<DepthEvaluation> sweep;
    std::vector<double> m;
    std::vector<int> n;
    std::vector<bool> valid;
    for (int i = 0; i < 50; ++i) {
      // Coarse values so ties are common.
      m.push_back(std::floor(u(rng) * 4.0) * 0.25);
      n.push_back(static_cast<int>(u(rng) * 5.0));
      valid.push_back(u(rng) > 0.1);
      sweep.push_back(synthetic(5 + i, m.back(), n.back(), valid.back()));
    }
    if (std::none_of(valid.begin(), valid.end(), [](bool v) { return v; })) continue;
    for (double lambda : {0.0, 0.3, 0.5, 0.7, 1.0}) CHECK(score_sweep(sweep, lambda) == scan_argmax(m, n, valid, lambda));
  }
}

TEST_CASE("candidates: cube over a shallow cavity rests flat") {
  JigSpec jig;
  RigidPart cube = RigidPart::from_mesh(make_box(Vec3::Constant(40.0)), 0.08);
  CavitySpec cavity = build_cavity(5.0, Vec2::Zero(), CavityOrientation::equal_angle(), 0.0, jig);
  PlannerConfig cfg;
  auto cands = candidate_spps(cube, cavity, cfg);
  REQUIRE(cands.size() >= 6);
  const Pose& best = cands.front().pose;
  // One body axis points straight down and the bottom face lies on the membrane.
  double best_dot = 0.0;
  for (int i = 0; i < 3; ++i) best_dot = std::max(best_dot, std::abs(best.rotation().col(i).z()));
  CHECK(best_dot == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(best.translation().z() == doctest::Approx(cavity.rim_height + 20.0).epsilon(1e-9));
  CHECK(cands.front().verdict.kind != StabilityKind::Unstable);
  for (std::size_t i = 1; i < cands.size(); ++i) CHECK(cands[i - 1].margin >= cands[i].margin);
}

TEST_CASE("candidates: sphere seats tangent to the three faces") {
  JigSpec jig;
  const double r = 5.0;
  RigidPart ball = RigidPart::from_mesh(make_sphere(r, 300), 0.01);
  CavitySpec cavity = build_cavity(20.0, Vec2(3.0, -2.0), CavityOrientation::equal_angle(), 0.0, jig);
  PlannerConfig cfg;
  cfg.yaw_samples = 1;
  auto cands = candidate_spps(ball, cavity, cfg);
  // Tangent to face i means e_i . (c - apex) = r, so c = apex + r (e0 + e1 + e2).
  const Vec3 expected = cavity.apex + r * (cavity.axis(0) + cavity.axis(1) + cavity.axis(2));
  const Vec3 centre = cands.front().pose.apply(ball.com);
  // The tessellated ball sits lower than the true sphere by at most its chord sag.
  CHECK((centre - expected).head<2>().norm() < 0.3);
  CHECK(std::abs(centre.z() - expected.z()) < 0.3);
  CHECK(contact_faces(cands.front().verdict) == std::set<int>{0, 1, 2});
}

TEST_CASE("candidates: small part seats at the apex on three faces") {
  JigSpec jig;
  RigidPart cube = RigidPart::from_mesh(make_box(Vec3::Constant(6.0)), 0.002);
  CavitySpec cavity = build_cavity(25.0, Vec2::Zero(), CavityOrientation::equal_angle(), 0.0, jig);
  auto cands = candidate_spps(cube, cavity, PlannerConfig{});
  const auto& best = cands.front();
  CHECK(contact_faces(best.verdict) == std::set<int>{0, 1, 2});
  CHECK(best.pose.apply(cube.com).z() < cavity.rim_height - 10.0);
  CHECK(vertical_clearance(cube.mesh, best.pose, cavity) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("no stable hypothesis: heavy part with its COM off every facet") {
  JigSpec jig;
  RigidPart odd = RigidPart::from_mesh(make_box(Vec3::Constant(10.0)), 100.0);
  // Off-diagonal COM: every face-down rest leaves it far outside the footprint.
  odd.com = Vec3(200.0, 200.0, 200.0);
  CavitySpec cavity = build_cavity(10.0, Vec2::Zero(), CavityOrientation::equal_angle(), 0.0, jig);
  PlannerConfig cfg;
  cfg.settle_steps = 0;
  CHECK_THROWS_AS(candidate_spps(odd, cavity, cfg), NoStablePose);
  GripperSpec gripper;
  auto e = evaluate_depth(odd, 10.0, cfg, gripper, jig, {});
  CHECK_FALSE(e.valid);
  CHECK(e.score == -std::numeric_limits<double>::infinity());
  cfg.depth_min = 10.0;
  cfg.depth_max = 12.0;
  cfg.grasp_samples = 10;
  CHECK_THROWS_AS(optimize_depth(odd, cfg, gripper, jig), NoStablePose);
}

TEST_CASE("singleton sweep: the only depth wins for every lambda") {
  JigSpec jig;
  GripperSpec gripper;
  RigidPart cube = RigidPart::from_mesh(make_box(Vec3::Constant(20.0)), 0.01);
  PlannerConfig cfg = fast_config();
  cfg.depth_min = 12.0;
  cfg.depth_max = 14.0;
  cfg.depth_step = 5.0;
  for (double lambda : {0.0, 0.5, 1.0}) {
    cfg.lambda = lambda;
    auto plan = optimize_depth(cube, cfg, gripper, jig);
    REQUIRE(plan.sweep.size() == 1);
    CHECK(plan.best_depth == 12.0);
    CHECK(plan.sweep[0].score == 1.0);
  }
}

TEST_CASE("optimize_depth agrees with an exhaustive scan over 50 depths") {
  JigSpec jig;
  GripperSpec gripper;
  RigidPart cube = RigidPart::from_mesh(make_box(Vec3::Constant(20.0)), 0.01);
  PlannerConfig cfg = fast_config();
  cfg.depth_step = (cfg.depth_max - cfg.depth_min) / 49.0;
  const PlanResult plan = optimize_depth(cube, cfg, gripper, jig);
  REQUIRE(plan.sweep.size() == 50);

  // Oracle: its own grid, per-depth evaluation from the candidate list, own argmax.
  auto grasps = generate_grasps(cube.mesh, gripper, cfg.mu_finger, cfg.grasp_samples, cfg.seed);
  std::vector<double> depths, m;
  std::vector<int> n;
  std::vector<bool> valid;
  for (int i = 0; i < 50; ++i) {
    const double d = quantize_length(cfg.depth_min + i * (cfg.depth_max - cfg.depth_min) / 49.0);
    depths.push_back(d);
    CavitySpec cavity = build_cavity(d, cfg.apex_xy, cfg.orientation, 0.0, jig);
    std::vector<PlacementCandidate> cands;
    try {
      cands = candidate_spps(cube, cavity, cfg);
    } catch (const NoStablePose&) {
      m.push_back(0.0);
      n.push_back(0);
      valid.push_back(false);
      continue;
    }
    double top = -1e300;
    for (const auto& c : cands) top = std::max(top, c.margin);
    // Among margin ties the first candidate with the most feasible grasps.
    int count = -1;
    double margin = 0.0;
    for (const auto& c : cands)
      if (c.margin >= top - 1e-9 * std::max(1.0, std::abs(top))) {
        int k = count_feasible(cube.mesh, c.pose, cavity, jig, gripper, grasps);
        if (k > count) {
          count = k;
          margin = c.margin;
        }
      }
    m.push_back(margin);
    n.push_back(count);
    valid.push_back(true);
  }
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(plan.sweep[i].depth == depths[i]);
    CHECK(plan.sweep[i].valid == valid[i]);
    CHECK(plan.sweep[i].margin == m[i]);
    CHECK(plan.sweep[i].grasp_count == n[i]);
  }
  for (double lambda : {0.0, 0.3, 0.5, 0.7, 1.0}) {
    PlannerConfig c = cfg;
    c.lambda = lambda;
    PlanResult p = plan_from_sweep(cube, plan.sweep, c, jig, plan.grasp_total);
    CHECK(p.best_depth == depths[scan_argmax(m, n, valid, lambda)]);
    CHECK(p.ddp.translation().z() - p.spp.translation().z() == 2.0 * p.best_depth);
    CHECK(same_bits(Pose(p.ddp.rotation(), Vec3::Zero()), Pose(p.spp.rotation(), Vec3::Zero())));
  }
}

TEST_CASE("optimize_depth is deterministic") {
  JigSpec jig;
  GripperSpec gripper;
  RigidPart cube = RigidPart::from_mesh(make_box(Vec3(12.0, 16.0, 20.0)), 0.01);
  PlannerConfig cfg = fast_config();
  cfg.depth_max = 25.0;
  cfg.depth_step = 10.0;
  auto a = optimize_depth(cube, cfg, gripper, jig);
  auto b = optimize_depth(cube, cfg, gripper, jig);
  REQUIRE(a.sweep.size() == b.sweep.size());
  CHECK(a.best_depth == b.best_depth);
  CHECK(same_bits(a.spp, b.spp));
  CHECK(same_bits(a.ddp, b.ddp));
  for (std::size_t i = 0; i < a.sweep.size(); ++i) {
    CHECK(a.sweep[i].margin == b.sweep[i].margin);
    CHECK(a.sweep[i].grasp_count == b.sweep[i].grasp_count);
    CHECK(a.sweep[i].score == b.sweep[i].score);
  }
}
