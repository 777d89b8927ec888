#include "softjig/registration.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "softjig/kdtree.hpp"

namespace softjig {

void RegistrationParams::validate() const {
  if (ransac_iterations < 1) throw InvalidArgument("ransac_iterations must be positive");
  if (ransac_sample_size < 3) throw InvalidArgument("ransac_sample_size must be at least 3");
  if (icp_max_iterations < 1) throw InvalidArgument("icp_max_iterations must be positive");
  for (double v : {inlier_threshold, icp_convergence, max_correspondence, feature_radius, target_spacing})
    if (!(v > 0.0)) throw InvalidArgument("registration tolerances must be positive");
}

Pose fit_rigid(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size()) throw DimensionMismatch("fit_rigid needs paired points");
  if (src.size() < 3) throw DegenerateInput("fit_rigid needs at least 3 pairs");
  Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= static_cast<double>(src.size());
  cd /= static_cast<double>(dst.size());
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Mat3 r = orthonormalize(svd.matrixV() * d * svd.matrixU().transpose());
  return Pose(r, cd - r * cs);
}

namespace {

constexpr int kDescriptorCandidates = 10;
constexpr int kMaxSeedPoints = 1000;
constexpr int kScorePoints = 500;
constexpr int kRefineRounds = 3;
constexpr double kMinInlierFraction = 0.1;
constexpr double kAngleWeight = 10.0;      // mm per unit of |cos|
constexpr double kCurvatureWeight = 30.0;  // mm per unit of surface variation
constexpr int kBoundaryNeighbours = 16;
constexpr double kBoundaryGap = 0.7 * kPi;  // lattice interiors reach 0.5 pi, open rims about pi

// Rotation-invariant point descriptor: distance to the cloud centroid, |cos| of
// the normal against the centroid ray, and surface variation of the neighbourhood.
Vec3 describe(const KdTree& tree, const Vec3& centroid, int i, double radius) {
  const Vec3& p = tree.point(i);
  auto nb = tree.radius(p, radius);
  if (nb.size() < 5) nb = tree.knn(p, 8);
  Vec3 mean = Vec3::Zero();
  for (const auto& n : nb) mean += tree.point(n.index);
  mean /= static_cast<double>(nb.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& n : nb) {
    Vec3 d = tree.point(n.index) - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  const Vec3 ev = es.eigenvalues().cwiseMax(0.0);
  const double total = ev.sum();
  const double variation = total > 0.0 ? ev[0] / total : 0.0;
  const Vec3 normal = es.eigenvectors().col(0);
  const Vec3 r = p - centroid;
  const double dist = r.norm();
  const double cosang = dist > 1e-9 ? std::abs(normal.dot(r)) / dist : 0.0;
  return {dist, kAngleWeight * cosang, kCurvatureWeight * variation};
}

std::vector<int> sample_indices(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (k >= n) return idx;
  // Partial Fisher-Yates keeps the draw deterministic for a given engine state.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

// A point is on the boundary when its neighbours, projected onto the local
// tangent plane, leave an angular gap wider than kBoundaryGap.
std::vector<char> boundary_mask(const KdTree& tree) {
  std::vector<char> mask(tree.size(), 0);
  std::vector<double> angles;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const Vec3& p = tree.point(static_cast<int>(i));
    const auto nb = tree.knn(p, kBoundaryNeighbours + 1);
    Vec3 mean = Vec3::Zero();
    for (const auto& n : nb) mean += tree.point(n.index);
    mean /= static_cast<double>(nb.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& n : nb) {
      const Vec3 d = tree.point(n.index) - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    const Vec3 u = es.eigenvectors().col(2), v = es.eigenvectors().col(1);
    angles.clear();
    for (const auto& n : nb) {
      const Vec3 d = tree.point(n.index) - p;
      if (d.squaredNorm() > 0.0) angles.push_back(std::atan2(d.dot(v), d.dot(u)));
    }
    if (angles.size() < 3) {
      mask[i] = 1;
      continue;
    }
    std::sort(angles.begin(), angles.end());
    double gap = angles.front() + 2.0 * kPi - angles.back();
    for (std::size_t k = 1; k < angles.size(); ++k) gap = std::max(gap, angles[k] - angles[k - 1]);
    mask[i] = gap > kBoundaryGap;
  }
  return mask;
}

struct Pairs {
  std::vector<Vec3> src, dst;
  double sum_sq = 0.0;
  int within_inlier = 0;
};

// Correspondences within `cap`; pairs landing on a masked target point count
// toward the inlier tally but are left out of the fit and the rmse.
Pairs match(const std::vector<Vec3>& pts, const KdTree& target, const Pose& t, double cap,
            double inlier, const std::vector<char>* skip = nullptr) {
  Pairs out;
  const double cap2 = cap * cap, in2 = inlier * inlier;
  for (const auto& p : pts) {
    const Vec3 q = t.apply(p);
    auto nb = target.nearest(q, std::max(cap, inlier));
    if (nb.index < 0) continue;
    if (nb.dist2 <= in2) ++out.within_inlier;
    if (nb.dist2 > cap2 || (skip && (*skip)[nb.index])) continue;
    out.src.push_back(p);
    out.dst.push_back(target.point(nb.index));
    out.sum_sq += nb.dist2;
  }
  return out;
}

}  // namespace

Pose ransac_align(const PointCloud& source, const PointCloud& target,
                  const RegistrationParams& params, std::uint64_t seed) {
  params.validate();
  const std::size_t need = static_cast<std::size_t>(params.ransac_sample_size);
  if (source.size() < need || target.size() < need)
    throw DegenerateInput("clouds need at least ransac_sample_size points");

  std::mt19937_64 rng(seed);
  const KdTree src_tree(source.points), dst_tree(target.points);
  const Vec3 src_c = source.centroid(), dst_c = target.centroid();

  std::vector<Vec3> dst_desc(target.size());
  for (std::size_t i = 0; i < target.size(); ++i)
    dst_desc[i] = describe(dst_tree, dst_c, static_cast<int>(i), params.feature_radius);
  const KdTree desc_tree(dst_desc);

  const std::vector<int> seeds = sample_indices(source.size(), kMaxSeedPoints, rng);
  std::vector<std::vector<int>> cands(seeds.size());
  for (std::size_t s = 0; s < seeds.size(); ++s)
    for (const auto& nb : desc_tree.knn(describe(src_tree, src_c, seeds[s], params.feature_radius),
                                        kDescriptorCandidates))
      cands[s].push_back(nb.index);

  std::vector<Vec3> score_pts;
  for (int i : sample_indices(source.size(), kScorePoints, rng)) score_pts.push_back(source.points[i]);

  // Consistency tolerance on pairwise distances and the minimum sample spread.
  const double tol = 2.0 * params.inlier_threshold;
  const double min_sep = 4.0 * params.inlier_threshold;
  std::uniform_int_distribution<std::size_t> pick_seed(0, seeds.size() - 1);

  Pose best;
  int best_score = -1;
  double best_residual = 0.0;
  std::vector<Vec3> s_pts, t_pts;
  std::vector<int> ok;
  for (int it = 0; it < params.ransac_iterations; ++it) {
    s_pts.clear();
    t_pts.clear();
    for (std::size_t k = 0; k < need; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < 10 && !placed; ++attempt) {
        const std::size_t s = pick_seed(rng);
        const Vec3& sp = source.points[seeds[s]];
        bool spread = true;
        for (const auto& q : s_pts) spread = spread && (q - sp).norm() >= min_sep;
        if (k == 2 && spread)
          spread = (s_pts[1] - s_pts[0]).cross(sp - s_pts[0]).norm() >= 0.5 * min_sep * min_sep;
        if (!spread) continue;
        ok.clear();
        for (int c : cands[s]) {
          const Vec3& tp = target.points[c];
          bool consistent = true;
          for (std::size_t j = 0; j < s_pts.size() && consistent; ++j)
            consistent = std::abs((tp - t_pts[j]).norm() - (sp - s_pts[j]).norm()) <= tol;
          if (consistent) ok.push_back(c);
        }
        if (ok.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, ok.size() - 1);
        s_pts.push_back(sp);
        t_pts.push_back(target.points[ok[pick(rng)]]);
        placed = true;
      }
      if (!placed) break;
    }
    if (s_pts.size() < need) continue;
    const Pose t = fit_rigid(s_pts, t_pts);
    const Pairs p = match(score_pts, dst_tree, t, params.inlier_threshold, params.inlier_threshold);
    // Equal inlier counts go to the tighter fit.
    if (p.within_inlier > best_score || (p.within_inlier == best_score && p.sum_sq < best_residual)) {
      best_score = p.within_inlier;
      best_residual = p.sum_sq;
      best = t;
    }
  }
  if (best_score < 0) throw NoConsensus("RANSAC found no consistent sample");

  for (int round = 0; round < kRefineRounds; ++round) {
    Pairs p = match(source.points, dst_tree, best, params.inlier_threshold, params.inlier_threshold);
    if (p.src.size() < 3) break;
    best = fit_rigid(p.src, p.dst);
  }
  const Pairs last = match(source.points, dst_tree, best, params.inlier_threshold, params.inlier_threshold);
  const double fraction = static_cast<double>(last.within_inlier) / static_cast<double>(source.size());
  if (fraction < kMinInlierFraction)
    throw NoConsensus("best RANSAC inlier fraction " + std::to_string(fraction) + " is below 0.1");
  return best;
}

RegistrationResult icp_refine(const PointCloud& source, const PointCloud& target, const Pose& init,
                              const RegistrationParams& params) {
  params.validate();
  if (source.empty() || target.empty()) throw DegenerateInput("ICP needs non-empty clouds");
  const KdTree tree(target.points);
  // Rim points of an open scan attract every source point that overhangs the
  // overlap, so pairs ending on them are rejected.
  const std::vector<char> rim = boundary_mask(tree);
  auto rmse_of = [](const Pairs& p) { return std::sqrt(p.sum_sq / static_cast<double>(p.src.size())); };

  Pose current = init;
  Pairs pairs = match(source.points, tree, current, params.max_correspondence, params.inlier_threshold, &rim);
  if (pairs.src.size() < 3) throw NoConsensus("fewer than 3 correspondences within max_correspondence");

  RegistrationResult res;
  res.transform = current;
  res.rmse = res.initial_rmse = rmse_of(pairs);
  res.inlier_fraction = static_cast<double>(pairs.within_inlier) / static_cast<double>(source.size());
  double prev = res.rmse;
  int rising = 0;
  for (int it = 1; it <= params.icp_max_iterations; ++it) {
    current = fit_rigid(pairs.src, pairs.dst);
    pairs = match(source.points, tree, current, params.max_correspondence, params.inlier_threshold, &rim);
    if (pairs.src.size() < 3) throw Diverged("ICP lost its correspondences");
    const double rmse = rmse_of(pairs);
    res.iterations_used = it;
    if (rmse < res.rmse) {
      res.rmse = rmse;
      res.transform = current;
      res.inlier_fraction = static_cast<double>(pairs.within_inlier) / static_cast<double>(source.size());
    }
    if (rmse > prev) {
      if (++rising >= 5) throw Diverged("ICP rmse rose for 5 consecutive iterations");
    } else {
      rising = 0;
      if (prev - rmse < params.icp_convergence) break;
    }
    prev = rmse;
  }
  return res;
}

RegistrationResult shape_error(const PointCloud& generated, const CavitySpec& target_cavity,
                               const RegistrationParams& params, std::uint64_t seed) {
  if (generated.empty()) throw DegenerateInput("generated cloud is empty");
  params.validate();
  const PointCloud target = cavity_point_cloud(target_cavity, params.target_spacing);
  const Pose coarse = ransac_align(generated, target, params, seed);
  RegistrationResult res = icp_refine(generated, target, coarse, params);
  // Every generated point counts toward the shape error, so surface that has
  // no counterpart in the target is not hidden by the correspondence cap.
  const KdTree tree(target.points);
  double sum_sq = 0.0;
  for (const auto& p : generated.points) sum_sq += tree.nearest(res.transform.apply(p)).dist2;
  res.rmse = std::sqrt(sum_sq / static_cast<double>(generated.size()));
  return res;
}

}  // namespace softjig
