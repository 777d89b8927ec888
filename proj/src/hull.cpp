#include "softjig/hull.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>

namespace softjig {

namespace {

using MatX = Eigen::MatrixXd;

// Uniform scaling into the unit box keeps Euclidean geometry (and the epsilon) isotropic.
struct UnitBox {
  VecX lo;
  double scale = 1.0;

  VecX to_unit(const VecX& p) const { return (p - lo) / scale; }
  VecX to_world(const VecX& u) const { return u * scale + lo; }
  Halfspace to_world(const VecX& n, double offset) const {
    return {n, offset * scale + n.dot(lo)};
  }
};

UnitBox make_unit_box(std::span<const VecX> points, int d) {
  UnitBox box;
  box.lo = points.front();
  VecX hi = points.front();
  for (const auto& p : points) {
    if (p.size() != d) throw DimensionMismatch("point has dimension " + std::to_string(p.size()) +
                                               ", expected " + std::to_string(d));
    if (!p.allFinite()) throw InvalidArgument("non-finite point coordinate");
    box.lo = box.lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double extent = (hi - box.lo).maxCoeff();
  box.scale = extent > 0.0 ? extent : 1.0;
  return box;
}

// Greedy affine basis: repeatedly add the point furthest from the current span.
struct AffineFrame {
  VecX origin;
  MatX basis;  // d x r, orthonormal columns
  std::vector<int> chosen;
  int rank() const { return static_cast<int>(basis.cols()); }
};

AffineFrame affine_frame(const std::vector<VecX>& pts, int d, double eps) {
  AffineFrame frame;
  int first = 0;
  for (int i = 1; i < static_cast<int>(pts.size()); ++i) {
    if (pts[i][0] < pts[first][0]) first = i;
  }
  frame.origin = pts[first];
  frame.chosen.push_back(first);
  frame.basis.resize(d, 0);
  while (frame.rank() < d) {
    double best = -1.0;
    int best_i = -1;
    VecX best_r;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      VecX r = pts[i] - frame.origin;
      if (frame.rank() > 0) r -= frame.basis * (frame.basis.transpose() * r);
      double n = r.norm();
      if (n > best) {
        best = n;
        best_i = i;
        best_r = std::move(r);
      }
    }
    if (best <= eps) break;
    // One re-orthogonalisation pass for stability.
    if (frame.rank() > 0) best_r -= frame.basis * (frame.basis.transpose() * best_r);
    best_r.normalize();
    frame.basis.conservativeResize(d, frame.rank() + 1);
    frame.basis.col(frame.rank() - 1) = best_r;
    frame.chosen.push_back(best_i);
  }
  return frame;
}

// Incremental facet-based hull (quickhull) for full-dimensional point sets in R^d, d >= 2.
class QuickHull {
 public:
  struct Facet {
    std::vector<int> verts;
    std::vector<int> neighbors;  // neighbors[j] is across the ridge opposite verts[j]
    VecX normal;
    double offset = 0.0;
    std::vector<int> outside;
    int furthest = -1;
    double furthest_dist = 0.0;
    bool alive = true;
    unsigned visible_mark = 0;
    unsigned checked_mark = 0;
  };

  QuickHull(const std::vector<VecX>& pts, int d, double eps, const std::vector<int>& simplex)
      : pts_(pts), d_(d), eps_(eps) {
    interior_ = VecX::Zero(d);
    for (int i : simplex) interior_ += pts_[i];
    interior_ /= static_cast<double>(simplex.size());

    for (int i = 0; i <= d_; ++i) {
      std::vector<int> verts;
      for (int j = 0; j <= d_; ++j)
        if (j != i) verts.push_back(simplex[j]);
      Facet f = make_facet(std::move(verts));
      f.neighbors.resize(d_);
      int slot = 0;
      for (int j = 0; j <= d_; ++j)
        if (j != i) f.neighbors[slot++] = j;  // facet j omits simplex[j]
      facets_.push_back(std::move(f));
    }
    std::vector<char> in_simplex(pts_.size(), 0);
    for (int i : simplex) in_simplex[i] = 1;
    std::vector<int> all;
    for (int i = 0; i < static_cast<int>(pts_.size()); ++i)
      if (!in_simplex[i]) all.push_back(i);
    std::vector<int> targets(facets_.size());
    std::iota(targets.begin(), targets.end(), 0);
    assign(all, targets);
  }

  void run() {
    std::vector<int> pending;
    for (int i = 0; i < static_cast<int>(facets_.size()); ++i)
      if (!facets_[i].outside.empty()) pending.push_back(i);

    while (!pending.empty()) {
      int fid = pending.back();
      pending.pop_back();
      if (!facets_[fid].alive || facets_[fid].outside.empty()) continue;
      const int apex = facets_[fid].furthest;
      const unsigned stamp = ++stamp_;

      std::vector<int> visible{fid};
      facets_[fid].visible_mark = stamp;
      facets_[fid].checked_mark = stamp;
      for (std::size_t q = 0; q < visible.size(); ++q) {
        for (int nb : facets_[visible[q]].neighbors) {
          Facet& g = facets_[nb];
          if (g.checked_mark == stamp) continue;
          g.checked_mark = stamp;
          if (distance(g, pts_[apex]) > eps_) {
            g.visible_mark = stamp;
            visible.push_back(nb);
          }
        }
      }

      std::vector<int> created;
      std::map<std::vector<int>, std::pair<int, int>> open_ridges;
      for (int vid : visible) {
        for (int j = 0; j < d_; ++j) {
          int nb = facets_[vid].neighbors[j];
          if (facets_[nb].visible_mark == stamp) continue;
          std::vector<int> verts = facets_[vid].verts;
          verts[j] = apex;
          Facet nf = make_facet(std::move(verts));
          nf.neighbors.assign(d_, -1);
          nf.neighbors[j] = nb;
          int nid = static_cast<int>(facets_.size());
          facets_.push_back(std::move(nf));
          for (int& link : facets_[nb].neighbors)
            if (link == vid) link = nid;
          created.push_back(nid);

          for (int s = 0; s < d_; ++s) {
            if (s == j) continue;
            std::vector<int> key;
            key.reserve(d_ - 1);
            for (int t = 0; t < d_; ++t)
              if (t != s) key.push_back(facets_[nid].verts[t]);
            std::sort(key.begin(), key.end());
            auto it = open_ridges.find(key);
            if (it == open_ridges.end()) {
              open_ridges.emplace(std::move(key), std::make_pair(nid, s));
            } else {
              auto [other, other_slot] = it->second;
              facets_[nid].neighbors[s] = other;
              facets_[other].neighbors[other_slot] = nid;
              open_ridges.erase(it);
            }
          }
        }
      }

      std::vector<int> orphans;
      for (int vid : visible) {
        Facet& f = facets_[vid];
        f.alive = false;
        for (int q : f.outside)
          if (q != apex) orphans.push_back(q);
        f.outside.clear();
        f.outside.shrink_to_fit();
      }
      assign(orphans, created);
      for (int nid : created)
        if (!facets_[nid].outside.empty()) pending.push_back(nid);
    }
  }

  template <class Fn>
  void for_each_facet(Fn&& fn) const {
    for (const auto& f : facets_)
      if (f.alive) fn(f);
  }

 private:
  Facet make_facet(std::vector<int> verts) const {
    Facet f;
    MatX a(d_, d_ - 1);
    for (int k = 1; k < d_; ++k) a.col(k - 1) = pts_[verts[k]] - pts_[verts[0]];
    Eigen::HouseholderQR<MatX> qr(a);
    MatX q = qr.householderQ();
    f.normal = q.col(d_ - 1);
    f.offset = f.normal.dot(pts_[verts[0]]);
    if (f.normal.dot(interior_) - f.offset > 0.0) {
      f.normal = -f.normal;
      f.offset = -f.offset;
    }
    f.verts = std::move(verts);
    return f;
  }

  double distance(const Facet& f, const VecX& p) const { return f.normal.dot(p) - f.offset; }

  void assign(const std::vector<int>& points, const std::vector<int>& targets) {
    for (int q : points) {
      for (int fid : targets) {
        Facet& f = facets_[fid];
        double dist = distance(f, pts_[q]);
        if (dist > eps_) {
          f.outside.push_back(q);
          if (dist > f.furthest_dist || f.furthest < 0) {
            f.furthest_dist = dist;
            f.furthest = q;
          }
          break;
        }
      }
    }
  }

  const std::vector<VecX>& pts_;
  int d_;
  double eps_;
  VecX interior_;
  std::vector<Facet> facets_;
  unsigned stamp_ = 0;
};

std::vector<Halfspace> merge_halfspaces(std::vector<Halfspace> hs) {
  constexpr double kGrid = 1e-7;
  std::map<std::vector<long long>, std::size_t> seen;
  std::vector<Halfspace> out;
  for (auto& h : hs) {
    std::vector<long long> key;
    key.reserve(h.normal.size() + 1);
    for (int i = 0; i < h.normal.size(); ++i) key.push_back(std::llround(h.normal[i] / kGrid));
    key.push_back(std::llround(h.offset / kGrid));
    if (seen.emplace(std::move(key), out.size()).second) out.push_back(std::move(h));
  }
  return out;
}

struct RawHull {
  std::vector<int> vertex_ids;  // indices into the input, ascending
  std::vector<Halfspace> halfspaces;  // world coordinates
  int affine_dimension = 0;
  std::vector<std::vector<int>> facets;  // only for full-dimensional input
};

RawHull hull_impl(std::span<const VecX> input, int d, double eps, bool require_full,
                  bool want_facets) {
  if (d < 1) throw InvalidArgument("dimension must be positive");
  if (input.empty()) throw DegenerateInput("no points");
  UnitBox box = make_unit_box(input, d);
  std::vector<VecX> pts;
  pts.reserve(input.size());
  for (const auto& p : input) pts.push_back(box.to_unit(p));

  AffineFrame frame = affine_frame(pts, d, eps);
  const int r = frame.rank();
  if (require_full && r < d)
    throw DegenerateInput("points span " + std::to_string(r) + " of " + std::to_string(d) +
                          " dimensions");

  RawHull out;
  out.affine_dimension = r;

  // Directions normal to the affine hull become pairs of opposite halfspaces.
  if (r < d) {
    MatX full = MatX::Identity(d, d);
    if (r > 0) {
      Eigen::HouseholderQR<MatX> qr(frame.basis);
      full = qr.householderQ();
    }
    for (int c = r; c < d; ++c) {
      VecX u = full.col(c);
      double o = u.dot(frame.origin);
      out.halfspaces.push_back(box.to_world(u, o));
      out.halfspaces.push_back(box.to_world(-u, -o));
    }
  }

  if (r == 0) {
    out.vertex_ids.push_back(frame.chosen.front());
    return out;
  }

  // Coordinates inside the affine hull.
  std::vector<VecX> local;
  local.reserve(pts.size());
  for (const auto& p : pts) local.push_back(frame.basis.transpose() * (p - frame.origin));

  auto lift = [&](const VecX& n_local, double o_local) {
    VecX n = frame.basis * n_local;
    double o = o_local + n.dot(frame.origin);
    return box.to_world(n, o);
  };

  if (r == 1) {
    int lo = 0, hi = 0;
    for (int i = 1; i < static_cast<int>(local.size()); ++i) {
      if (local[i][0] < local[lo][0]) lo = i;
      if (local[i][0] > local[hi][0]) hi = i;
    }
    out.vertex_ids = {std::min(lo, hi), std::max(lo, hi)};
    VecX one = VecX::Ones(1);
    out.halfspaces.push_back(lift(one, local[hi][0]));
    out.halfspaces.push_back(lift(-one, -local[lo][0]));
    if (want_facets && d == 1) out.facets = {{lo}, {hi}};
    return out;
  }

  QuickHull qh(local, r, eps, frame.chosen);
  qh.run();
  std::vector<char> used(pts.size(), 0);
  std::vector<Halfspace> hs;
  qh.for_each_facet([&](const QuickHull::Facet& f) {
    for (int v : f.verts) used[v] = 1;
    hs.push_back(lift(f.normal, f.offset));
    if (want_facets) {
      std::vector<int> verts = f.verts;
      if (d == 3) {
        Vec3 a = pts[verts[0]], b = pts[verts[1]], c = pts[verts[2]];
        VecX lifted = frame.basis * f.normal;
        Vec3 n(lifted[0], lifted[1], lifted[2]);
        if ((b - a).cross(c - a).dot(n) < 0.0) std::swap(verts[1], verts[2]);
      }
      out.facets.push_back(std::move(verts));
    }
  });
  for (int i = 0; i < static_cast<int>(used.size()); ++i)
    if (used[i]) out.vertex_ids.push_back(i);
  if (want_facets) {
    out.halfspaces.insert(out.halfspaces.end(), hs.begin(), hs.end());
  } else {
    auto merged = merge_halfspaces(std::move(hs));
    out.halfspaces.insert(out.halfspaces.end(), merged.begin(), merged.end());
  }
  return out;
}

ConvexPolytope to_polytope(std::span<const VecX> points, int d, RawHull raw) {
  ConvexPolytope poly;
  poly.dimension = d;
  poly.affine_dimension = raw.affine_dimension;
  poly.vertices.reserve(raw.vertex_ids.size());
  for (int i : raw.vertex_ids) poly.vertices.push_back(points[i]);
  poly.halfspaces = std::move(raw.halfspaces);
  return poly;
}

// Barycentric weights of the minimum-norm point of the affine hull of `corral`.
VecX affine_minimizer(const std::vector<VecX>& corral) {
  const int k = static_cast<int>(corral.size());
  MatX sys = MatX::Zero(k + 1, k + 1);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      double g = corral[i].dot(corral[j]);
      sys(i, j) = g;
      sys(j, i) = g;
    }
    sys(i, k) = 1.0;
    sys(k, i) = 1.0;
  }
  VecX rhs = VecX::Zero(k + 1);
  rhs[k] = 1.0;
  VecX sol = sys.completeOrthogonalDecomposition().solve(rhs);
  return sol.head(k);
}

}  // namespace

ConvexPolytope convex_hull(std::span<const VecX> points, int d, const HullOptions& opts) {
  return to_polytope(points, d, hull_impl(points, d, opts.epsilon, true, false));
}

ConvexPolytope convex_hull_any(std::span<const VecX> points, int d, const HullOptions& opts) {
  return to_polytope(points, d, hull_impl(points, d, opts.epsilon, false, false));
}

HullFacets convex_hull_facets(std::span<const VecX> points, int d, const HullOptions& opts) {
  RawHull raw = hull_impl(points, d, opts.epsilon, true, true);
  return {std::move(raw.facets), std::move(raw.halfspaces)};
}

bool contains(const ConvexPolytope& poly, const VecX& x, double tol) {
  if (x.size() != poly.dimension)
    throw DimensionMismatch("point has dimension " + std::to_string(x.size()) +
                            ", polytope has " + std::to_string(poly.dimension));
  return std::all_of(poly.halfspaces.begin(), poly.halfspaces.end(), [&](const Halfspace& h) {
    return h.normal.dot(x) <= h.offset + tol;
  });
}

VecX min_norm_point(const LinearOracle& lmo, const VecX& start, double scale) {
  const double tol_major = 1e-12 * std::max(scale * scale, 1e-300);
  constexpr double kTolWeight = 1e-12;

  std::vector<VecX> corral{start};
  std::vector<double> weight{1.0};
  VecX x = start;

  for (int iter = 0; iter < 10000; ++iter) {
    VecX p = lmo(x);
    if (x.squaredNorm() - p.dot(x) <= tol_major) break;
    const bool known = std::any_of(corral.begin(), corral.end(), [&](const VecX& q) {
      return (q - p).squaredNorm() <= 1e-24 * std::max(scale * scale, 1e-300);
    });
    if (known) break;
    corral.push_back(std::move(p));
    weight.push_back(0.0);

    for (int minor = 0; minor < 100; ++minor) {
      VecX v = affine_minimizer(corral);
      bool interior = true;
      for (int i = 0; i < v.size(); ++i)
        if (v[i] <= kTolWeight) interior = false;
      if (interior) {
        for (int i = 0; i < v.size(); ++i) weight[i] = v[i];
        break;
      }
      double theta = 1.0;
      for (int i = 0; i < v.size(); ++i) {
        if (v[i] <= kTolWeight) {
          double denom = weight[i] - v[i];
          if (denom > 0.0) theta = std::min(theta, weight[i] / denom);
        }
      }
      for (int i = 0; i < v.size(); ++i) weight[i] = theta * v[i] + (1.0 - theta) * weight[i];
      std::vector<VecX> keep_pts;
      std::vector<double> keep_w;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        if (weight[i] > kTolWeight) {
          keep_pts.push_back(corral[i]);
          keep_w.push_back(weight[i]);
        }
      }
      if (keep_pts.empty()) {
        keep_pts.push_back(corral.back());
        keep_w.push_back(1.0);
      }
      double total = std::accumulate(keep_w.begin(), keep_w.end(), 0.0);
      for (double& w : keep_w) w /= total;
      corral = std::move(keep_pts);
      weight = std::move(keep_w);
    }
    x.setZero();
    for (std::size_t i = 0; i < corral.size(); ++i) x += weight[i] * corral[i];
  }
  return x;
}

VecX min_norm_point(std::span<const VecX> points) {
  if (points.empty()) throw DegenerateInput("min_norm_point needs at least one point");
  double scale = 0.0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    scale = std::max(scale, points[i].norm());
    if (points[i].squaredNorm() < points[start].squaredNorm()) start = i;
  }
  auto lmo = [&](const VecX& y) -> VecX {
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
      if (points[i].dot(y) < points[best].dot(y)) best = i;
    return points[best];
  };
  return min_norm_point(lmo, points[start], scale);
}

double distance_to_minkowski_sum(std::span<const std::vector<VecX>> sets, const VecX& x) {
  if (sets.empty()) throw InvalidArgument("distance_to_minkowski_sum needs at least one set");
  double scale = x.norm();
  VecX start = -x;
  for (const auto& s : sets) {
    if (s.empty()) throw DegenerateInput("Minkowski operand has no points");
    double r = 0.0;
    for (const auto& p : s) {
      if (p.size() != x.size()) throw DimensionMismatch("point/operand dimension mismatch");
      r = std::max(r, p.norm());
    }
    scale += r;
    start += s.front();
  }
  // Support of a sum is the sum of supports; shifting by -x moves the query to the origin.
  auto lmo = [&](const VecX& y) -> VecX {
    VecX p = -x;
    for (const auto& s : sets) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i].dot(y) < s[best].dot(y)) best = i;
      p += s[best];
    }
    return p;
  };
  return min_norm_point(lmo, start, scale).norm();
}

double distance_to_set(const ConvexPolytope& poly, const VecX& x) {
  if (x.size() != poly.dimension) throw DimensionMismatch("point/polytope dimension mismatch");
  std::vector<VecX> shifted;
  shifted.reserve(poly.vertices.size());
  for (const auto& v : poly.vertices) shifted.push_back(v - x);
  return min_norm_point(shifted).norm();
}

double boundary_distance(const ConvexPolytope& poly, const VecX& x) {
  if (x.size() != poly.dimension) throw DimensionMismatch("point/polytope dimension mismatch");
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& h : poly.halfspaces)
    slack = std::min(slack, (h.offset - h.normal.dot(x)) / h.normal.norm());
  if (slack >= 0.0) return slack;
  return -distance_to_set(poly, x);
}

std::size_t enumeration_size(std::span<const std::size_t> counts) {
  std::size_t total = 1;
  for (std::size_t c : counts) {
    if (c != 0 && total > std::numeric_limits<std::size_t>::max() / c)
      return std::numeric_limits<std::size_t>::max();
    total *= c;
  }
  return total;
}

namespace {

// Minkowski sums of points, segments and polygons (friction-cone wrench sets are
// polygons in 6-D) have product-like facets that a triangulating hull handles
// badly. Their facets can instead be read off the normal fan: a facet normal is
// orthogonal to one edge or the whole plane of some operands, adding up to
// n - 1 independent directions in the n-dimensional span of the sum.
struct FlatOperand {
  std::vector<VecX> verts;   // ambient coordinates; cyclic order for polygons
  int dim = 0;               // 0, 1 or 2
};

std::vector<VecX> cyclic_polygon(const std::vector<VecX>& verts) {
  const VecX& o = verts.front();
  int far = 0;
  for (int i = 1; i < static_cast<int>(verts.size()); ++i)
    if ((verts[i] - o).norm() > (verts[far] - o).norm()) far = i;
  VecX e1 = (verts[far] - o).normalized();
  int side = 0;
  double best = -1.0;
  for (int i = 0; i < static_cast<int>(verts.size()); ++i) {
    VecX r = verts[i] - o;
    r -= r.dot(e1) * e1;
    if (r.norm() > best) {
      best = r.norm();
      side = i;
    }
  }
  VecX r = verts[side] - o;
  VecX e2 = (r - r.dot(e1) * e1).normalized();
  VecX centre = VecX::Zero(o.size());
  for (const auto& v : verts) centre += v;
  centre /= static_cast<double>(verts.size());
  std::vector<std::pair<double, int>> order;
  for (int i = 0; i < static_cast<int>(verts.size()); ++i) {
    VecX q = verts[i] - centre;
    order.emplace_back(std::atan2(q.dot(e2), q.dot(e1)), i);
  }
  std::sort(order.begin(), order.end());
  std::vector<VecX> out;
  for (const auto& [a, i] : order) out.push_back(verts[i]);
  return out;
}

constexpr int kFlatMaxDim = 8;
using SVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kFlatMaxDim, 1>;
using SMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kFlatMaxDim, kFlatMaxDim>;

// Greedy Gram-Schmidt rank of a set of directions, stopping once `full` is reached.
class RankCounter {
 public:
  RankCounter(int dim, double tol) : dim_(dim), tol_(tol) {}
  void add(const SVec& v) {
    if (rank_ == dim_) return;
    const double len = v.norm();
    if (len == 0.0) return;
    SVec r = v / len;
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < rank_; ++k) r -= r.dot(basis_[k]) * basis_[k];
    const double res = r.norm();
    if (res > tol_) basis_[rank_++] = r / res;
  }
  int rank() const { return rank_; }

 private:
  int dim_;
  double tol_;
  int rank_ = 0;
  SVec basis_[kFlatMaxDim];
};

std::optional<ConvexPolytope> minkowski_flat(std::span<const ConvexPolytope> polys, int d) {
  if (d > kFlatMaxDim) return std::nullopt;
  std::vector<FlatOperand> ops;
  double scale = 0.0;
  for (const auto& p : polys) {
    if (p.affine_dimension > 2 || p.vertices.size() > 64) return std::nullopt;
    FlatOperand op;
    op.dim = p.affine_dimension;
    op.verts = op.dim == 2 ? cyclic_polygon(p.vertices) : p.vertices;
    for (const auto& v : op.verts) scale = std::max(scale, v.norm());
    ops.push_back(std::move(op));
  }
  const double m = static_cast<double>(ops.size());
  const double eps = 1e-9 * std::max(1.0, scale * m);

  // Orthonormal basis of the span of all operand directions.
  std::vector<VecX> dirs;
  for (const auto& op : ops)
    for (std::size_t k = 1; k < op.verts.size(); ++k) dirs.push_back(op.verts[k] - op.verts[0]);
  MatX stack(d, static_cast<int>(dirs.size()));
  for (int k = 0; k < static_cast<int>(dirs.size()); ++k) stack.col(k) = dirs[k];
  MatX basis(d, 0);
  if (!dirs.empty()) {
    Eigen::JacobiSVD<MatX> svd(stack, Eigen::ComputeFullU);
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > 1e-9 * std::max(1.0, scale)) ++r;
    basis = svd.matrixU().leftCols(r);
  }
  const int n = static_cast<int>(basis.cols());

  VecX anchor = VecX::Zero(d);
  for (const auto& op : ops) anchor += op.verts.front();
  ConvexPolytope out;
  out.dimension = d;
  out.affine_dimension = n;
  if (n < d) {
    MatX full = MatX::Identity(d, d);
    if (n > 0) {
      Eigen::HouseholderQR<MatX> qr(basis);
      full = qr.householderQ();
    }
    for (int c = n; c < d; ++c) {
      VecX u = full.col(c);
      out.halfspaces.push_back({u, u.dot(anchor)});
      out.halfspaces.push_back({-u, -u.dot(anchor)});
    }
  }
  if (n == 0) {
    out.vertices.push_back(anchor);
    return out;
  }

  struct Local {
    std::vector<SVec> pts;
    std::vector<SVec> edge_dirs;   // one per polygon edge, one for a segment
    std::vector<SVec> plane_dirs;  // two for a polygon
  };
  std::vector<Local> loc(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    auto& l = loc[i];
    for (const auto& v : ops[i].verts) l.pts.push_back(basis.transpose() * v);
    const int nv = static_cast<int>(l.pts.size());
    if (ops[i].dim == 1) {
      l.edge_dirs.push_back((l.pts[1] - l.pts[0]).normalized());
    } else if (ops[i].dim == 2) {
      for (int k = 0; k < nv; ++k) l.edge_dirs.push_back((l.pts[(k + 1) % nv] - l.pts[k]).normalized());
      SVec a = l.edge_dirs[0];
      SVec b = SVec::Zero(n);
      for (int k = 1; k < nv; ++k) {
        SVec c = l.pts[k] - l.pts[0];
        if ((c - c.dot(a) * a).norm() > (b - b.dot(a) * a).norm()) b = c;
      }
      l.plane_dirs = {a, (b - b.dot(a) * a).normalized()};
    }
  }

  struct Facet {
    SVec normal;  // local
    double offset;
    std::vector<int> arg;    // argmax vertex indices of all operands, concatenated
    std::vector<int> start;  // operand i owns arg[start[i], start[i+1])
  };
  std::vector<Facet> facets;
  using Key = std::array<long long, kFlatMaxDim>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = 1469598103934665603ull;
      for (long long v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
      return h;
    }
  };
  std::unordered_map<Key, int, KeyHash> seen;

  // choice[i]: -1 none, -2 whole polygon, k >= 0 edge k (segment: edge 0).
  std::vector<int> choice(ops.size(), -1);
  std::vector<int> arg, start;
  arg.reserve(64);
  start.reserve(ops.size() + 1);
  auto try_normal = [&](const SVec& u) {
    Key key{};
    for (int k = 0; k < n; ++k) key[k] = std::llround(u[k] * 1e7);
    if (seen.count(key)) return;
    arg.clear();
    start.clear();
    double offset = 0.0;
    bool exact = true;
    int dims = 0;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const auto& pts = loc[i].pts;
      const int nv = static_cast<int>(pts.size());
      double vals[64];
      double best = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < nv; ++k) {
        vals[k] = u.dot(pts[k]);
        best = std::max(best, vals[k]);
      }
      start.push_back(static_cast<int>(arg.size()));
      for (int k = 0; k < nv; ++k)
        if (vals[k] >= best - eps) arg.push_back(k);
      const int sz = static_cast<int>(arg.size()) - start.back();
      dims += sz == 1 ? 0 : (sz == 2 ? 1 : 2);
      if (choice[i] == -1) {
        exact = exact && sz == 1;
      } else if (choice[i] == -2) {
        exact = exact && sz == nv;
      } else {
        int a = choice[i], b = (choice[i] + 1) % nv;
        exact = exact && sz == 2 && arg[start.back()] == std::min(a, b) &&
                arg[start.back() + 1] == std::max(a, b);
      }
      offset += best;
    }
    start.push_back(static_cast<int>(arg.size()));
    if (!exact) {
      // Parallel directions across operands: fall back to an explicit rank test.
      if (dims < n - 1) return;
      RankCounter rank(n, 1e-7);
      for (std::size_t i = 0; i < ops.size(); ++i)
        for (int k = start[i] + 1; k < start[i + 1]; ++k)
          rank.add(loc[i].pts[arg[k]] - loc[i].pts[arg[start[i]]]);
      if (rank.rank() != n - 1) return;
    }
    seen.emplace(key, static_cast<int>(facets.size()));
    facets.push_back({u, offset, arg, start});
  };

  // Depth-first choice of each operand's contribution to the facet directions.
  SMat chosen(n, std::max(n - 1, 1));
  int used = 0;
  std::vector<int> capacity(ops.size() + 1, 0);
  for (int i = static_cast<int>(ops.size()) - 1; i >= 0; --i) capacity[i] = capacity[i + 1] + ops[i].dim;
  auto emit = [&]() {
    SVec u;
    if (n == 1) {
      u = SVec::Ones(1);
    } else {
      SMat cols = chosen.leftCols(n - 1);
      Eigen::ColPivHouseholderQR<SMat> qr(cols);
      if (std::abs(qr.matrixR()(n - 2, n - 2)) < 1e-9) return;
      SVec e = SVec::Zero(n);
      e[n - 1] = 1.0;
      u = qr.householderQ() * e;
    }
    try_normal(u);
    try_normal(-u);
  };
  auto recurse = [&](auto&& self, std::size_t i, int need) -> void {
    if (need == 0) {
      emit();
      return;
    }
    if (i == ops.size() || capacity[i] < need) return;
    self(self, i + 1, need);
    const auto& l = loc[i];
    for (int k = 0; k < static_cast<int>(l.edge_dirs.size()); ++k) {
      chosen.col(used++) = l.edge_dirs[k];
      choice[i] = k;
      self(self, i + 1, need - 1);
      --used;
    }
    if (ops[i].dim == 2 && need >= 2) {
      chosen.col(used++) = l.plane_dirs[0];
      chosen.col(used++) = l.plane_dirs[1];
      choice[i] = -2;
      self(self, i + 1, need - 2);
      used -= 2;
    }
    choice[i] = -1;
  };
  recurse(recurse, 0, n - 1);

  // Vertices: tuples lying on facets whose normals span the whole space.
  std::vector<std::uint64_t> radix(ops.size(), 1);
  for (std::size_t i = 1; i < ops.size(); ++i) radix[i] = radix[i - 1] * ops[i - 1].verts.size();
  std::unordered_map<std::uint64_t, std::vector<int>> incidence;
  std::vector<int> idx(ops.size());
  for (int fi = 0; fi < static_cast<int>(facets.size()); ++fi) {
    const auto& f = facets[fi];
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      std::uint64_t key = 0;
      for (std::size_t i = 0; i < ops.size(); ++i) key += radix[i] * f.arg[f.start[i] + idx[i]];
      incidence[key].push_back(fi);
      std::size_t i = 0;
      while (i < ops.size() && ++idx[i] == f.start[i + 1] - f.start[i]) idx[i++] = 0;
      if (i == ops.size()) break;
    }
  }
  std::vector<std::pair<std::uint64_t, const std::vector<int>*>> ordered;
  for (const auto& [key, fs] : incidence)
    if (static_cast<int>(fs.size()) >= n) ordered.emplace_back(key, &fs);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [key, fsp] : ordered) {
    RankCounter rank(n, 1e-7);
    for (int fi : *fsp) {
      rank.add(facets[fi].normal);
      if (rank.rank() == n) break;
    }
    if (rank.rank() < n) continue;
    VecX v = VecX::Zero(d);
    std::uint64_t rest = key;
    for (std::size_t i = ops.size(); i-- > 0;) {
      v += ops[i].verts[rest / radix[i]];
      rest %= radix[i];
    }
    out.vertices.push_back(std::move(v));
  }
  for (const auto& f : facets) out.halfspaces.push_back({basis * VecX(f.normal), f.offset});
  return out;
}

}  // namespace

ConvexPolytope minkowski_sum(std::span<const ConvexPolytope> polys, std::size_t cap,
                             const HullOptions& opts) {
  if (polys.empty()) throw InvalidArgument("minkowski_sum of an empty list");
  const int d = polys.front().dimension;
  std::vector<std::size_t> counts;
  for (const auto& p : polys) {
    if (p.dimension != d) throw DimensionMismatch("minkowski_sum operands differ in dimension");
    if (p.vertices.empty()) throw DegenerateInput("minkowski_sum operand has no vertices");
    counts.push_back(p.vertices.size());
  }
  if (enumeration_size(counts) > cap)
    throw CapExceeded("vertex-tuple enumeration exceeds cap of " + std::to_string(cap));

  if (auto flat = minkowski_flat(polys, d)) return *flat;

  std::vector<VecX> acc = polys.front().vertices;
  for (std::size_t i = 1; i < polys.size(); ++i) {
    std::vector<VecX> sums;
    sums.reserve(acc.size() * polys[i].vertices.size());
    for (const auto& a : acc)
      for (const auto& b : polys[i].vertices) sums.push_back(a + b);
    acc = convex_hull_any(sums, d, opts).vertices;
  }
  return convex_hull_any(acc, d, opts);
}

}  // namespace softjig
