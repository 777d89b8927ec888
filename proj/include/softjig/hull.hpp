#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "softjig/geom.hpp"

namespace softjig {

/// normal . x <= offset, with a unit-length normal.
struct Halfspace {
  VecX normal;
  double offset = 0.0;
};

/// Convex polytope holding both a vertex and a halfspace description.
///
/// Polytopes whose affine hull is lower-dimensional than the ambient space
/// (for instance a single friction cone embedded in wrench space) are
/// represented by pairing opposite halfspaces across every direction normal to
/// the affine hull, so `contains` stays a plain halfspace test.
struct ConvexPolytope {
  int dimension = 0;
  int affine_dimension = 0;
  std::vector<VecX> vertices;
  std::vector<Halfspace> halfspaces;

  bool full_dimensional() const { return affine_dimension == dimension; }
};

struct HullOptions {
  /// Coplanarity threshold, applied after scaling the input to a unit bounding box.
  double epsilon = 1e-9;
};

/// Full-dimensional hull. Throws DegenerateInput when the points span fewer than d dimensions.
ConvexPolytope convex_hull(std::span<const VecX> points, int d, const HullOptions& opts = {});

/// Hull of any point set, lower-dimensional ones included.
ConvexPolytope convex_hull_any(std::span<const VecX> points, int d, const HullOptions& opts = {});

/// Simplicial facets of a full-dimensional hull: indices into `points`, oriented
/// so that the outward normal follows the right-hand rule in 3-D.
struct HullFacets {
  std::vector<std::vector<int>> facets;
  std::vector<Halfspace> planes;
};
HullFacets convex_hull_facets(std::span<const VecX> points, int d, const HullOptions& opts = {});

/// Closed-set membership: every halfspace satisfied to within `tol`.
bool contains(const ConvexPolytope& poly, const VecX& x, double tol);

/// Signed distance: min halfspace slack inside, minus the Euclidean distance outside.
double boundary_distance(const ConvexPolytope& poly, const VecX& x);

/// Euclidean distance from `x` to the polytope (zero inside).
double distance_to_set(const ConvexPolytope& poly, const VecX& x);

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
VecX min_norm_point(std::span<const VecX> points);

/// `lmo(y)` returns a point of the set minimising y . p.
using LinearOracle = std::function<VecX(const VecX&)>;

/// Wolfe's algorithm driven by a linear minimisation oracle, started at a point
/// of the set. `scale` bounds the norm of the set's points and sets the tolerance.
VecX min_norm_point(const LinearOracle& lmo, const VecX& start, double scale);

/// Euclidean distance from `x` to conv(sets[0]) + ... + conv(sets[m-1]),
/// computed without enumerating the sum.
double distance_to_minkowski_sum(std::span<const std::vector<VecX>> sets, const VecX& x);

inline constexpr std::size_t kDefaultMinkowskiCap = 1'000'000;

/// Minkowski sum by left fold, pruning to hull vertices after every pairwise sum.
/// Throws CapExceeded when the product of vertex counts exceeds `cap`.
ConvexPolytope minkowski_sum(std::span<const ConvexPolytope> polys,
                             std::size_t cap = kDefaultMinkowskiCap,
                             const HullOptions& opts = {});

/// Vertex counts multiplied together, saturating at SIZE_MAX.
std::size_t enumeration_size(std::span<const std::size_t> counts);

}  // namespace softjig
