#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "softjig/geom.hpp"

namespace softjig {

/// Static 3-D kd-tree over a copy of the points. Queries return indices into
/// the original point list.
class KdTree {
 public:
  struct Neighbor {
    int index = -1;
    double dist2 = 0.0;
  };

  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points);

  std::size_t size() const { return points_.size(); }
  const Vec3& point(int i) const { return points_[i]; }

  /// Nearest point within `max_dist` (inclusive); index -1 when there is none.
  /// Ties go to the lower index.
  Neighbor nearest(const Vec3& q, double max_dist = std::numeric_limits<double>::infinity()) const;
  /// Up to k nearest points, closest first.
  std::vector<Neighbor> knn(const Vec3& q, int k) const;
  /// All points within `radius` (inclusive), in no particular order.
  std::vector<Neighbor> radius(const Vec3& q, double radius) const;

 private:
  struct Node {
    int lo = 0, hi = 0;  ///< range in order_
    int axis = -1;       ///< -1 for a leaf
    double split = 0.0;
    int left = -1, right = -1;
  };

  int build(int lo, int hi);
  void search_nearest(int node, const Vec3& q, Neighbor& best) const;
  void search_knn(int node, const Vec3& q, int k, std::vector<Neighbor>& heap) const;
  void search_radius(int node, const Vec3& q, double r2, std::vector<Neighbor>& out) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace softjig
