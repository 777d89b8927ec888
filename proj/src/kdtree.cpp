#include "softjig/kdtree.hpp"

#include <algorithm>
#include <limits>

namespace softjig {

namespace {

constexpr int kLeafSize = 8;

bool closer(const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
  return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  if (!points_.empty()) build(0, static_cast<int>(points_.size()));
}

int KdTree::build(int lo, int hi) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({lo, hi});
  if (hi - lo <= kLeafSize) return id;
  Vec3 mn = points_[order_[lo]], mx = mn;
  for (int i = lo + 1; i < hi; ++i) {
    mn = mn.cwiseMin(points_[order_[i]]);
    mx = mx.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (mx - mn).maxCoeff(&axis);
  if (mx[axis] == mn[axis]) return id;  // all points coincide
  const int mid = lo + (hi - lo) / 2;
  std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  const int left = build(lo, mid);
  const int right = build(mid, hi);
  Node& n = nodes_[id];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

KdTree::Neighbor KdTree::nearest(const Vec3& q, double max_dist) const {
  Neighbor best{-1, max_dist * max_dist};
  if (!nodes_.empty()) search_nearest(0, q, best);
  return best;
}

void KdTree::search_nearest(int id, const Vec3& q, Neighbor& best) const {
  const Node& n = nodes_[id];
  if (n.axis < 0) {
    for (int i = n.lo; i < n.hi; ++i) {
      Neighbor c{order_[i], (points_[order_[i]] - q).squaredNorm()};
      if (c.dist2 < best.dist2 || (c.dist2 == best.dist2 && (best.index < 0 || c.index < best.index)))
        best = c;
    }
    return;
  }
  const double d = q[n.axis] - n.split;
  const int first = d < 0.0 ? n.left : n.right;
  const int second = d < 0.0 ? n.right : n.left;
  search_nearest(first, q, best);
  if (d * d <= best.dist2) search_nearest(second, q, best);
}

std::vector<KdTree::Neighbor> KdTree::knn(const Vec3& q, int k) const {
  std::vector<Neighbor> heap;
  if (k <= 0 || nodes_.empty()) return heap;
  heap.reserve(k + 1);
  search_knn(0, q, k, heap);
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

void KdTree::search_knn(int id, const Vec3& q, int k, std::vector<Neighbor>& heap) const {
  const Node& n = nodes_[id];
  if (n.axis < 0) {
    for (int i = n.lo; i < n.hi; ++i) {
      Neighbor c{order_[i], (points_[order_[i]] - q).squaredNorm()};
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(c, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double d = q[n.axis] - n.split;
  const int first = d < 0.0 ? n.left : n.right;
  const int second = d < 0.0 ? n.right : n.left;
  search_knn(first, q, k, heap);
  if (static_cast<int>(heap.size()) < k || d * d <= heap.front().dist2) search_knn(second, q, k, heap);
}

std::vector<KdTree::Neighbor> KdTree::radius(const Vec3& q, double r) const {
  std::vector<Neighbor> out;
  if (!nodes_.empty() && r >= 0.0) search_radius(0, q, r * r, out);
  return out;
}

void KdTree::search_radius(int id, const Vec3& q, double r2, std::vector<Neighbor>& out) const {
  const Node& n = nodes_[id];
  if (n.axis < 0) {
    for (int i = n.lo; i < n.hi; ++i) {
      double d2 = (points_[order_[i]] - q).squaredNorm();
      if (d2 <= r2) out.push_back({order_[i], d2});
    }
    return;
  }
  const double d = q[n.axis] - n.split;
  if (d < 0.0 || d * d <= r2) search_radius(n.left, q, r2, out);
  if (d >= 0.0 || d * d <= r2) search_radius(n.right, q, r2, out);
}

}  // namespace softjig
