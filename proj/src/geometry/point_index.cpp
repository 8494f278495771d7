#include "geometry/point_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace drape {

namespace {
constexpr int kLeafSize = 12;
}

PointIndex::PointIndex(Points points) : points_(std::move(points)) {
  order_.resize(static_cast<std::size_t>(points_.rows()));
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * order_.size() / kLeafSize + 2);
  if (!order_.empty()) build(0, static_cast<int>(order_.size()));
}

int PointIndex::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Eigen::RowVector3d lo = points_.row(order_[static_cast<std::size_t>(begin)]);
  Eigen::RowVector3d hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_.row(order_[static_cast<std::size_t>(i)]));
    hi = hi.cwiseMax(points_.row(order_[static_cast<std::size_t>(i)]));
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
    return points_(a, axis) < points_(b, axis) || (points_(a, axis) == points_(b, axis) && a < b);
  });
  const double split = points_(order_[static_cast<std::size_t>(mid)], axis);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void PointIndex::search(int node_id, const Vec3& q, NearestHit& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const int p = order_[static_cast<std::size_t>(i)];
      const double d = (points_.row(p).transpose() - q).squaredNorm();
      if (d < best.squared_distance || (d == best.squared_distance && p < best.index)) {
        best.squared_distance = d;
        best.index = p;
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const int near = diff < 0 ? node.left : node.right;
  const int far = diff < 0 ? node.right : node.left;
  search(near, q, best);
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

NearestHit PointIndex::nearest(const Vec3& q) const {
  NearestHit best{-1, std::numeric_limits<double>::infinity()};
  if (!nodes_.empty()) search(0, q, best);
  return best;
}

NearestHit nearest_brute_force(const Points& points, const Vec3& q) {
  NearestHit best{-1, std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double d = (points.row(i).transpose() - q).squaredNorm();
    if (d < best.squared_distance) {
      best.squared_distance = d;
      best.index = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace drape
