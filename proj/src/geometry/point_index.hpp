#pragma once

#include "geometry/mesh.hpp"

#include <vector>

namespace drape {

struct NearestHit {
  int index = -1;
  double squared_distance = 0.0;
};

// Static kd-tree over a point set with exact nearest-neighbour queries.
// Immutable after construction; queries are safe from concurrent callers.
class PointIndex {
 public:
  PointIndex() = default;
  explicit PointIndex(Points points);

  const Points& points() const { return points_; }
  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  bool empty() const { return points_.rows() == 0; }

  NearestHit nearest(const Vec3& q) const;

 private:
  struct Node {
    int begin = 0, end = 0;       // range into order_
    int left = -1, right = -1;    // child nodes, -1 for leaves
    int axis = 0;
    double split = 0.0;
  };

  int build(int begin, int end);
  void search(int node, const Vec3& q, NearestHit& best) const;

  Points points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

// Brute-force scan; test oracle and fallback for tiny sets.
NearestHit nearest_brute_force(const Points& points, const Vec3& q);

}  // namespace drape
