#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "binclust/matrix.hpp"

namespace binclust {

// Static kd-tree over the rows of a matrix. Built once, queried many times.
// All queries are deterministic: results come back in ascending row order.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(Matrix points);

  std::size_t size() const { return points_.rows(); }
  std::size_t dim() const { return points_.cols(); }
  const Matrix& points() const { return points_; }

  // Row indices of all points with Euclidean distance <= radius from
  // `query`, sorted ascending.
  std::vector<std::size_t> radius_query(std::span<const double> query,
                                        double radius) const;

  // Row index of the closest point; ties resolve to the lowest index.
  // Requires a non-empty tree.
  std::size_t nearest(std::span<const double> query) const;

 private:
  struct Node {
    std::size_t begin = 0;   // range into order_
    std::size_t end = 0;
    std::size_t axis = 0;
    double split = 0.0;      // coordinate of the median point on `axis`
    std::int64_t left = -1;  // node indices, -1 = leaf
    std::int64_t right = -1;
  };

  std::size_t build(std::size_t begin, std::size_t end, std::size_t depth);
  void collect_radius(std::size_t node, std::span<const double> query,
                      double radius_sq, std::vector<std::size_t>& out) const;
  void search_nearest(std::size_t node, std::span<const double> query,
                      double& best_sq, std::size_t& best_idx) const;

  Matrix points_;
  std::vector<std::size_t> order_;  // permutation of row indices
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

}  // namespace binclust
