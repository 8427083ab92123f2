#include <algorithm>
#include <limits>
#include <utility>

#include "binclust/kdtree.hpp"

namespace binclust {

namespace {
constexpr std::size_t kLeafSize = 16;
}

KdTree::KdTree(Matrix points) : points_(std::move(points)) {
  order_.resize(points_.rows());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!order_.empty()) root_ = build(0, order_.size(), 0);
}

std::size_t KdTree::build(std::size_t begin, std::size_t end, std::size_t depth) {
  Node node;
  node.begin = begin;
  node.end = end;
  const std::size_t idx = nodes_.size();
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return idx;

  const std::size_t axis = depth % points_.cols();
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](std::size_t a, std::size_t b) {
                     const double va = points_(a, axis), vb = points_(b, axis);
                     return va < vb || (va == vb && a < b);
                   });
  nodes_[idx].axis = axis;
  nodes_[idx].split = points_(order_[mid], axis);
  const std::size_t left = build(begin, mid, depth + 1);
  const std::size_t right = build(mid, end, depth + 1);
  nodes_[idx].left = static_cast<std::int64_t>(left);
  nodes_[idx].right = static_cast<std::int64_t>(right);
  return idx;
}

std::vector<std::size_t> KdTree::radius_query(std::span<const double> query,
                                              double radius) const {
  if (query.size() != dim())
    throw DimensionMismatch("query has " + std::to_string(query.size()) +
                            " coordinates, tree points have " + std::to_string(dim()));
  std::vector<std::size_t> out;
  if (!order_.empty() && radius >= 0.0)
    collect_radius(root_, query, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdTree::collect_radius(std::size_t node, std::span<const double> query,
                            double radius_sq, std::vector<std::size_t>& out) const {
  const Node& nd = nodes_[node];
  if (nd.left < 0) {
    for (std::size_t i = nd.begin; i < nd.end; ++i) {
      const std::size_t row = order_[i];
      if (squared_distance(points_.row(row), query) <= radius_sq) out.push_back(row);
    }
    return;
  }
  const double delta = query[nd.axis] - nd.split;
  // The median point itself lives in the right half, so the boundary plane
  // must be crossed in both directions when delta * delta == radius_sq.
  if (delta <= 0.0 || delta * delta <= radius_sq)
    collect_radius(static_cast<std::size_t>(nd.left), query, radius_sq, out);
  if (delta >= 0.0 || delta * delta <= radius_sq)
    collect_radius(static_cast<std::size_t>(nd.right), query, radius_sq, out);
}

std::size_t KdTree::nearest(std::span<const double> query) const {
  if (order_.empty()) throw EmptyDataset("nearest query on an empty tree");
  if (query.size() != dim())
    throw DimensionMismatch("query has " + std::to_string(query.size()) +
                            " coordinates, tree points have " + std::to_string(dim()));
  double best_sq = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  search_nearest(root_, query, best_sq, best_idx);
  return best_idx;
}

void KdTree::search_nearest(std::size_t node, std::span<const double> query,
                            double& best_sq, std::size_t& best_idx) const {
  const Node& nd = nodes_[node];
  if (nd.left < 0) {
    for (std::size_t i = nd.begin; i < nd.end; ++i) {
      const std::size_t row = order_[i];
      const double d = squared_distance(points_.row(row), query);
      if (d < best_sq || (d == best_sq && row < best_idx)) {
        best_sq = d;
        best_idx = row;
      }
    }
    return;
  }
  const double delta = query[nd.axis] - nd.split;
  const std::size_t near = static_cast<std::size_t>(delta <= 0.0 ? nd.left : nd.right);
  const std::size_t far = static_cast<std::size_t>(delta <= 0.0 ? nd.right : nd.left);
  search_nearest(near, query, best_sq, best_idx);
  if (delta * delta <= best_sq) search_nearest(far, query, best_sq, best_idx);
}

}  // namespace binclust
