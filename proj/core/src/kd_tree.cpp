#include "mmr/kd_tree.hpp"

#include <algorithm>
#include <numeric>

namespace mmr {

namespace {
double coord(Point p, int axis) { return axis == 0 ? p.x : p.y; }
}  // namespace

KdTree::KdTree(std::span<const Point> points) : points_(points.begin(), points.end()) {
  std::vector<std::size_t> order(points_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  nodes_.reserve(points_.size());
  root_ = build(order, 0, order.size(), 0);
}

std::size_t KdTree::build(std::vector<std::size_t>& order, std::size_t lo, std::size_t hi, int depth) {
  if (lo >= hi) return npos;
  const int axis = depth % 2;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(lo),
                   order.begin() + static_cast<std::ptrdiff_t>(mid),
                   order.begin() + static_cast<std::ptrdiff_t>(hi),
                   [&](std::size_t a, std::size_t b) {
                     const double ca = coord(points_[a], axis), cb = coord(points_[b], axis);
                     return ca < cb || (ca == cb && a < b);
                   });
  const std::size_t self = nodes_.size();
  nodes_.push_back(Node{order[mid], npos, npos, axis});
  const std::size_t left = build(order, lo, mid, depth + 1);
  const std::size_t right = build(order, mid + 1, hi, depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

std::vector<std::size_t> KdTree::within(Point center, double radius) const {
  std::vector<std::size_t> out;
  if (root_ != npos && radius >= 0.0) collect(root_, center, radius, out);
  return out;
}

void KdTree::collect(std::size_t node, Point center, double radius, std::vector<std::size_t>& out) const {
  // Points equal to the split coordinate may sit on either side, so both
  // subtrees are visited whenever the query ball touches the split plane.
  while (node != npos) {
    const Node& n = nodes_[node];
    const Point p = points_[n.point];
    if (distance(p, center) <= radius) out.push_back(n.point);
    const double diff = coord(center, n.axis) - coord(p, n.axis);
    const std::size_t near = diff < 0 ? n.left : n.right;
    const std::size_t far = diff < 0 ? n.right : n.left;
    if (std::abs(diff) <= radius) collect(far, center, radius, out);
    node = near;
  }
}

}  // namespace mmr
