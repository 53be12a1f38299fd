#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmr/types.hpp"

namespace mmr {

/// Static 2-d tree over a point set. Built once, queried by radius.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Point> points);

  /// Indices of points with distance(p, center) <= radius, unordered.
  std::vector<std::size_t> within(Point center, double radius) const;

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

 private:
  struct Node {
    std::size_t point = 0;  // index into points_
    std::size_t left = npos;
    std::size_t right = npos;
    int axis = 0;
  };
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t build(std::vector<std::size_t>& order, std::size_t lo, std::size_t hi, int depth);
  void collect(std::size_t node, Point center, double radius, std::vector<std::size_t>& out) const;

  std::vector<Point> points_;
  std::vector<Node> nodes_;
  std::size_t root_ = npos;
};

}  // namespace mmr
