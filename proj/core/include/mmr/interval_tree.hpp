#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace mmr {

struct TraversalInterval {
  double start = 0.0;
  double end = 0.0;
  int value = 1;
  friend bool operator==(const TraversalInterval&, const TraversalInterval&) = default;
};

/// Augmented balanced search tree over half-open intervals [start, end),
/// keyed by (start, handle). Each node stores the maximum end in its subtree
/// so overlap queries skip subtrees that end before the query window.
class IntervalTree {
 public:
  using Handle = std::uint64_t;

  IntervalTree() = default;
  IntervalTree(IntervalTree&&) noexcept = default;
  IntervalTree& operator=(IntervalTree&&) noexcept = default;
  IntervalTree(const IntervalTree& other);
  IntervalTree& operator=(const IntervalTree& other);
  ~IntervalTree() = default;

  /// Requires start < end and value >= 1.
  Handle insert(TraversalInterval interval);
  /// Removes the interval returned by `insert`. Returns false if absent.
  bool erase(Handle handle, double start);

  /// Sum of values of intervals overlapping [lo, hi); a point query when lo == hi.
  long long overlap_sum(double lo, double hi) const;
  std::vector<TraversalInterval> overlapping(double lo, double hi) const;

  /// All intervals in key order.
  std::vector<TraversalInterval> items() const;

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

 private:
  struct Node {
    TraversalInterval interval;
    Handle handle = 0;
    std::uint64_t priority = 0;
    double max_end = 0.0;
    std::unique_ptr<Node> left;
    std::unique_ptr<Node> right;
  };
  using Ptr = std::unique_ptr<Node>;

  static void update(Node& n);
  static Ptr merge(Ptr a, Ptr b);
  static void split(Ptr node, double start, Handle handle, Ptr& less, Ptr& rest);
  static Ptr clone(const Node* n);
  template <typename Visit>
  static void visit_overlaps(const Node* n, double lo, double hi, Visit&& visit);

  Ptr root_;
  std::size_t size_ = 0;
  Handle next_handle_ = 1;
};

}  // namespace mmr
