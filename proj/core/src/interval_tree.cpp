#include "mmr/interval_tree.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace mmr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool key_less(double s1, std::uint64_t h1, double s2, std::uint64_t h2) {
  return s1 < s2 || (s1 == s2 && h1 < h2);
}

bool starts_in_window(double start, double lo, double hi) {
  return start < hi || (lo == hi && start <= hi);
}

}  // namespace

IntervalTree::IntervalTree(const IntervalTree& other)
    : root_(clone(other.root_.get())), size_(other.size_), next_handle_(other.next_handle_) {}

IntervalTree& IntervalTree::operator=(const IntervalTree& other) {
  if (this != &other) {
    root_ = clone(other.root_.get());
    size_ = other.size_;
    next_handle_ = other.next_handle_;
  }
  return *this;
}

IntervalTree::Ptr IntervalTree::clone(const Node* n) {
  if (!n) return nullptr;
  auto copy = std::make_unique<Node>();
  copy->interval = n->interval;
  copy->handle = n->handle;
  copy->priority = n->priority;
  copy->max_end = n->max_end;
  copy->left = clone(n->left.get());
  copy->right = clone(n->right.get());
  return copy;
}

void IntervalTree::update(Node& n) {
  n.max_end = n.interval.end;
  if (n.left) n.max_end = std::max(n.max_end, n.left->max_end);
  if (n.right) n.max_end = std::max(n.max_end, n.right->max_end);
}

IntervalTree::Ptr IntervalTree::merge(Ptr a, Ptr b) {
  if (!a) return b;
  if (!b) return a;
  if (a->priority > b->priority) {
    a->right = merge(std::move(a->right), std::move(b));
    update(*a);
    return a;
  }
  b->left = merge(std::move(a), std::move(b->left));
  update(*b);
  return b;
}

void IntervalTree::split(Ptr node, double start, Handle handle, Ptr& less, Ptr& rest) {
  if (!node) {
    less = nullptr;
    rest = nullptr;
    return;
  }
  if (key_less(node->interval.start, node->handle, start, handle)) {
    Ptr l, r;
    split(std::move(node->right), start, handle, l, r);
    node->right = std::move(l);
    update(*node);
    less = std::move(node);
    rest = std::move(r);
  } else {
    Ptr l, r;
    split(std::move(node->left), start, handle, l, r);
    node->left = std::move(r);
    update(*node);
    less = std::move(l);
    rest = std::move(node);
  }
}

IntervalTree::Handle IntervalTree::insert(TraversalInterval interval) {
  if (!(interval.start < interval.end) || interval.value < 1) {
    throw std::invalid_argument("interval requires start < end and value >= 1");
  }
  auto node = std::make_unique<Node>();
  node->interval = interval;
  node->handle = next_handle_++;
  node->priority = splitmix64(node->handle);
  node->max_end = interval.end;
  const Handle h = node->handle;

  Ptr less, rest;
  split(std::move(root_), interval.start, h, less, rest);
  root_ = merge(merge(std::move(less), std::move(node)), std::move(rest));
  ++size_;
  return h;
}

bool IntervalTree::erase(Handle handle, double start) {
  Ptr less, rest, match, greater;
  split(std::move(root_), start, handle, less, rest);
  split(std::move(rest), start, handle + 1, match, greater);
  const bool found = match != nullptr;
  // `match` holds at most the one node with this exact key.
  root_ = merge(std::move(less), std::move(greater));
  if (found) --size_;
  return found;
}

template <typename Visit>
void IntervalTree::visit_overlaps(const Node* n, double lo, double hi, Visit&& visit) {
  if (!n || n->max_end <= lo) return;
  visit_overlaps(n->left.get(), lo, hi, visit);
  if (!starts_in_window(n->interval.start, lo, hi)) return;  // right subtree starts even later
  if (n->interval.end > lo) visit(n->interval);
  visit_overlaps(n->right.get(), lo, hi, visit);
}

long long IntervalTree::overlap_sum(double lo, double hi) const {
  long long total = 0;
  visit_overlaps(root_.get(), lo, hi, [&](const TraversalInterval& iv) { total += iv.value; });
  return total;
}

std::vector<TraversalInterval> IntervalTree::overlapping(double lo, double hi) const {
  std::vector<TraversalInterval> out;
  visit_overlaps(root_.get(), lo, hi, [&](const TraversalInterval& iv) { out.push_back(iv); });
  return out;
}

std::vector<TraversalInterval> IntervalTree::items() const {
  std::vector<TraversalInterval> out;
  out.reserve(size_);
  auto walk = [&](auto&& self, const Node* n) -> void {
    if (!n) return;
    self(self, n->left.get());
    out.push_back(n->interval);
    self(self, n->right.get());
  };
  walk(walk, root_.get());
  return out;
}

}  // namespace mmr
