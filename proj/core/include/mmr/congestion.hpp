#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mmr/interval_tree.hpp"
#include "mmr/network.hpp"
#include "mmr/plan.hpp"

namespace mmr {

/// Edge travel time under the BPR volume-delay function:
/// t_f * (1 + alpha * volume / capacity)^beta. Throws NonRoadEdge for edges
/// without a car parameterization.
double bpr_travel_time(const Edge& edge, double volume);

/// Background vehicles on [start, end) seconds of the period.
struct VolumeStep {
  double start = 0.0;
  double end = 0.0;
  double vehicles = 0.0;
  friend bool operator==(const VolumeStep&, const VolumeStep&) = default;
};

/// Per-edge periodic, right-continuous step functions of background volume.
class BackgroundProfile {
 public:
  explicit BackgroundProfile(double period = kSecondsPerDay) : period_(period) {}

  /// Replaces the steps for `edge`. Steps must not overlap and volumes must be >= 0.
  void set(EdgeId edge, std::vector<VolumeStep> steps);
  double volume(EdgeId edge, double t) const;

  double period() const { return period_; }
  bool empty() const { return steps_.empty(); }
  const std::map<EdgeId, std::vector<VolumeStep>>& entries() const { return steps_; }

  friend bool operator==(const BackgroundProfile&, const BackgroundProfile&) = default;

 private:
  double period_;
  std::map<EdgeId, std::vector<VolumeStep>> steps_;
};

double background_volume(const BackgroundProfile& profile, const Edge& edge, double tau);

/// Predicted congestion of committed plans: one interval tree per car edge,
/// seat counters per (transit leg, run), and a registry for plan removal.
///
/// Not synchronized. Concurrent readers are fine; writers need exclusive access.
class CongestionLedger {
 public:
  CongestionLedger() = default;
  explicit CongestionLedger(const MultiModalGraph& graph);

  /// Car legs add [enter, exit) with value 1; transit legs take a seat on the
  /// matched run; other legs are ignored. All-or-nothing: throws
  /// TransitOverCapacity without mutating anything if a run is full.
  void add_user_plan(const RoutePlan& plan, AgentId agent);

  /// Reverts every plan registered for `agent`. Throws UnknownAgent.
  void remove_user_plan(AgentId agent);

  /// Committed vehicles on `edge` overlapping [lo, hi).
  long long committed_count(std::size_t edge, double lo, double hi) const;
  int occupancy(std::size_t edge, std::int64_t departure) const;
  int seat_capacity(std::size_t edge) const;

  bool has_plan(AgentId agent) const { return registry_.contains(agent); }
  std::size_t plan_count() const;
  bool empty() const;

  const IntervalTree& tree(std::size_t edge) const { return trees_[edge]; }
  const MultiModalGraph* graph() const { return graph_; }

  /// Full state, for comparisons.
  struct Snapshot {
    std::vector<std::vector<TraversalInterval>> intervals;
    std::map<std::pair<std::size_t, std::int64_t>, int> occupancy;
    friend bool operator==(const Snapshot&, const Snapshot&) = default;
  };
  Snapshot snapshot() const;

 private:
  struct IntervalEntry {
    std::size_t edge;
    IntervalTree::Handle handle;
    double start;
  };
  struct Record {
    std::vector<IntervalEntry> intervals;
    std::vector<std::pair<std::size_t, std::int64_t>> seats;
  };

  const MultiModalGraph* graph_ = nullptr;
  std::vector<IntervalTree> trees_;
  std::map<std::pair<std::size_t, std::int64_t>, int> occupancy_;
  std::unordered_map<AgentId, std::vector<Record>> registry_;
};

/// Committed vehicles overlapping [tau, tau + window) divided by capacity,
/// clamped to [0, 1]. The window defaults to the edge's free-flow time.
double predicted_congestion_level(const CongestionLedger& ledger, std::size_t edge, double tau,
                                  std::optional<double> window = std::nullopt);

}  // namespace mmr
