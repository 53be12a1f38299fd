#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mmr/types.hpp"

namespace mmr {

/// Multi-objective cost of a (partial) route.
struct CostVector {
  double travel_time = 0.0;  // seconds
  double money = 0.0;        // currency units
  double transfers = 0.0;    // mode changes

  friend bool operator==(const CostVector&, const CostVector&) = default;
};

struct PlanLeg {
  std::size_t edge = 0;  // index into the graph the plan was computed on
  EdgeId edge_id;
  std::optional<Mode> mode;  // empty on switch links
  double enter = 0.0;        // arrival at the edge tail (includes any wait before a transit leg)
  double exit = 0.0;
  std::optional<std::int64_t> departure;  // matched transit run, global index

  friend bool operator==(const PlanLeg&, const PlanLeg&) = default;
};

struct RoutePlan {
  NodeId origin;
  NodeId destination;
  double departure = 0.0;
  ModeSet carrying_at_start;
  std::vector<PlanLeg> legs;
  CostVector cost;
  bool fallback = false;  // an SO expansion admitted a pruned edge

  double arrival() const { return legs.empty() ? departure : legs.back().exit; }
  ModeSet modes_used() const {
    ModeSet out;
    for (const PlanLeg& leg : legs) {
      if (leg.mode) out.insert(*leg.mode);
    }
    return out;
  }

  friend bool operator==(const RoutePlan&, const RoutePlan&) = default;
};

}  // namespace mmr
