#include "mmr/congestion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mmr/error.hpp"

namespace mmr {

double bpr_travel_time(const Edge& edge, double volume) {
  if (!edge.has_bpr()) {
    throw NonRoadEdge("edge " + std::to_string(edge.id.value) + " has no BPR parameterization");
  }
  if (volume < 0.0) throw std::invalid_argument("negative volume");
  return edge.free_flow(Mode::Car) * std::pow(1.0 + edge.bpr_alpha * volume / edge.capacity, edge.bpr_beta);
}

void BackgroundProfile::set(EdgeId edge, std::vector<VolumeStep> steps) {
  std::sort(steps.begin(), steps.end(), [](const VolumeStep& a, const VolumeStep& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i].start < steps[i].end)) throw std::invalid_argument("background step requires start < end");
    if (steps[i].vehicles < 0.0) throw std::invalid_argument("negative background volume");
    if (i > 0 && steps[i].start < steps[i - 1].end) throw std::invalid_argument("overlapping background steps");
  }
  if (steps.empty()) {
    steps_.erase(edge);
  } else {
    steps_[edge] = std::move(steps);
  }
}

double BackgroundProfile::volume(EdgeId edge, double t) const {
  auto it = steps_.find(edge);
  if (it == steps_.end()) return 0.0;
  double local = std::fmod(t, period_);
  if (local < 0.0) local += period_;
  const auto& steps = it->second;
  // Last step whose start <= local.
  auto pos = std::upper_bound(steps.begin(), steps.end(), local,
                              [](double v, const VolumeStep& s) { return v < s.start; });
  if (pos == steps.begin()) return 0.0;
  --pos;
  return local < pos->end ? pos->vehicles : 0.0;
}

double background_volume(const BackgroundProfile& profile, const Edge& edge, double tau) {
  return profile.volume(edge.id, tau);
}

// ---------------------------------------------------------------------------

CongestionLedger::CongestionLedger(const MultiModalGraph& graph)
    : graph_(&graph), trees_(graph.edge_count()) {}

int CongestionLedger::seat_capacity(std::size_t edge) const {
  const Edge& e = graph_->edge(edge);
  if (e.transit && e.transit->line < graph_->lines().size()) {
    return graph_->lines()[e.transit->line].vehicle_capacity;
  }
  return std::isfinite(e.capacity) ? static_cast<int>(e.capacity) : 0;
}

void CongestionLedger::add_user_plan(const RoutePlan& plan, AgentId agent) {
  if (!graph_) throw std::logic_error("ledger is not bound to a graph");

  double previous_exit = plan.departure;
  std::map<std::pair<std::size_t, std::int64_t>, int> seats;
  for (const PlanLeg& leg : plan.legs) {
    if (leg.edge >= trees_.size()) throw std::invalid_argument("plan leg references an unknown edge");
    if (leg.enter < previous_exit || leg.exit < leg.enter) {
      throw std::invalid_argument("plan times are not increasing along the path");
    }
    previous_exit = leg.exit;
    if (leg.mode == Mode::Car && !(leg.enter < leg.exit)) {
      throw std::invalid_argument("car leg with empty traversal interval");
    }
    if (leg.mode == Mode::Transit) {
      if (!leg.departure) throw std::invalid_argument("transit leg without a matched run");
      ++seats[{leg.edge, *leg.departure}];
    }
  }
  for (const auto& [key, count] : seats) {
    const int capacity = seat_capacity(key.first);
    if (occupancy(key.first, key.second) + count > capacity) {
      throw TransitOverCapacity("run " + std::to_string(key.second) + " on edge " +
                                std::to_string(graph_->edge(key.first).id.value) + " is full");
    }
  }

  Record record;
  for (const PlanLeg& leg : plan.legs) {
    if (leg.mode == Mode::Car) {
      const auto handle = trees_[leg.edge].insert({leg.enter, leg.exit, 1});
      record.intervals.push_back({leg.edge, handle, leg.enter});
    }
  }
  for (const auto& [key, count] : seats) {
    occupancy_[key] += count;
    for (int i = 0; i < count; ++i) record.seats.push_back(key);
  }
  registry_[agent].push_back(std::move(record));
}

void CongestionLedger::remove_user_plan(AgentId agent) {
  auto it = registry_.find(agent);
  if (it == registry_.end()) throw UnknownAgent("agent " + std::to_string(agent.value) + " has no plan");
  for (const Record& record : it->second) {
    for (const IntervalEntry& entry : record.intervals) trees_[entry.edge].erase(entry.handle, entry.start);
    for (const auto& key : record.seats) {
      auto occ = occupancy_.find(key);
      if (occ != occupancy_.end() && --occ->second == 0) occupancy_.erase(occ);
    }
  }
  registry_.erase(it);
}

long long CongestionLedger::committed_count(std::size_t edge, double lo, double hi) const {
  if (edge >= trees_.size()) return 0;
  return trees_[edge].overlap_sum(lo, hi);
}

int CongestionLedger::occupancy(std::size_t edge, std::int64_t departure) const {
  auto it = occupancy_.find({edge, departure});
  return it == occupancy_.end() ? 0 : it->second;
}

std::size_t CongestionLedger::plan_count() const {
  std::size_t n = 0;
  for (const auto& [agent, records] : registry_) n += records.size();
  return n;
}

bool CongestionLedger::empty() const {
  if (!occupancy_.empty()) return false;
  return std::all_of(trees_.begin(), trees_.end(), [](const IntervalTree& t) { return t.empty(); });
}

CongestionLedger::Snapshot CongestionLedger::snapshot() const {
  Snapshot s;
  s.intervals.reserve(trees_.size());
  for (const IntervalTree& t : trees_) s.intervals.push_back(t.items());
  s.occupancy = occupancy_;
  return s;
}

double predicted_congestion_level(const CongestionLedger& ledger, std::size_t edge, double tau,
                                  std::optional<double> window) {
  const MultiModalGraph* graph = ledger.graph();
  if (!graph || edge >= graph->edge_count()) return 0.0;
  const Edge& e = graph->edge(edge);
  const double w = window.value_or(e.free_flow(Mode::Car));
  if (!(w > 0.0)) throw std::invalid_argument("congestion lookahead window must be positive");
  if (!(e.capacity > 0.0) || !std::isfinite(e.capacity)) return 0.0;
  const double count = static_cast<double>(ledger.committed_count(edge, tau, tau + w));
  return std::clamp(count / e.capacity, 0.0, 1.0);
}

}  // namespace mmr
