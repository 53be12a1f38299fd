#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmr/congestion.hpp"
#include "mmr/network.hpp"
#include "mmr/plan.hpp"

namespace mmr {

/// Pareto dominance: a <= b in every component and a < b in at least one.
bool dominates(const CostVector& a, const CostVector& b);
/// a <= (1 + epsilon) * b in every component. With epsilon = 0 this is
/// dominance or equality.
bool epsilon_dominates(const CostVector& a, const CostVector& b, double epsilon = 0.0);

struct RouteQuery {
  NodeId origin;
  NodeId destination;
  double departure = 0.0;
  UserProfile profile;
  /// Vehicles taken from the origin. Unset: every subset of owned vehicles is tried.
  std::optional<ModeSet> initial_carrying;
};

/// Dynamic inputs to edge costs besides the static graph.
struct NetworkState {
  const BackgroundProfile* background = nullptr;
  /// Vehicles currently on each edge, indexed like the graph's edges. May be empty.
  std::span<const double> live_volume;
  /// Committed plans; only consulted by the socially-considerate router.
  const CongestionLedger* ledger = nullptr;
  /// Initial ledger lookahead window; 0 uses the edge's free-flow time.
  double lookahead = 0.0;
};

/// Load seen by a car entering an edge, and its resulting traversal time.
struct CarLoad {
  double others = 0.0;        // background + live vehicles
  long long committed = 0;    // ledger intervals overlapping [tau, tau + window)
  double travel_time = 0.0;   // BPR at others + committed + the traveler's own car
  double window = 0.0;
};

/// With a ledger, the lookahead window is grown to the predicted traversal
/// time until the committed count is stable.
CarLoad predict_car_load(const MultiModalGraph& graph, std::size_t edge, double tau, const NetworkState& state);

/// One step out of a search state.
struct Transition {
  std::size_t edge = 0;
  ModeSet carrying;
  std::optional<Mode> mode;
  double enter = 0.0;
  double exit = 0.0;
  double money = 0.0;
  std::optional<std::int64_t> departure;
  bool fallback = false;
};

/// Time-dependent traversal of `edge` entered at `tau`; nullopt if the
/// traveler cannot use it in the given possession state.
std::optional<Transition> traverse(const MultiModalGraph& graph, std::size_t edge, const UserProfile& profile,
                                   double tau, ModeSet carrying, const NetworkState& state,
                                   CarLoad* load = nullptr);

/// Incident edges of `node` that pass the switch condition module.
std::vector<std::size_t> outgoing_edges_uo(const MultiModalGraph& graph, std::size_t node,
                                           const UserProfile& profile, double tau,
                                           const PossessionState& possession, double spent = 0.0);

/// As outgoing_edges_uo, additionally dropping car edges whose predicted load
/// (background + live + committed) is not below alpha * capacity, and transit
/// legs whose matched run is already full in the ledger.
std::vector<std::size_t> outgoing_edges_so(const MultiModalGraph& graph, const NetworkState& state,
                                           std::size_t node, const UserProfile& profile, double tau,
                                           const PossessionState& possession, double alpha,
                                           double spent = 0.0);

/// Edge expansion policy used by the search.
class EdgeProvider {
 public:
  EdgeProvider(const MultiModalGraph& graph, NetworkState state) : graph_(&graph), state_(state) {}
  virtual ~EdgeProvider() = default;

  virtual void expand(std::size_t node, const UserProfile& profile, double tau, ModeSet carrying, double spent,
                      std::vector<Transition>& out) const = 0;

  const MultiModalGraph& graph() const { return *graph_; }
  const NetworkState& state() const { return state_; }

 protected:
  const MultiModalGraph* graph_;
  NetworkState state_;
};

/// User-optimal expansion. Any ledger in `state` is ignored.
class UserOptimalProvider final : public EdgeProvider {
 public:
  UserOptimalProvider(const MultiModalGraph& graph, NetworkState state);
  void expand(std::size_t node, const UserProfile& profile, double tau, ModeSet carrying, double spent,
              std::vector<Transition>& out) const override;
};

/// Socially-considerate expansion with social ratio `alpha`. When every
/// feasible edge at a node is pruned and fallback is enabled, the least
/// congested feasible edge is admitted and the step is flagged.
class SocialOptimalProvider final : public EdgeProvider {
 public:
  SocialOptimalProvider(const MultiModalGraph& graph, NetworkState state, double alpha, bool allow_fallback = true);
  void expand(std::size_t node, const UserProfile& profile, double tau, ModeSet carrying, double spent,
              std::vector<Transition>& out) const override;
  double alpha() const { return alpha_; }

 private:
  double alpha_;
  bool allow_fallback_;
};

struct SearchOptions {
  double epsilon = 0.0;  // 0 = exact Pareto set
  bool use_heuristic = true;
  std::size_t max_labels = 4'000'000;
};

struct SearchStats {
  std::size_t labels_created = 0;
  std::size_t labels_expanded = 0;
};

/// Admissible lower bound on the remaining cost from `node`.
CostVector heuristic(const MultiModalGraph& graph, std::size_t node, const RouteQuery& query);

/// Multi-objective A*. Returns one plan per non-dominated cost vector, sorted
/// by (time, money, transfers). Throws NoPath if the destination is unreachable.
std::vector<RoutePlan> moa_star(const MultiModalGraph& graph, const RouteQuery& query, const EdgeProvider& provider,
                                const SearchOptions& options = {}, SearchStats* stats = nullptr);

/// Plan minimizing the weighted cost with each component scaled by its
/// maximum over the set. Throws EmptySet.
const RoutePlan& select_route(std::span<const RoutePlan> pareto, const UserProfile& profile);

}  // namespace mmr
