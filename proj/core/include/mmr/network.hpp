#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mmr/kd_tree.hpp"
#include "mmr/types.hpp"

namespace mmr {

inline constexpr double kDefaultLinkRadius = 100.0;
inline constexpr double kDefaultBprAlpha = 0.15;
inline constexpr double kDefaultBprBeta = 4.0;
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

enum class EdgeKind : std::uint8_t { Street, TransitLeg, SwitchLink };

std::string_view to_string(EdgeKind kind);
std::optional<EdgeKind> parse_edge_kind(std::string_view name);

/// Pre-conditions guarding a switch link (the switch condition module).
struct SwitchConditions {
  std::optional<Mode> required_possession;
  bool parking_available = true;
  bool rental_available = false;
  ModeSet storage_for;
  double switch_cost = 0.0;
  double switch_time = 0.0;
  std::optional<double> max_cost;
  // Optional extras; absent unless a scenario sets them.
  bool turn_restricted = false;
  double toll = 0.0;
  std::optional<std::pair<double, double>> service_window;  // seconds of day, [open, close)

  friend bool operator==(const SwitchConditions&, const SwitchConditions&) = default;
};

/// Default switch conditions, optionally specialised by the mode of the link target.
struct SwitchDefaults {
  SwitchConditions base;
  std::map<Mode, SwitchConditions> by_target_mode;

  /// Conditions for a link into a node with modes `target`. When the chosen
  /// entry has no possession requirement and the target is a car-only or
  /// bike-only node, the requirement is filled in.
  SwitchConditions for_target(ModeSet target) const;

  friend bool operator==(const SwitchDefaults&, const SwitchDefaults&) = default;
};

struct Node {
  NodeId id;
  Point position;
  ModeSet modes;
  bool is_switch = false;
  std::optional<double> link_radius;  // per-node override of the graph radius

  friend bool operator==(const Node&, const Node&) = default;
};

struct TransitRef {
  std::size_t line = 0;
  std::size_t leg = 0;
  friend bool operator==(const TransitRef&, const TransitRef&) = default;
};

struct Edge {
  EdgeId id;
  NodeId from;
  NodeId to;
  ModeSet modes;
  EdgeKind kind = EdgeKind::Street;
  double length = 0.0;
  std::array<double, 4> free_flow_time{};  // seconds per mode; 0 = derive from length and speed
  double capacity = kUnbounded;
  double bpr_alpha = kDefaultBprAlpha;
  double bpr_beta = kDefaultBprBeta;
  double monetary_cost = 0.0;
  std::optional<SwitchConditions> switch_conditions;
  std::optional<TransitRef> transit;

  double free_flow(Mode m) const { return free_flow_time[index_of(m)]; }
  void set_free_flow(Mode m, double seconds) { free_flow_time[index_of(m)] = seconds; }

  /// Car street edge with a usable volume-delay parameterization.
  bool has_bpr() const {
    return kind == EdgeKind::Street && modes.contains(Mode::Car) && free_flow(Mode::Car) > 0.0 &&
           capacity > 0.0 && capacity < kUnbounded;
  }

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Fixed-schedule line. Departures are first-stop times; the schedule repeats daily.
struct TransitLine {
  LineId id;
  std::vector<NodeId> stops;
  std::vector<double> departures;
  std::vector<double> leg_times;
  int vehicle_capacity = 0;

  /// Seconds from first-stop departure until the vehicle leaves stop `leg`.
  double offset(std::size_t leg) const;

  /// Global index (day * departures.size() + j) of the first run leaving stop
  /// `leg` at or after `t`, and that departure time.
  std::pair<std::int64_t, double> next_departure(std::size_t leg, double t) const;
  double departure_time(std::size_t leg, std::int64_t global_index) const;

  friend bool operator==(const TransitLine&, const TransitLine&) = default;
};

struct UserProfile {
  AgentId id;
  bool owns_car = false;
  bool owns_bike = false;
  double budget = kUnbounded;
  std::array<double, 3> objective_weights{1.0, 0.0, 0.0};  // time, money, transfers
  double walk_speed = 1.4;
  double bike_speed = 4.5;

  /// Rescale weights to sum to one; all-zero weights become time-only.
  void normalize_weights();

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

/// Vehicles with the traveler. A parked vehicle is never picked up again
/// within the same trip.
struct PossessionState {
  ModeSet carrying;
  std::vector<std::pair<Mode, NodeId>> parked;

  friend bool operator==(const PossessionState&, const PossessionState&) = default;
};

/// One uni-modal input graph.
struct UniModalGraph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<TransitLine> lines;
  friend bool operator==(const UniModalGraph&, const UniModalGraph&) = default;
};

struct SwitchOverride {
  NodeId from;
  NodeId to;
  SwitchConditions conditions;
  friend bool operator==(const SwitchOverride&, const SwitchOverride&) = default;
};

/// Merged multi-modal graph. Immutable after construction.
class MultiModalGraph {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  MultiModalGraph() = default;
  MultiModalGraph(std::vector<Node> nodes, std::vector<Edge> edges, std::vector<TransitLine> lines,
                  double link_radius = kDefaultLinkRadius);

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const TransitLine> lines() const { return lines_; }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const Edge& edge(std::size_t i) const { return edges_[i]; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  std::optional<std::size_t> node_index(NodeId id) const;
  std::optional<std::size_t> edge_index(EdgeId id) const;

  /// Endpoint indices; npos when the endpoint does not exist.
  std::size_t source(std::size_t edge) const { return source_[edge]; }
  std::size_t target(std::size_t edge) const { return target_[edge]; }

  std::span<const std::uint32_t> out_edges(std::size_t node) const;

  const KdTree& spatial_index() const { return kd_tree_; }
  double link_radius() const { return link_radius_; }
  double link_radius_of(std::size_t node) const {
    return nodes_[node].link_radius.value_or(link_radius_);
  }

  /// Fastest length/time ratio over edges whose time does not depend on the
  /// traveler. Infinite if any positive-length edge takes zero time.
  double max_static_speed() const { return max_static_speed_; }

  friend bool operator==(const MultiModalGraph& a, const MultiModalGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ && a.lines_ == b.lines_ &&
           a.link_radius_ == b.link_radius_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<TransitLine> lines_;
  double link_radius_ = kDefaultLinkRadius;

  std::unordered_map<NodeId, std::size_t> node_lookup_;
  std::unordered_map<EdgeId, std::size_t> edge_lookup_;
  std::vector<std::size_t> source_;
  std::vector<std::size_t> target_;
  std::vector<std::size_t> adjacency_offsets_;
  std::vector<std::uint32_t> adjacency_;
  KdTree kd_tree_;
  double max_static_speed_ = 0.0;
};

/// Merge uni-modal layers and link nodes of different layers that lie within
/// the link radius (either endpoint's radius) with switch edges in both
/// directions. Ids listed in `shared_node_ids` may appear in several layers and
/// are unified; any other repeated node id raises OverlappingIds.
MultiModalGraph merge_graphs(std::span<const UniModalGraph> layers, double link_radius,
                             const SwitchDefaults& scm_defaults,
                             std::span<const SwitchOverride> overrides = {},
                             std::span<const NodeId> shared_node_ids = {});

/// Merge additional layers into an existing graph, treated as one layer.
MultiModalGraph merge_graphs(const MultiModalGraph& base, std::span<const UniModalGraph> layers,
                             const SwitchDefaults& scm_defaults);

/// Build the transit layer: one TransitLeg edge per consecutive stop pair,
/// with ids assigned from `first_edge_id` upwards in line order.
UniModalGraph make_transit_layer(std::vector<Node> stops, std::vector<TransitLine> lines,
                                 std::int64_t first_edge_id);

/// Nodes with Euclidean distance <= radius, sorted by distance then id.
std::vector<NodeId> nearest_within(const MultiModalGraph& graph, Point point, double radius);

/// Mode used to traverse a street or transit edge given what the traveler
/// carries; nullopt if the edge cannot be traversed in that state.
std::optional<Mode> traversal_mode(const Edge& edge, ModeSet carrying);

/// What the traveler carries after crossing a switch link, or nullopt when
/// the possession, parking or storage conditions fail.
std::optional<ModeSet> switch_outcome(const Edge& edge, ModeSet carrying);

/// Switch condition module. `spent` is the money already spent on the trip
/// and is checked against the profile budget.
bool evaluate_scm(const Edge& edge, const UserProfile& profile, double tau,
                  const PossessionState& possession, double spent = 0.0);

struct ValidationReport {
  std::vector<std::string> findings;
  bool ok() const { return findings.empty(); }
};

ValidationReport validate_graph(const MultiModalGraph& graph);

}  // namespace mmr
