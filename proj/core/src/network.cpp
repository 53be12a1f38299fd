#include "mmr/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "mmr/error.hpp"

namespace mmr {

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::Street: return "street";
    case EdgeKind::TransitLeg: return "transit_leg";
    case EdgeKind::SwitchLink: return "switch_link";
  }
  return "unknown";
}

std::optional<EdgeKind> parse_edge_kind(std::string_view name) {
  for (EdgeKind k : {EdgeKind::Street, EdgeKind::TransitLeg, EdgeKind::SwitchLink}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

SwitchConditions SwitchDefaults::for_target(ModeSet target) const {
  SwitchConditions out = base;
  if (target.size() == 1) {
    for (Mode m : kAllModes) {
      if (!target.contains(m)) continue;
      if (auto it = by_target_mode.find(m); it != by_target_mode.end()) out = it->second;
    }
  }
  if (!out.required_possession) {
    if (target == ModeSet{Mode::Car}) out.required_possession = Mode::Car;
    if (target == ModeSet{Mode::Bike}) out.required_possession = Mode::Bike;
  }
  return out;
}

// ---------------------------------------------------------------------------
// TransitLine

double TransitLine::offset(std::size_t leg) const {
  double total = 0.0;
  for (std::size_t k = 0; k < leg && k < leg_times.size(); ++k) total += leg_times[k];
  return total;
}

std::pair<std::int64_t, double> TransitLine::next_departure(std::size_t leg, double t) const {
  const auto n = static_cast<std::int64_t>(departures.size());
  if (n == 0) return {-1, kUnbounded};
  const double base = t - offset(leg);
  auto day = static_cast<std::int64_t>(std::floor(base / kSecondsPerDay));
  const double rem = base - static_cast<double>(day) * kSecondsPerDay;
  auto j = static_cast<std::int64_t>(std::lower_bound(departures.begin(), departures.end(), rem) -
                                     departures.begin());
  std::int64_t global = day * n + j;
  double when = departure_time(leg, global);
  while (when < t) {
    ++global;
    when = departure_time(leg, global);
  }
  return {global, when};
}

double TransitLine::departure_time(std::size_t leg, std::int64_t global_index) const {
  const auto n = static_cast<std::int64_t>(departures.size());
  std::int64_t day = global_index / n;
  std::int64_t j = global_index % n;
  if (j < 0) {
    j += n;
    --day;
  }
  return departures[static_cast<std::size_t>(j)] + static_cast<double>(day) * kSecondsPerDay + offset(leg);
}

void UserProfile::normalize_weights() {
  double sum = 0.0;
  for (double& w : objective_weights) {
    w = std::max(w, 0.0);
    sum += w;
  }
  if (sum <= 0.0) {
    objective_weights = {1.0, 0.0, 0.0};
    return;
  }
  for (double& w : objective_weights) w /= sum;
}

// ---------------------------------------------------------------------------
// MultiModalGraph

MultiModalGraph::MultiModalGraph(std::vector<Node> nodes, std::vector<Edge> edges,
                                 std::vector<TransitLine> lines, double link_radius)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), lines_(std::move(lines)), link_radius_(link_radius) {
  node_lookup_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) node_lookup_.emplace(nodes_[i].id, i);
  edge_lookup_.reserve(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) edge_lookup_.emplace(edges_[i].id, i);

  source_.resize(edges_.size(), npos);
  target_.resize(edges_.size(), npos);
  std::vector<std::size_t> degree(nodes_.size() + 1, 0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (auto it = node_lookup_.find(edges_[e].from); it != node_lookup_.end()) source_[e] = it->second;
    if (auto it = node_lookup_.find(edges_[e].to); it != node_lookup_.end()) target_[e] = it->second;
    if (source_[e] != npos && target_[e] != npos) ++degree[source_[e] + 1];
  }
  for (std::size_t i = 1; i < degree.size(); ++i) degree[i] += degree[i - 1];
  adjacency_offsets_ = degree;
  adjacency_.resize(degree.back());
  std::vector<std::size_t> fill(degree.begin(), degree.end() - 1);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (source_[e] == npos || target_[e] == npos) continue;
    adjacency_[fill[source_[e]]++] = static_cast<std::uint32_t>(e);
  }

  std::vector<Point> points;
  points.reserve(nodes_.size());
  for (const Node& n : nodes_) points.push_back(n.position);
  kd_tree_ = KdTree(points);

  for (const Edge& e : edges_) {
    if (e.length <= 0.0) continue;
    double time = 0.0;
    bool known = false;
    switch (e.kind) {
      case EdgeKind::Street:
        for (Mode m : kAllModes) {
          if (!e.modes.contains(m) || e.free_flow(m) <= 0.0) continue;
          const double t = e.free_flow(m);
          time = known ? std::min(time, t) : t;
          known = true;
        }
        break;
      case EdgeKind::TransitLeg:
        time = e.free_flow(Mode::Transit);
        known = true;
        break;
      case EdgeKind::SwitchLink:
        time = e.switch_conditions ? e.switch_conditions->switch_time : 0.0;
        known = true;
        break;
    }
    if (!known) continue;
    max_static_speed_ = time > 0.0 ? std::max(max_static_speed_, e.length / time) : kUnbounded;
  }
}

std::optional<std::size_t> MultiModalGraph::node_index(NodeId id) const {
  if (auto it = node_lookup_.find(id); it != node_lookup_.end()) return it->second;
  return std::nullopt;
}

std::optional<std::size_t> MultiModalGraph::edge_index(EdgeId id) const {
  if (auto it = edge_lookup_.find(id); it != edge_lookup_.end()) return it->second;
  return std::nullopt;
}

std::span<const std::uint32_t> MultiModalGraph::out_edges(std::size_t node) const {
  if (node + 1 >= adjacency_offsets_.size()) return {};
  return std::span<const std::uint32_t>(adjacency_).subspan(
      adjacency_offsets_[node], adjacency_offsets_[node + 1] - adjacency_offsets_[node]);
}

// ---------------------------------------------------------------------------
// Merge and link

MultiModalGraph merge_graphs(std::span<const UniModalGraph> layers, double link_radius,
                             const SwitchDefaults& scm_defaults, std::span<const SwitchOverride> overrides,
                             std::span<const NodeId> shared_node_ids) {
  const std::unordered_set<NodeId> shared(shared_node_ids.begin(), shared_node_ids.end());

  std::vector<Node> nodes;
  std::vector<std::vector<std::size_t>> node_layers;
  std::unordered_map<NodeId, std::size_t> seen;
  std::vector<Edge> edges;
  std::unordered_set<EdgeId> edge_ids;
  std::vector<TransitLine> lines;

  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (const Node& n : layers[l].nodes) {
      if (auto it = seen.find(n.id); it != seen.end()) {
        if (!shared.contains(n.id)) {
          throw OverlappingIds("node id " + std::to_string(n.id.value) + " appears in more than one layer");
        }
        Node& merged = nodes[it->second];
        merged.modes = merged.modes | n.modes;
        auto& member = node_layers[it->second];
        if (std::find(member.begin(), member.end(), l) == member.end()) member.push_back(l);
        continue;
      }
      seen.emplace(n.id, nodes.size());
      nodes.push_back(n);
      node_layers.push_back({l});
    }
    const std::size_t line_offset = lines.size();
    for (const Edge& e : layers[l].edges) {
      if (!edge_ids.insert(e.id).second) {
        throw OverlappingIds("edge id " + std::to_string(e.id.value) + " appears more than once");
      }
      Edge copy = e;
      if (copy.transit) copy.transit->line += line_offset;
      edges.push_back(std::move(copy));
    }
    lines.insert(lines.end(), layers[l].lines.begin(), layers[l].lines.end());
  }

  std::int64_t next_id = 0;
  for (const Edge& e : edges) next_id = std::max(next_id, e.id.value + 1);

  std::set<std::pair<std::size_t, std::size_t>> existing;
  for (const Edge& e : edges) {
    if (e.kind != EdgeKind::SwitchLink) continue;
    auto a = seen.find(e.from), b = seen.find(e.to);
    if (a != seen.end() && b != seen.end()) existing.emplace(a->second, b->second);
  }

  std::vector<Point> points;
  points.reserve(nodes.size());
  for (const Node& n : nodes) points.push_back(n.position);
  const KdTree index(points);

  auto disjoint = [&](std::size_t a, std::size_t b) {
    for (std::size_t la : node_layers[a]) {
      if (std::find(node_layers[b].begin(), node_layers[b].end(), la) != node_layers[b].end()) return false;
    }
    return true;
  };

  // Ordered by (from id, to id) so link ids are independent of query order.
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t u = 0; u < nodes.size(); ++u) {
    const double radius = nodes[u].link_radius.value_or(link_radius);
    for (std::size_t v : index.within(nodes[u].position, radius)) {
      if (v == u || !disjoint(u, v)) continue;
      if (!existing.contains({u, v})) pairs.emplace(nodes[u].id, nodes[v].id);
      if (!existing.contains({v, u})) pairs.emplace(nodes[v].id, nodes[u].id);
    }
  }

  std::map<std::pair<NodeId, NodeId>, const SwitchConditions*> override_lookup;
  for (const SwitchOverride& o : overrides) override_lookup[{o.from, o.to}] = &o.conditions;

  for (const auto& [from, to] : pairs) {
    const Node& a = nodes[seen.at(from)];
    const Node& b = nodes[seen.at(to)];
    Edge link;
    link.id = EdgeId{next_id++};
    link.from = from;
    link.to = to;
    link.modes = b.modes;
    link.kind = EdgeKind::SwitchLink;
    link.length = distance(a.position, b.position);
    if (auto it = override_lookup.find({from, to}); it != override_lookup.end()) {
      link.switch_conditions = *it->second;
    } else {
      link.switch_conditions = scm_defaults.for_target(b.modes);
    }
    edges.push_back(std::move(link));
  }

  for (const Edge& e : edges) {
    if (e.kind != EdgeKind::SwitchLink) continue;
    if (auto it = seen.find(e.from); it != seen.end()) nodes[it->second].is_switch = true;
    if (auto it = seen.find(e.to); it != seen.end()) nodes[it->second].is_switch = true;
  }

  return MultiModalGraph(std::move(nodes), std::move(edges), std::move(lines), link_radius);
}

MultiModalGraph merge_graphs(const MultiModalGraph& base, std::span<const UniModalGraph> layers,
                             const SwitchDefaults& scm_defaults) {
  std::vector<UniModalGraph> all;
  all.reserve(layers.size() + 1);
  UniModalGraph first;
  first.nodes.assign(base.nodes().begin(), base.nodes().end());
  first.edges.assign(base.edges().begin(), base.edges().end());
  first.lines.assign(base.lines().begin(), base.lines().end());
  all.push_back(std::move(first));
  all.insert(all.end(), layers.begin(), layers.end());
  return merge_graphs(all, base.link_radius(), scm_defaults);
}

UniModalGraph make_transit_layer(std::vector<Node> stops, std::vector<TransitLine> lines,
                                 std::int64_t first_edge_id) {
  UniModalGraph layer;
  std::unordered_map<NodeId, Point> where;
  for (const Node& n : stops) where.emplace(n.id, n.position);
  std::int64_t next = first_edge_id;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const TransitLine& line = lines[l];
    for (std::size_t k = 0; k + 1 < line.stops.size(); ++k) {
      Edge e;
      e.id = EdgeId{next++};
      e.from = line.stops[k];
      e.to = line.stops[k + 1];
      e.modes = ModeSet{Mode::Transit};
      e.kind = EdgeKind::TransitLeg;
      auto a = where.find(e.from), b = where.find(e.to);
      e.length = (a != where.end() && b != where.end()) ? distance(a->second, b->second) : 0.0;
      e.set_free_flow(Mode::Transit, k < line.leg_times.size() ? line.leg_times[k] : 0.0);
      e.capacity = line.vehicle_capacity;
      e.transit = TransitRef{l, k};
      layer.edges.push_back(std::move(e));
    }
  }
  layer.nodes = std::move(stops);
  layer.lines = std::move(lines);
  return layer;
}

std::vector<NodeId> nearest_within(const MultiModalGraph& graph, Point point, double radius) {
  std::vector<std::pair<double, NodeId>> hits;
  for (std::size_t i : graph.spatial_index().within(point, radius)) {
    hits.emplace_back(distance(graph.node(i).position, point), graph.node(i).id);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<NodeId> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(h.second);
  return out;
}

// ---------------------------------------------------------------------------
// Switch condition module

std::optional<Mode> traversal_mode(const Edge& edge, ModeSet carrying) {
  switch (edge.kind) {
    case EdgeKind::SwitchLink:
      return std::nullopt;
    case EdgeKind::TransitLeg:
      if (!edge.modes.contains(Mode::Transit) || carrying.contains(Mode::Car)) return std::nullopt;
      return Mode::Transit;
    case EdgeKind::Street:
      if (carrying.contains(Mode::Car)) {
        return edge.modes.contains(Mode::Car) ? std::optional<Mode>(Mode::Car) : std::nullopt;
      }
      if (carrying.contains(Mode::Bike)) {
        return edge.modes.contains(Mode::Bike) ? std::optional<Mode>(Mode::Bike) : std::nullopt;
      }
      if (edge.modes.contains(Mode::Walk)) return Mode::Walk;
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<ModeSet> switch_outcome(const Edge& edge, ModeSet carrying) {
  if (edge.kind != EdgeKind::SwitchLink) return carrying;
  const SwitchConditions c = edge.switch_conditions.value_or(SwitchConditions{});
  if (c.turn_restricted) return std::nullopt;

  ModeSet result = carrying;
  if (c.required_possession && !carrying.contains(*c.required_possession)) {
    if (!c.rental_available) return std::nullopt;
    result.insert(*c.required_possession);
  }
  for (Mode vehicle : {Mode::Car, Mode::Bike}) {
    if (!carrying.contains(vehicle) || edge.modes.contains(vehicle)) continue;
    if (c.storage_for.contains(vehicle)) continue;
    if (!c.parking_available) return std::nullopt;
    result.erase(vehicle);
  }
  return result;
}

bool evaluate_scm(const Edge& edge, const UserProfile& profile, double tau, const PossessionState& possession,
                  double spent) {
  if (edge.kind != EdgeKind::SwitchLink) return traversal_mode(edge, possession.carrying).has_value();

  const SwitchConditions c = edge.switch_conditions.value_or(SwitchConditions{});
  if (c.service_window) {
    const auto [open, close] = *c.service_window;
    double t = std::fmod(tau, kSecondsPerDay);
    if (t < 0) t += kSecondsPerDay;
    const bool inside = open <= close ? (t >= open && t < close) : (t >= open || t < close);
    if (!inside) return false;
  }
  if (!switch_outcome(edge, possession.carrying)) return false;
  const double cost = c.switch_cost + c.toll;
  const double bound = std::min(c.max_cost.value_or(kUnbounded), profile.budget - spent);
  return cost <= bound;
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_graph(const MultiModalGraph& graph) {
  ValidationReport report;
  auto add = [&](std::string s) { report.findings.push_back(std::move(s)); };
  auto edge_name = [](const Edge& e) { return "edge " + std::to_string(e.id.value); };

  std::unordered_set<NodeId> node_ids;
  for (const Node& n : graph.nodes()) {
    if (!node_ids.insert(n.id).second) add("node " + std::to_string(n.id.value) + ": duplicate id");
    if (n.link_radius && *n.link_radius < 0) add("node " + std::to_string(n.id.value) + ": negative link radius");
  }
  std::unordered_set<EdgeId> edge_ids;
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    const Edge& e = graph.edge(i);
    const std::string name = edge_name(e);
    if (!edge_ids.insert(e.id).second) add(name + ": duplicate id");
    if (graph.source(i) == MultiModalGraph::npos) add(name + ": from node " + std::to_string(e.from.value) + " does not exist");
    if (graph.target(i) == MultiModalGraph::npos) add(name + ": to node " + std::to_string(e.to.value) + " does not exist");
    if (e.length < 0) add(name + ": negative length");
    if (e.modes.empty()) add(name + ": no modes");

    if (e.kind == EdgeKind::Street) {
      if (e.modes.contains(Mode::Car)) {
        if (!(e.capacity > 0.0)) add(name + ": non-positive capacity on car edge");
        if (!(e.free_flow(Mode::Car) > 0.0)) add(name + ": non-positive free-flow time on car edge");
        if (e.bpr_alpha < 0.0) add(name + ": negative BPR alpha");
        if (e.bpr_beta < 1.0) add(name + ": BPR beta below 1");
      }
      for (Mode m : {Mode::Walk, Mode::Bike}) {
        if (e.modes.contains(m) && e.free_flow(m) <= 0.0 && e.length <= 0.0) {
          add(name + ": non-positive length on " + std::string(to_string(m)) + " edge");
        }
      }
    }
    if (e.kind == EdgeKind::TransitLeg) {
      if (!e.transit || e.transit->line >= graph.lines().size()) add(name + ": transit leg without a line");
      if (!(e.free_flow(Mode::Transit) > 0.0)) add(name + ": non-positive transit leg time");
    }
    if (e.kind == EdgeKind::SwitchLink) {
      if (!e.switch_conditions) {
        add(name + ": switch link without conditions");
      } else {
        if (e.switch_conditions->switch_time < 0) add(name + ": negative switch time");
        if (e.switch_conditions->switch_cost < 0) add(name + ": negative switch cost");
      }
      const std::size_t s = graph.source(i), t = graph.target(i);
      if (s != MultiModalGraph::npos && t != MultiModalGraph::npos) {
        if (graph.node(s).modes == graph.node(t).modes) add(name + ": switch link between nodes of equal modes");
        const double radius = std::max(graph.link_radius_of(s), graph.link_radius_of(t));
        if (e.length > radius + 1e-9) add(name + ": switch link longer than link radius");
      }
    }
  }

  std::unordered_set<std::size_t> boardable;
  for (std::size_t i = 0; i < graph.edge_count(); ++i) {
    if (graph.edge(i).kind != EdgeKind::SwitchLink) continue;
    if (graph.source(i) != MultiModalGraph::npos) boardable.insert(graph.source(i));
    if (graph.target(i) != MultiModalGraph::npos) boardable.insert(graph.target(i));
  }
  for (const TransitLine& line : graph.lines()) {
    const std::string name = "line " + std::to_string(line.id.value);
    if (line.stops.size() < 2) add(name + ": fewer than two stops");
    if (line.leg_times.size() + 1 != line.stops.size()) add(name + ": leg count does not match stops");
    for (double t : line.leg_times) {
      if (!(t > 0.0)) {
        add(name + ": non-positive leg time");
        break;
      }
    }
    for (std::size_t j = 1; j < line.departures.size(); ++j) {
      if (!(line.departures[j] > line.departures[j - 1])) {
        add(name + ": departures not strictly increasing");
        break;
      }
    }
    if (line.vehicle_capacity <= 0) add(name + ": non-positive vehicle capacity");
    for (NodeId stop : line.stops) {
      auto idx = graph.node_index(stop);
      if (!idx) {
        add(name + ": stop " + std::to_string(stop.value) + " does not exist");
      } else if (!boardable.contains(*idx)) {
        add(name + ": stop " + std::to_string(stop.value) + " is unreachable (no switch link)");
      }
    }
  }
  return report;
}

}  // namespace mmr
