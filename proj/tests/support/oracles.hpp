#pragma once

// Independent reference implementations and random generators shared by the
// unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "mmr/congestion.hpp"
#include "mmr/error.hpp"
#include "mmr/network.hpp"
#include "mmr/plan.hpp"
#include "mmr/routing.hpp"
#include "mmr/simulation.hpp"

namespace mmr::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Brute-force reference for predicted congestion: a flat sorted list.

class NaiveIntervalList {
 public:
  struct Item {
    double start;
    double end;
    int value;
    std::uint64_t key;
  };

  void add(double start, double end, int value, std::uint64_t key) {
    Item item{start, end, value, key};
    auto pos = std::upper_bound(items_.begin(), items_.end(), item, [](const Item& a, const Item& b) {
      return std::tie(a.start, a.key) < std::tie(b.start, b.key);
    });
    items_.insert(pos, item);
  }
  bool remove(std::uint64_t key) {
    auto it = std::find_if(items_.begin(), items_.end(), [&](const Item& i) { return i.key == key; });
    if (it == items_.end()) return false;
    items_.erase(it);
    return true;
  }
  // Half-open intervals; a zero-width query window is a point query.
  long long overlap_sum(double lo, double hi) const {
    long long sum = 0;
    for (const Item& i : items_) {
      const bool hit = lo == hi ? (i.start <= lo && lo < i.end) : (i.start < hi && lo < i.end);
      if (hit) sum += i.value;
    }
    return sum;
  }
  std::size_t size() const { return items_.size(); }
  const std::vector<Item>& items() const { return items_; }

 private:
  std::vector<Item> items_;
};

// ---------------------------------------------------------------------------
// Random small multi-modal DAGs. Edges only run from lower to higher node
// index, so every path is simple and exhaustive enumeration terminates.

struct RandomNetwork {
  MultiModalGraph graph;
  UserProfile profile;
  BackgroundProfile background;
  std::vector<double> live;  // per edge
  std::vector<std::size_t> car_edges;
  std::vector<std::size_t> transit_edges;
};

inline SwitchConditions random_conditions(Rng& rng, ModeSet modes) {
  SwitchConditions c;
  if (rng.chance(0.4)) {
    std::vector<Mode> vehicles;
    for (Mode m : {Mode::Car, Mode::Bike}) {
      if (modes.contains(m)) vehicles.push_back(m);
    }
    if (!vehicles.empty()) c.required_possession = rng.pick(vehicles);
  }
  c.parking_available = rng.chance(0.75);
  c.rental_available = rng.chance(0.25);
  if (rng.chance(0.3)) c.storage_for.insert(Mode::Bike);
  c.switch_cost = rng.chance(0.5) ? 0.0 : static_cast<double>(rng.integer(1, 4));
  c.switch_time = static_cast<double>(rng.integer(0, 60));
  if (rng.chance(0.2)) c.max_cost = static_cast<double>(rng.integer(0, 3));
  return c;
}

inline RandomNetwork random_network(Rng& rng, int max_nodes = 12) {
  const int n = rng.integer(3, max_nodes);
  // Up to three modes per graph.
  std::vector<Mode> pool{Mode::Walk, Mode::Bike, Mode::Car, Mode::Transit};
  std::shuffle(pool.begin(), pool.end(), rng.engine());
  pool.resize(static_cast<std::size_t>(rng.integer(1, 3)));
  const ModeSet allowed = [&] {
    ModeSet s;
    for (Mode m : pool) s.insert(m);
    return s;
  }();
  std::vector<Mode> street_modes;
  for (Mode m : {Mode::Walk, Mode::Bike, Mode::Car}) {
    if (allowed.contains(m)) street_modes.push_back(m);
  }

  std::vector<Node> nodes;
  for (int i = 0; i < n; ++i) {
    Node node;
    node.id = NodeId{i + 1};
    // Roughly increasing x so the straight-line bound stays meaningful.
    node.position = {150.0 * i + rng.uniform(0.0, 100.0), rng.uniform(0.0, 300.0)};
    nodes.push_back(node);
  }

  std::vector<Edge> edges;
  std::vector<TransitLine> lines;
  std::int64_t next_id = 1;
  auto base_edge = [&](int i, int j) {
    Edge e;
    e.id = EdgeId{next_id++};
    e.from = nodes[static_cast<std::size_t>(i)].id;
    e.to = nodes[static_cast<std::size_t>(j)].id;
    e.length = distance(nodes[static_cast<std::size_t>(i)].position, nodes[static_cast<std::size_t>(j)].position) *
               rng.uniform(1.0, 1.3);
    return e;
  };

  if (allowed.contains(Mode::Transit)) {
    const int count = rng.integer(1, 2);
    for (int l = 0; l < count; ++l) {
      std::vector<int> stops;
      for (int i = 0; i < n; ++i) {
        if (rng.chance(0.5)) stops.push_back(i);
      }
      if (stops.size() < 2) continue;
      TransitLine line;
      line.id = LineId{l + 1};
      for (int s : stops) line.stops.push_back(nodes[static_cast<std::size_t>(s)].id);
      const double headway = rng.uniform(60.0, 400.0);
      for (double t = rng.uniform(0.0, 200.0); t < 3000.0; t += headway) line.departures.push_back(t);
      line.vehicle_capacity = rng.integer(1, 3);
      for (std::size_t k = 0; k + 1 < stops.size(); ++k) {
        Edge e = base_edge(stops[k], stops[k + 1]);
        e.modes = ModeSet{Mode::Transit};
        e.kind = EdgeKind::TransitLeg;
        const double leg = std::max(1.0, e.length / rng.uniform(5.0, 15.0));
        line.leg_times.push_back(leg);
        e.set_free_flow(Mode::Transit, leg);
        e.capacity = line.vehicle_capacity;
        e.transit = TransitRef{lines.size(), k};
        e.monetary_cost = rng.chance(0.5) ? 1.0 : 0.0;
        edges.push_back(e);
      }
      lines.push_back(std::move(line));
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!street_modes.empty() && rng.chance(std::min(0.7, 2.2 / (j - i + 0.5)))) {
        Edge e = base_edge(i, j);
        for (Mode m : street_modes) {
          if (rng.chance(0.6)) e.modes.insert(m);
        }
        if (e.modes.empty()) e.modes.insert(rng.pick(street_modes));
        if (e.modes.contains(Mode::Car)) {
          e.set_free_flow(Mode::Car, std::max(1.0, e.length / rng.uniform(8.0, 15.0)));
          e.capacity = rng.integer(1, 4);
        }
        if (rng.chance(0.3)) e.monetary_cost = static_cast<double>(rng.integer(1, 3));
        edges.push_back(e);
      }
      if (rng.chance(0.12)) {
        Edge link = base_edge(i, j);
        link.kind = EdgeKind::SwitchLink;
        for (Mode m : pool) {
          if (rng.chance(0.6)) link.modes.insert(m);
        }
        if (link.modes.empty()) link.modes = allowed;
        link.switch_conditions = random_conditions(rng, allowed);
        edges.push_back(link);
      }
    }
  }

  for (const Edge& e : edges) {
    for (Node& node : nodes) {
      if (node.id == e.from || node.id == e.to) node.modes = node.modes | e.modes;
    }
  }

  RandomNetwork net;
  net.graph = MultiModalGraph(std::move(nodes), std::move(edges), std::move(lines), 1000.0);
  net.profile.owns_car = rng.chance(0.6);
  net.profile.owns_bike = rng.chance(0.4);
  net.profile.budget = rng.chance(0.3) ? static_cast<double>(rng.integer(0, 6)) : kUnbounded;
  net.live.assign(net.graph.edge_count(), 0.0);
  for (std::size_t e = 0; e < net.graph.edge_count(); ++e) {
    const Edge& edge = net.graph.edge(e);
    if (edge.has_bpr()) {
      net.car_edges.push_back(e);
      if (rng.chance(0.4)) {
        const double a = rng.uniform(0.0, 1500.0);
        net.background.set(edge.id, {{a, a + rng.uniform(100.0, 1500.0), static_cast<double>(rng.integer(0, 3))}});
      }
      if (rng.chance(0.3)) net.live[e] = rng.integer(0, 2);
    }
    if (edge.kind == EdgeKind::TransitLeg) net.transit_edges.push_back(e);
  }
  return net;
}

/// Random committed plans: car intervals on car edges and seats on transit runs.
inline void fill_ledger(Rng& rng, const RandomNetwork& net, CongestionLedger& ledger, int plans) {
  for (int p = 0; p < plans; ++p) {
    RoutePlan plan;
    {
      PlanLeg leg;
      const bool transit = !net.transit_edges.empty() && (net.car_edges.empty() || rng.chance(0.3));
      if (transit) {
        leg.edge = rng.pick(net.transit_edges);
        leg.mode = Mode::Transit;
        const Edge& e = net.graph.edge(leg.edge);
        const TransitLine& line = net.graph.lines()[e.transit->line];
        const auto [index, when] = line.next_departure(e.transit->leg, rng.uniform(0.0, 1500.0));
        leg.departure = index;
        leg.enter = when;
        leg.exit = when + line.leg_times[e.transit->leg];
      } else if (!net.car_edges.empty()) {
        leg.edge = rng.pick(net.car_edges);
        leg.mode = Mode::Car;
        leg.enter = rng.uniform(0.0, 1500.0);
        leg.exit = leg.enter + rng.uniform(20.0, 400.0);
      } else {
        return;
      }
      leg.edge_id = net.graph.edge(leg.edge).id;
      plan.legs.push_back(leg);
    }
    try {
      ledger.add_user_plan(plan, AgentId{1000 + p});
    } catch (const TransitOverCapacity&) {
      // A full run stays full; the plan is simply not committed.
    }
  }
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration of every path from the origin, for every admissible
// starting possession, using the provider only to list admissible steps.

inline std::vector<CostVector> pareto_filter(std::vector<CostVector> costs) {
  std::vector<CostVector> out;
  for (const CostVector& c : costs) {
    bool beaten = false;
    for (const CostVector& d : costs) {
      if (dominates(d, c)) {
        beaten = true;
        break;
      }
    }
    if (beaten) continue;
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const CostVector& a, const CostVector& b) {
    return std::tie(a.travel_time, a.money, a.transfers) < std::tie(b.travel_time, b.money, b.transfers);
  });
  return out;
}

inline std::vector<ModeSet> starting_possessions(const RouteQuery& query) {
  if (query.initial_carrying) return {*query.initial_carrying};
  std::vector<ModeSet> out{ModeSet{}};
  if (query.profile.owns_car) out.push_back(ModeSet{Mode::Car});
  if (query.profile.owns_bike) out.push_back(ModeSet{Mode::Bike});
  if (query.profile.owns_car && query.profile.owns_bike) out.push_back(ModeSet{Mode::Car, Mode::Bike});
  return out;
}

/// Every complete path's cost, then the non-dominated subset.
inline std::vector<CostVector> brute_force_pareto(const MultiModalGraph& graph, const RouteQuery& query,
                                                  const EdgeProvider& provider) {
  const std::size_t origin = *graph.node_index(query.origin);
  const std::size_t dest = *graph.node_index(query.destination);
  std::vector<CostVector> complete;
  std::vector<std::optional<Mode>> modes;

  auto count_changes = [&] {
    double changes = 0;
    std::optional<Mode> last;
    for (const auto& m : modes) {
      if (!m) continue;
      if (last && *last != *m) changes += 1;
      last = m;
    }
    return changes;
  };

  auto dfs = [&](auto&& self, std::size_t node, double time, ModeSet carrying, double money) -> void {
    if (node == dest) {
      complete.push_back({time - query.departure, money, count_changes()});
      return;
    }
    std::vector<Transition> steps;
    provider.expand(node, query.profile, time, carrying, money, steps);
    for (const Transition& s : steps) {
      modes.push_back(s.mode);
      self(self, graph.target(s.edge), s.exit, s.carrying, money + s.money);
      modes.pop_back();
    }
  };
  if (origin == dest) return {CostVector{}};
  for (ModeSet start : starting_possessions(query)) dfs(dfs, origin, query.departure, start, 0.0);
  return pareto_filter(std::move(complete));
}

inline std::vector<CostVector> plan_costs(const std::vector<RoutePlan>& plans) {
  std::vector<CostVector> out;
  for (const RoutePlan& p : plans) out.push_back(p.cost);
  return out;
}

// ---------------------------------------------------------------------------
// Admission audit: replays the commit log in issue order and reports the
// largest number of concurrently committed car plans seen on any edge,
// relative to ceil(alpha * capacity). Returns the worst excess (<= 0 is fine).

struct AdmissionAudit {
  double worst_excess = -1e300;
  std::size_t checked_edges = 0;
  std::size_t commits = 0;
};

inline AdmissionAudit audit_admission(const MultiModalGraph& graph, const RunResult& run) {
  AdmissionAudit audit;
  std::map<std::size_t, std::vector<std::pair<double, double>>> committed;
  for (const CommitRecord& c : run.commits) {
    ++audit.commits;
    for (const auto& iv : c.car_intervals) committed[iv.edge].emplace_back(iv.start, iv.end);
    for (const auto& iv : c.car_intervals) {
      // Peak concurrency of half-open intervals on this edge, checked at every start.
      const auto& list = committed[iv.edge];
      int peak = 0;
      for (const auto& [s, e] : list) {
        int here = 0;
        for (const auto& [s2, e2] : list) here += (s2 <= s && s < e2) ? 1 : 0;
        peak = std::max(peak, here);
      }
      const double bound = std::ceil(run.alpha * graph.edge(iv.edge).capacity);
      audit.worst_excess = std::max(audit.worst_excess, peak - bound);
      ++audit.checked_edges;
    }
  }
  return audit;
}

}  // namespace mmr::testing
