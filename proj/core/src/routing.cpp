#include "mmr/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "mmr/error.hpp"

namespace mmr {

bool dominates(const CostVector& a, const CostVector& b) {
  const bool le = a.travel_time <= b.travel_time && a.money <= b.money && a.transfers <= b.transfers;
  const bool lt = a.travel_time < b.travel_time || a.money < b.money || a.transfers < b.transfers;
  return le && lt;
}

bool epsilon_dominates(const CostVector& a, const CostVector& b, double epsilon) {
  const double f = 1.0 + epsilon;
  return a.travel_time <= f * b.travel_time && a.money <= f * b.money && a.transfers <= f * b.transfers;
}

// ---------------------------------------------------------------------------
// Edge costs

CarLoad predict_car_load(const MultiModalGraph& graph, std::size_t edge, double tau, const NetworkState& state) {
  const Edge& e = graph.edge(edge);
  CarLoad load;
  if (state.background) load.others += state.background->volume(e.id, tau);
  if (edge < state.live_volume.size()) load.others += state.live_volume[edge];

  if (!state.ledger) {
    load.travel_time = bpr_travel_time(e, load.others + 1.0);
    load.window = load.travel_time;
    return load;
  }
  double window = state.lookahead > 0.0 ? state.lookahead : e.free_flow(Mode::Car);
  long long committed = state.ledger->committed_count(edge, tau, tau + window);
  double time = bpr_travel_time(e, load.others + static_cast<double>(committed) + 1.0);
  while (time > window) {
    window = time;
    const long long grown = state.ledger->committed_count(edge, tau, tau + window);
    if (grown == committed) break;
    committed = grown;
    time = bpr_travel_time(e, load.others + static_cast<double>(committed) + 1.0);
  }
  load.committed = committed;
  load.travel_time = time;
  load.window = window;
  return load;
}

std::optional<Transition> traverse(const MultiModalGraph& graph, std::size_t edge, const UserProfile& profile,
                                   double tau, ModeSet carrying, const NetworkState& state, CarLoad* load) {
  const Edge& e = graph.edge(edge);
  Transition t;
  t.edge = edge;
  t.carrying = carrying;
  t.enter = tau;
  t.money = e.monetary_cost;

  switch (e.kind) {
    case EdgeKind::SwitchLink: {
      const auto outcome = switch_outcome(e, carrying);
      if (!outcome) return std::nullopt;
      const SwitchConditions c = e.switch_conditions.value_or(SwitchConditions{});
      t.carrying = *outcome;
      t.exit = tau + c.switch_time;
      t.money += c.switch_cost + c.toll;
      return t;
    }
    case EdgeKind::TransitLeg: {
      t.mode = traversal_mode(e, carrying);
      if (!t.mode || !e.transit || e.transit->line >= graph.lines().size()) return std::nullopt;
      const TransitLine& line = graph.lines()[e.transit->line];
      const auto [index, when] = line.next_departure(e.transit->leg, tau);
      if (index < 0) return std::nullopt;
      t.departure = index;
      t.exit = when + line.leg_times[e.transit->leg];
      return t;
    }
    case EdgeKind::Street: {
      t.mode = traversal_mode(e, carrying);
      if (!t.mode) return std::nullopt;
      switch (*t.mode) {
        case Mode::Car:
          if (e.has_bpr()) {
            const CarLoad l = predict_car_load(graph, edge, tau, state);
            if (load) *load = l;
            t.exit = tau + l.travel_time;
          } else if (e.free_flow(Mode::Car) > 0.0) {
            t.exit = tau + e.free_flow(Mode::Car);
          } else {
            return std::nullopt;
          }
          return t;
        case Mode::Walk:
        case Mode::Bike: {
          const double explicit_time = e.free_flow(*t.mode);
          const double speed = *t.mode == Mode::Walk ? profile.walk_speed : profile.bike_speed;
          if (explicit_time > 0.0) {
            t.exit = tau + explicit_time;
          } else if (speed > 0.0) {
            t.exit = tau + e.length / speed;
          } else {
            return std::nullopt;
          }
          return t;
        }
        case Mode::Transit:
          return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Outgoing edge filters

namespace {

struct Admission {
  bool admitted = true;
  double ratio = 0.0;  // predicted load relative to capacity, for fallback ranking
};

Admission so_admission(const MultiModalGraph& graph, const NetworkState& state, const Transition& step,
                       const CarLoad& load, double alpha) {
  const Edge& e = graph.edge(step.edge);
  Admission a;
  if (step.mode == Mode::Car && e.has_bpr()) {
    const double predicted = load.others + static_cast<double>(load.committed);
    a.ratio = predicted / e.capacity;
    a.admitted = predicted < alpha * e.capacity;
  } else if (step.mode == Mode::Transit && state.ledger && step.departure) {
    const int capacity = state.ledger->seat_capacity(step.edge);
    const int taken = state.ledger->occupancy(step.edge, *step.departure);
    a.ratio = capacity > 0 ? static_cast<double>(taken) / capacity : 1.0;
    a.admitted = taken < capacity;
  }
  return a;
}

}  // namespace

std::vector<std::size_t> outgoing_edges_uo(const MultiModalGraph& graph, std::size_t node,
                                           const UserProfile& profile, double tau,
                                           const PossessionState& possession, double spent) {
  std::vector<std::size_t> out;
  for (std::uint32_t e : graph.out_edges(node)) {
    if (evaluate_scm(graph.edge(e), profile, tau, possession, spent)) out.push_back(e);
  }
  return out;
}

std::vector<std::size_t> outgoing_edges_so(const MultiModalGraph& graph, const NetworkState& state,
                                           std::size_t node, const UserProfile& profile, double tau,
                                           const PossessionState& possession, double alpha, double spent) {
  std::vector<std::size_t> out;
  for (std::size_t e : outgoing_edges_uo(graph, node, profile, tau, possession, spent)) {
    CarLoad load;
    const auto step = traverse(graph, e, profile, tau, possession.carrying, state, &load);
    if (!step) continue;
    if (so_admission(graph, state, *step, load, alpha).admitted) out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Providers

UserOptimalProvider::UserOptimalProvider(const MultiModalGraph& graph, NetworkState state)
    : EdgeProvider(graph, state) {
  state_.ledger = nullptr;
}

void UserOptimalProvider::expand(std::size_t node, const UserProfile& profile, double tau, ModeSet carrying,
                                 double spent, std::vector<Transition>& out) const {
  const PossessionState possession{carrying, {}};
  for (std::uint32_t e : graph_->out_edges(node)) {
    if (!evaluate_scm(graph_->edge(e), profile, tau, possession, spent)) continue;
    if (auto step = traverse(*graph_, e, profile, tau, carrying, state_)) out.push_back(*step);
  }
}

SocialOptimalProvider::SocialOptimalProvider(const MultiModalGraph& graph, NetworkState state, double alpha,
                                             bool allow_fallback)
    : EdgeProvider(graph, state), alpha_(alpha), allow_fallback_(allow_fallback) {}

void SocialOptimalProvider::expand(std::size_t node, const UserProfile& profile, double tau, ModeSet carrying,
                                   double spent, std::vector<Transition>& out) const {
  const PossessionState possession{carrying, {}};
  const std::size_t first = out.size();
  std::optional<Transition> least;
  double least_ratio = std::numeric_limits<double>::infinity();
  for (std::uint32_t e : graph_->out_edges(node)) {
    if (!evaluate_scm(graph_->edge(e), profile, tau, possession, spent)) continue;
    CarLoad load;
    auto step = traverse(*graph_, e, profile, tau, carrying, state_, &load);
    if (!step) continue;
    const Admission a = so_admission(*graph_, state_, *step, load, alpha_);
    if (a.admitted) {
      out.push_back(*step);
    } else if (a.ratio < least_ratio && !(step->mode == Mode::Transit && a.ratio >= 1.0)) {
      least_ratio = a.ratio;
      least = step;
    }
  }
  if (out.size() == first && least && allow_fallback_) {
    least->fallback = true;
    out.push_back(*least);
  }
}

// ---------------------------------------------------------------------------
// Search

CostVector heuristic(const MultiModalGraph& graph, std::size_t node, const RouteQuery& query) {
  const auto dest = graph.node_index(query.destination);
  if (!dest) return {};
  const double speed = std::max({graph.max_static_speed(), query.profile.walk_speed, query.profile.bike_speed});
  if (!std::isfinite(speed) || speed <= 0.0) return {};
  return {distance(graph.node(node).position, graph.node(*dest).position) / speed, 0.0, 0.0};
}

namespace {

constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();
constexpr int kModeSlots = 5;  // four modes + "none yet"

int carry_bits(ModeSet s) { return (s.contains(Mode::Car) ? 1 : 0) | (s.contains(Mode::Bike) ? 2 : 0); }

struct Label {
  std::size_t node = 0;
  ModeSet carrying;
  int last_mode = -1;
  CostVector cost;
  double time = 0.0;
  std::uint32_t parent = kNoParent;
  Transition step;
  bool fallback = false;
  bool alive = true;
};

struct QueueEntry {
  double f_time;
  double money;
  double transfers;
  std::uint32_t id;
  bool operator>(const QueueEntry& o) const {
    if (f_time != o.f_time) return f_time > o.f_time;
    if (money != o.money) return money > o.money;
    if (transfers != o.transfers) return transfers > o.transfers;
    return id > o.id;
  }
};

bool lex_less(const CostVector& a, const CostVector& b) {
  if (a.travel_time != b.travel_time) return a.travel_time < b.travel_time;
  if (a.money != b.money) return a.money < b.money;
  return a.transfers < b.transfers;
}

CostVector add(const CostVector& a, const CostVector& b) {
  return {a.travel_time + b.travel_time, a.money + b.money, a.transfers + b.transfers};
}

}  // namespace

std::vector<RoutePlan> moa_star(const MultiModalGraph& graph, const RouteQuery& query, const EdgeProvider& provider,
                                const SearchOptions& options, SearchStats* stats) {
  const auto origin = graph.node_index(query.origin);
  const auto dest = graph.node_index(query.destination);
  if (!origin || !dest) throw NoPath("unknown origin or destination node");

  std::vector<ModeSet> starts;
  if (query.initial_carrying) {
    starts.push_back(*query.initial_carrying);
  } else {
    ModeSet owned;
    if (query.profile.owns_car) owned.insert(Mode::Car);
    if (query.profile.owns_bike) owned.insert(Mode::Bike);
    for (int bits = 0; bits < 4; ++bits) {
      const ModeSet s = ModeSet::from_bits(static_cast<std::uint8_t>(
          ((bits & 1) ? (1u << index_of(Mode::Car)) : 0u) | ((bits & 2) ? (1u << index_of(Mode::Bike)) : 0u)));
      if (s.is_subset_of(owned)) starts.push_back(s);
    }
  }

  if (*origin == *dest) {
    RoutePlan plan;
    plan.origin = query.origin;
    plan.destination = query.destination;
    plan.departure = query.departure;
    plan.carrying_at_start = starts.empty() ? ModeSet{} : starts.front();
    return {plan};
  }

  std::vector<Label> labels;
  std::vector<std::vector<std::uint32_t>> at_state(graph.node_count() * 4 * kModeSlots);
  std::vector<std::uint32_t> solutions;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
  std::vector<CostVector> h_cache(graph.node_count(), CostVector{-1.0, 0.0, 0.0});
  auto h = [&](std::size_t node) {
    if (!options.use_heuristic) return CostVector{};
    if (h_cache[node].travel_time < 0.0) h_cache[node] = heuristic(graph, node, query);
    return h_cache[node];
  };
  auto state_key = [&](const Label& l) {
    return (l.node * 4 + static_cast<std::size_t>(carry_bits(l.carrying))) * kModeSlots +
           static_cast<std::size_t>(l.last_mode + 1);
  };
  auto pruned_by_solutions = [&](const CostVector& bound) {
    for (std::uint32_t s : solutions) {
      if (labels[s].alive && epsilon_dominates(labels[s].cost, bound, options.epsilon)) return true;
    }
    return false;
  };

  auto insert = [&](Label label) {
    auto& bucket = at_state[state_key(label)];
    for (std::uint32_t other : bucket) {
      if (epsilon_dominates(labels[other].cost, label.cost, options.epsilon)) return;
    }
    std::erase_if(bucket, [&](std::uint32_t other) {
      if (epsilon_dominates(label.cost, labels[other].cost, 0.0)) {
        labels[other].alive = false;
        return true;
      }
      return false;
    });
    if (labels.size() >= options.max_labels) {
      throw Error("label limit of " + std::to_string(options.max_labels) + " exceeded");
    }
    const auto id = static_cast<std::uint32_t>(labels.size());
    labels.push_back(std::move(label));
    bucket.push_back(id);
    const Label& l = labels.back();
    if (l.node == *dest) {
      std::erase_if(solutions, [&](std::uint32_t s) {
        if (!labels[s].alive) return true;
        if (epsilon_dominates(l.cost, labels[s].cost, 0.0)) {
          labels[s].alive = false;
          return true;
        }
        return false;
      });
      solutions.push_back(id);
    } else {
      const CostVector f = add(l.cost, h(l.node));
      open.push({f.travel_time, f.money, f.transfers, id});
    }
  };

  for (ModeSet s : starts) {
    Label root;
    root.node = *origin;
    root.carrying = s;
    root.time = query.departure;
    insert(root);
  }

  std::vector<Transition> steps;
  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    if (!labels[top.id].alive) continue;
    const Label current = labels[top.id];
    if (pruned_by_solutions(add(current.cost, h(current.node)))) continue;
    if (stats) ++stats->labels_expanded;

    steps.clear();
    provider.expand(current.node, query.profile, current.time, current.carrying, current.cost.money, steps);
    for (const Transition& step : steps) {
      Label next;
      next.node = graph.target(step.edge);
      next.carrying = step.carrying;
      next.time = step.exit;
      next.parent = top.id;
      next.step = step;
      next.fallback = current.fallback || step.fallback;
      next.cost.travel_time = step.exit - query.departure;
      next.cost.money = current.cost.money + step.money;
      next.cost.transfers = current.cost.transfers;
      next.last_mode = current.last_mode;
      if (step.mode) {
        const int m = static_cast<int>(index_of(*step.mode));
        if (current.last_mode >= 0 && current.last_mode != m) next.cost.transfers += 1.0;
        next.last_mode = m;
      }
      if (pruned_by_solutions(add(next.cost, h(next.node)))) continue;
      insert(std::move(next));
    }
  }
  if (stats) stats->labels_created += labels.size();

  std::vector<std::uint32_t> found;
  for (std::uint32_t s : solutions) {
    if (labels[s].alive) found.push_back(s);
  }
  if (found.empty()) {
    throw NoPath("no path from node " + std::to_string(query.origin.value) + " to node " +
                 std::to_string(query.destination.value));
  }
  // Solutions from different possession states may still dominate or equal each other.
  std::sort(found.begin(), found.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (lex_less(labels[a].cost, labels[b].cost)) return true;
    if (lex_less(labels[b].cost, labels[a].cost)) return false;
    return a < b;
  });
  std::vector<std::uint32_t> kept;
  for (std::uint32_t s : found) {
    const bool covered = std::any_of(kept.begin(), kept.end(), [&](std::uint32_t k) {
      return epsilon_dominates(labels[k].cost, labels[s].cost, options.epsilon);
    });
    if (!covered) kept.push_back(s);
  }

  std::vector<RoutePlan> plans;
  plans.reserve(kept.size());
  for (std::uint32_t s : kept) {
    RoutePlan plan;
    plan.origin = query.origin;
    plan.destination = query.destination;
    plan.departure = query.departure;
    plan.cost = labels[s].cost;
    plan.fallback = labels[s].fallback;
    std::uint32_t id = s;
    while (labels[id].parent != kNoParent) {
      const Transition& step = labels[id].step;
      plan.legs.push_back(PlanLeg{step.edge, graph.edge(step.edge).id, step.mode, step.enter, step.exit,
                                  step.departure});
      id = labels[id].parent;
    }
    plan.carrying_at_start = labels[id].carrying;
    std::reverse(plan.legs.begin(), plan.legs.end());
    plans.push_back(std::move(plan));
  }
  return plans;
}

const RoutePlan& select_route(std::span<const RoutePlan> pareto, const UserProfile& profile) {
  if (pareto.empty()) throw EmptySet("cannot select from an empty plan set");

  std::array<double, 3> w = profile.objective_weights;
  double sum = 0.0;
  for (double& x : w) {
    x = std::max(x, 0.0);
    sum += x;
  }
  if (sum > 0.0) {
    for (double& x : w) x /= sum;
  } else {
    w = {1.0, 0.0, 0.0};
  }

  std::array<double, 3> scale{0.0, 0.0, 0.0};
  for (const RoutePlan& p : pareto) {
    scale[0] = std::max(scale[0], p.cost.travel_time);
    scale[1] = std::max(scale[1], p.cost.money);
    scale[2] = std::max(scale[2], p.cost.transfers);
  }
  auto score = [&](const RoutePlan& p) {
    const std::array<double, 3> c{p.cost.travel_time, p.cost.money, p.cost.transfers};
    double s = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      if (scale[k] > 0.0) s += w[k] * c[k] / scale[k];
    }
    return s;
  };
  auto tie_less = [](const RoutePlan& a, const RoutePlan& b) {
    if (lex_less(a.cost, b.cost)) return true;
    if (lex_less(b.cost, a.cost)) return false;
    return std::lexicographical_compare(a.legs.begin(), a.legs.end(), b.legs.begin(), b.legs.end(),
                                        [](const PlanLeg& x, const PlanLeg& y) { return x.edge_id < y.edge_id; });
  };

  std::size_t best = 0;
  double best_score = score(pareto[0]);
  for (std::size_t i = 1; i < pareto.size(); ++i) {
    const double s = score(pareto[i]);
    const double tol = 1e-12 * std::max(1.0, std::abs(best_score));
    if (s < best_score - tol || (std::abs(s - best_score) <= tol && tie_less(pareto[i], pareto[best]))) {
      best = i;
      best_score = s;
    }
  }
  return pareto[best];
}

}  // namespace mmr
