#include "mmr/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <thread>

#include "mmr/error.hpp"

namespace mmr {

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::string_view to_string(TripStatus s) {
  switch (s) {
    case TripStatus::Arrived: return "arrived";
    case TripStatus::Unroutable: return "unroutable";
    case TripStatus::Unfinished: return "unfinished";
  }
  return "unknown";
}

double normalized_travel_time(double actual, double best, bool* floored) {
  if (!(best > 0.0)) throw ZeroBest("best travel time must be positive");
  const double ntt = (actual - best) / best;
  if (floored) *floored = ntt < 0.0;
  return std::max(ntt, 0.0);
}

std::vector<std::array<double, 2>> best_travel_times(const MultiModalGraph& graph, std::span<const Agent> agents,
                                                      const SimulationConfig& config) {
  const UserOptimalProvider provider(graph, NetworkState{});
  SearchOptions options;
  options.epsilon = config.epsilon;
  options.max_labels = config.max_labels;
  auto fastest = [&](NodeId from, NodeId to, double departure, const UserProfile& profile) {
    try {
      const auto plans = moa_star(graph, RouteQuery{from, to, departure, profile, std::nullopt}, provider, options);
      double best = std::numeric_limits<double>::infinity();
      for (const RoutePlan& p : plans) best = std::min(best, p.cost.travel_time);
      return best;
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  std::vector<std::array<double, 2>> out;
  out.reserve(agents.size());
  for (const Agent& a : agents) {
    std::array<double, 2> row{fastest(a.origin, a.destination, a.departure, a.profile), 0.0};
    if (config.return_trips && a.return_departure) {
      row[1] = fastest(a.destination, a.origin, *a.return_departure, a.profile);
    }
    out.push_back(row);
  }
  return out;
}

namespace {

enum class EventKind { Depart, Advance };

struct Event {
  double time;
  std::int64_t agent;
  std::uint64_t seq;
  EventKind kind;
  std::size_t trip;  // index into RunResult::trips

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    if (agent != o.agent) return agent > o.agent;
    return seq > o.seq;
  }
};

struct ActiveTrip {
  std::size_t next_leg = 0;
  ModeSet carrying;
  std::optional<std::size_t> car_edge;  // edge whose live count includes this agent
};

class Run {
 public:
  Run(const MultiModalGraph& graph, std::span<const Agent> agents, double alpha, const SimulationConfig& config,
      const BackgroundProfile* background, std::span<const std::array<double, 2>> best)
      : graph_(graph),
        agents_(agents),
        alpha_(alpha),
        config_(config),
        background_(background),
        best_(best),
        ledger_(graph),
        live_(graph.edge_count(), 0.0) {
    options_.epsilon = config.epsilon;
    options_.max_labels = config.max_labels;
  }

  RunResult execute() {
    result_.alpha = alpha_;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      const Agent& a = agents_[i];
      index_of_agent_[a.id.value] = i;
      result_.phases.push_back({-std::numeric_limits<double>::infinity(), a.id, AgentPhase::NotDeparted, {}});
      schedule(a.departure, a.id, EventKind::Depart, add_trip(a, 0, a.departure));
    }

    while (!queue_.empty()) {
      const Event ev = queue_.top();
      if (ev.time > config_.horizon_s) break;
      queue_.pop();
      if (ev.kind == EventKind::Depart) {
        depart(ev.trip, ev.time);
      } else {
        advance(ev.trip, ev.time);
      }
    }

    for (TripRecord& t : result_.trips) {
      if (t.status == TripStatus::Unfinished) ++result_.diagnostics.unfinished;
    }
    // Return trips that never started because the onward leg did not finish.
    for (const Agent& a : agents_) {
      if (!config_.return_trips || !a.return_departure || has_return_.contains(a.id.value)) continue;
      add_trip(a, 1, *a.return_departure);
      TripRecord& t = result_.trips.back();
      const TripRecord& onward = result_.trips[first_trip_.at(a.id.value)];
      t.status = onward.status == TripStatus::Unroutable ? TripStatus::Unroutable : TripStatus::Unfinished;
      if (t.status == TripStatus::Unfinished) {
        ++result_.diagnostics.unfinished;
      } else {
        ++result_.diagnostics.unroutable;
      }
    }
    summarize_agents();
    result_.ledger_empty_at_end = ledger_.empty();
    return std::move(result_);
  }

 private:
  std::size_t add_trip(const Agent& a, int leg, double departure) {
    TripRecord t;
    t.agent = a.id;
    t.trip = leg;
    t.origin = leg == 0 ? a.origin : a.destination;
    t.destination = leg == 0 ? a.destination : a.origin;
    t.departure = departure;
    t.cohort = a.cohort;
    const std::size_t i = index_of_agent_.at(a.id.value);
    if (i < best_.size()) t.best_s = best_[i][leg];
    result_.trips.push_back(std::move(t));
    active_.emplace_back();
    if (leg == 0) {
      first_trip_[a.id.value] = result_.trips.size() - 1;
    } else {
      has_return_[a.id.value] = true;
    }
    return result_.trips.size() - 1;
  }

  void schedule(double time, AgentId agent, EventKind kind, std::size_t trip) {
    queue_.push(Event{time, agent.value, seq_++, kind, trip});
  }

  void phase(double time, AgentId agent, AgentPhase p, std::optional<std::size_t> edge = std::nullopt) {
    result_.phases.push_back({time, agent, p, edge});
  }

  const Agent& agent_of(const TripRecord& t) const { return agents_[index_of_agent_.at(t.agent.value)]; }

  std::optional<RoutePlan> search(const Agent& agent, const TripRecord& trip, double now, bool social,
                                  bool allow_fallback) {
    NetworkState state;
    state.background = background_;
    state.lookahead = config_.lookahead_s;
    RouteQuery query{trip.origin, trip.destination, now, agent.profile, std::nullopt};
    try {
      std::vector<RoutePlan> plans;
      if (social) {
        ++result_.diagnostics.so_queries;
        state.ledger = &ledger_;
        const SocialOptimalProvider provider(graph_, state, alpha_, allow_fallback);
        plans = moa_star(graph_, query, provider, options_);
      } else {
        ++result_.diagnostics.uo_queries;
        state.live_volume = live_;
        const UserOptimalProvider provider(graph_, state);
        plans = moa_star(graph_, query, provider, options_);
      }
      return select_route(plans, agent.profile);
    } catch (const NoPath&) {
      return std::nullopt;
    } catch (const Error& e) {
      result_.diagnostics.messages.push_back("agent " + std::to_string(agent.id.value) + ": " + e.what());
      return std::nullopt;
    }
  }

  void record_commit(const TripRecord& trip, double now) {
    CommitRecord rec;
    rec.issued = now;
    rec.agent = trip.agent;
    rec.trip = trip.trip;
    rec.fallback = trip.plan.fallback;
    for (const PlanLeg& leg : trip.plan.legs) {
      if (leg.mode == Mode::Car && graph_.edge(leg.edge).has_bpr()) {
        rec.car_intervals.push_back({leg.edge, leg.enter, leg.exit});
      }
    }
    result_.commits.push_back(std::move(rec));
  }

  void depart(std::size_t ti, double now) {
    TripRecord& trip = result_.trips[ti];
    const Agent& agent = agent_of(trip);
    const bool social = agent.cohort == Cohort::SO;
    auto plan = search(agent, trip, now, social, config_.allow_fallback);
    if (!plan) {
      trip.status = TripStatus::Unroutable;
      ++result_.diagnostics.unroutable;
      return;
    }
    trip.plan = std::move(*plan);
    if (social) {
      if (trip.plan.fallback) ++result_.diagnostics.fallbacks;
      bool done = false;
      for (int attempt = 0; !done; ++attempt) {
        try {
          ledger_.add_user_plan(trip.plan, trip.agent);
          trip.committed = true;
          record_commit(trip, now);
          done = true;
        } catch (const TransitOverCapacity&) {
          if (attempt >= config_.replan_limit) {
            ++result_.diagnostics.uncommitted;
            break;
          }
          ++result_.diagnostics.replans;
          auto again = search(agent, trip, now, true, false);
          if (!again) {
            ++result_.diagnostics.uncommitted;
            break;
          }
          trip.plan = std::move(*again);
        }
      }
    }
    active_[ti].carrying = trip.plan.carrying_at_start;
    advance(ti, now);
  }

  void leave_car_edge(std::size_t ti) {
    ActiveTrip& act = active_[ti];
    if (!act.car_edge) return;
    live_[*act.car_edge] -= 1.0;
    act.car_edge.reset();
  }

  void advance(std::size_t ti, double now) {
    leave_car_edge(ti);
    TripRecord& trip = result_.trips[ti];
    ActiveTrip& act = active_[ti];
    const Agent& agent = agent_of(trip);

    if (act.next_leg >= trip.plan.legs.size()) {
      trip.arrival = now;
      trip.status = TripStatus::Arrived;
      phase(now, trip.agent, AgentPhase::Arrived);
      if (trip.trip == 0 && config_.return_trips && agent.return_departure) {
        const double when = std::max(*agent.return_departure, now);
        schedule(when, agent.id, EventKind::Depart, add_trip(agent, 1, when));
      }
      return;
    }

    const PlanLeg& leg = trip.plan.legs[act.next_leg];
    const Edge& edge = graph_.edge(leg.edge);
    if (edge.kind == EdgeKind::TransitLeg) {
      ride(ti, now);
      return;
    }

    NetworkState state;
    state.background = background_;
    state.live_volume = live_;
    const auto step = traverse(graph_, leg.edge, agent.profile, now, act.carrying, state);
    if (!step) {
      // Plans are feasible by construction; this guards against inconsistent input.
      result_.diagnostics.messages.push_back("agent " + std::to_string(trip.agent.value) +
                                             ": leg became infeasible on edge " + std::to_string(edge.id.value));
      trip.status = TripStatus::Unroutable;
      ++result_.diagnostics.unroutable;
      phase(now, trip.agent, AgentPhase::WaitingAtNode);
      return;
    }
    act.carrying = step->carrying;
    if (step->mode == Mode::Car && edge.has_bpr()) {
      live_[leg.edge] += 1.0;
      act.car_edge = leg.edge;
    }
    result_.occupancy.push_back({leg.edge, trip.agent, trip.trip, now, step->exit});
    phase(now, trip.agent, AgentPhase::OnEdge, leg.edge);
    ++act.next_leg;
    schedule(step->exit, trip.agent, EventKind::Advance, ti);
  }

  // Boards the first run with a free seat on every consecutive leg of the same line.
  void ride(std::size_t ti, double now) {
    TripRecord& trip = result_.trips[ti];
    ActiveTrip& act = active_[ti];
    const std::size_t first = act.next_leg;
    const Edge& first_edge = graph_.edge(trip.plan.legs[first].edge);
    const std::size_t line_index = first_edge.transit->line;
    const TransitLine& line = graph_.lines()[line_index];

    std::size_t last = first;
    while (last + 1 < trip.plan.legs.size()) {
      const Edge& next = graph_.edge(trip.plan.legs[last + 1].edge);
      const Edge& cur = graph_.edge(trip.plan.legs[last].edge);
      if (next.kind != EdgeKind::TransitLeg || !next.transit || next.transit->line != line_index ||
          next.transit->leg != cur.transit->leg + 1) {
        break;
      }
      ++last;
    }

    auto [run, board] = line.next_departure(first_edge.transit->leg, now);
    auto full = [&](std::int64_t r) {
      for (std::size_t k = first; k <= last; ++k) {
        const std::size_t e = trip.plan.legs[k].edge;
        const auto it = seats_.find({e, r});
        if (it != seats_.end() && it->second >= graph_.edge(e).capacity) return true;
      }
      return false;
    };
    while (full(run)) ++run;
    board = line.departure_time(first_edge.transit->leg, run);

    if (board > now) phase(now, trip.agent, AgentPhase::WaitingAtNode);
    double exit = board;
    for (std::size_t k = first; k <= last; ++k) {
      const std::size_t e = trip.plan.legs[k].edge;
      const std::size_t leg = graph_.edge(e).transit->leg;
      ++seats_[{e, run}];
      const double enter = line.departure_time(leg, run);
      exit = enter + line.leg_times[leg];
      result_.occupancy.push_back({e, trip.agent, trip.trip, enter, exit});
      phase(enter, trip.agent, AgentPhase::OnEdge, e);
    }
    act.next_leg = last + 1;
    schedule(exit, trip.agent, EventKind::Advance, ti);
  }

  void summarize_agents() {
    std::vector<std::vector<std::size_t>> trips_of(agents_.size());
    for (std::size_t i = 0; i < result_.trips.size(); ++i) {
      trips_of[index_of_agent_.at(result_.trips[i].agent.value)].push_back(i);
    }
    result_.agents.reserve(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      AgentResult r;
      r.agent = agents_[i].id;
      r.cohort = agents_[i].cohort;
      r.finished = !trips_of[i].empty();
      for (std::size_t ti : trips_of[i]) {
        const TripRecord& t = result_.trips[ti];
        if (t.status != TripStatus::Arrived) {
          r.finished = false;
          continue;
        }
        r.actual_s += *t.arrival - t.departure;
        r.best_s += t.best_s;
        r.modes = r.modes | t.plan.modes_used();
      }
      if (r.finished) {
        if (std::isfinite(r.best_s) && r.best_s > 0.0) {
          bool floored = false;
          r.ntt = normalized_travel_time(r.actual_s, r.best_s, &floored);
          if (floored) ++result_.diagnostics.floored;
        } else if (!best_.empty()) {
          result_.diagnostics.messages.push_back("agent " + std::to_string(r.agent.value) +
                                                 ": no positive best travel time");
        }
      }
      result_.agents.push_back(r);
    }
    std::sort(result_.agents.begin(), result_.agents.end(),
              [](const AgentResult& a, const AgentResult& b) { return a.agent.value < b.agent.value; });
  }

  const MultiModalGraph& graph_;
  std::span<const Agent> agents_;
  double alpha_;
  const SimulationConfig& config_;
  const BackgroundProfile* background_;
  std::span<const std::array<double, 2>> best_;
  SearchOptions options_;

  CongestionLedger ledger_;
  std::vector<double> live_;  // cars currently on each edge
  std::map<std::pair<std::size_t, std::int64_t>, double> seats_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  std::vector<ActiveTrip> active_;
  std::map<std::int64_t, std::size_t> index_of_agent_;
  std::map<std::int64_t, std::size_t> first_trip_;
  std::map<std::int64_t, bool> has_return_;
  RunResult result_;
};

}  // namespace

RunResult run_simulation(const MultiModalGraph& graph, std::span<const Agent> agents, double alpha,
                         const SimulationConfig& config, std::uint64_t seed, const BackgroundProfile* background,
                         std::span<const std::array<double, 2>> best) {
  std::vector<Agent> cohorts(agents.begin(), agents.end());
  apply_split(cohorts, split_population(agents, alpha, seed));
  std::vector<std::array<double, 2>> computed;
  if (best.empty()) {
    computed = best_travel_times(graph, agents, config);
    best = computed;
  }
  Run run(graph, cohorts, alpha, config, background, best);
  return run.execute();
}

SweepResult sweep(const MultiModalGraph& graph, std::span<const Agent> agents, std::span<const double> alpha_grid,
                  const SimulationConfig& config, std::uint64_t seed, const BackgroundProfile* background,
                  unsigned jobs) {
  const auto best = best_travel_times(graph, agents, config);
  SweepResult out;
  out.cells.resize(alpha_grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < alpha_grid.size(); i = next++) {
      SweepCell& cell = out.cells[i];
      cell.alpha = alpha_grid[i];
      try {
        cell.run = run_simulation(graph, agents, alpha_grid[i], config, seed, background, best);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(alpha_grid.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

}  // namespace mmr
