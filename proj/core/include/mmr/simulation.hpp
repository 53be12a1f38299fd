#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmr/congestion.hpp"
#include "mmr/network.hpp"
#include "mmr/plan.hpp"
#include "mmr/population.hpp"
#include "mmr/routing.hpp"

namespace mmr {

std::vector<double> default_alpha_grid();

struct SimulationConfig {
  double horizon_s = kSecondsPerDay;
  std::vector<double> alpha_grid = default_alpha_grid();
  std::uint64_t seed = 1;
  std::size_t population = 500;
  int replan_limit = 1;
  double lookahead_s = 0.0;  // 0: edge free-flow time
  double bin_s = 900.0;      // heatmap bin width
  bool return_trips = true;
  double epsilon = 0.0;
  bool allow_fallback = true;
  std::size_t max_labels = 4'000'000;
  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

enum class TripStatus { Arrived, Unroutable, Unfinished };
std::string_view to_string(TripStatus s);

struct TripRecord {
  AgentId agent;
  int trip = 0;  // 0 onward, 1 return
  NodeId origin;
  NodeId destination;
  double departure = 0.0;
  std::optional<double> arrival;
  TripStatus status = TripStatus::Unfinished;
  Cohort cohort = Cohort::UO;
  RoutePlan plan;  // as issued
  double best_s = 0.0;
  bool committed = false;
};

/// One agent on one edge over [enter, exit).
struct EdgeOccupancy {
  std::size_t edge = 0;
  AgentId agent;
  int trip = 0;
  double enter = 0.0;
  double exit = 0.0;
};

enum class AgentPhase { NotDeparted, OnEdge, WaitingAtNode, Arrived };

struct PhaseChange {
  double time = 0.0;
  AgentId agent;
  AgentPhase phase = AgentPhase::NotDeparted;
  std::optional<std::size_t> edge;
};

/// Car legs of an SO plan as committed to the ledger.
struct CommitRecord {
  double issued = 0.0;
  AgentId agent;
  int trip = 0;
  bool fallback = false;
  struct CarInterval {
    std::size_t edge;
    double start;
    double end;
  };
  std::vector<CarInterval> car_intervals;
};

struct Diagnostics {
  std::size_t uo_queries = 0;
  std::size_t so_queries = 0;
  std::size_t fallbacks = 0;  // SO plans containing a fallback-admitted edge
  std::size_t replans = 0;
  std::size_t uncommitted = 0;
  std::size_t unroutable = 0;
  std::size_t unfinished = 0;
  std::size_t floored = 0;  // actual < best, normalized time floored at zero
  std::vector<std::string> messages;
};

struct AgentResult {
  AgentId agent;
  Cohort cohort = Cohort::UO;
  double actual_s = 0.0;  // sum over trips
  double best_s = 0.0;
  double ntt = 0.0;
  ModeSet modes;
  bool finished = false;
};

struct RunResult {
  double alpha = 0.0;
  std::vector<AgentResult> agents;  // ordered by agent id
  std::vector<TripRecord> trips;
  std::vector<EdgeOccupancy> occupancy;
  std::vector<PhaseChange> phases;
  std::vector<CommitRecord> commits;
  Diagnostics diagnostics;
  bool ledger_empty_at_end = true;
};

/// Minimum-time route on the empty network, per agent and trip:
/// out[i] = {onward, return}. A trip without a route gets NaN.
std::vector<std::array<double, 2>> best_travel_times(const MultiModalGraph& graph, std::span<const Agent> agents,
                                                      const SimulationConfig& config);

/// (actual - best) / best floored at 0; throws ZeroBest when best <= 0.
/// `floored` is set when actual < best.
double normalized_travel_time(double actual, double best, bool* floored = nullptr);

/// One-shot event-driven run. Cohorts come from split_population(agents,
/// alpha, seed). `best` may be precomputed with best_travel_times.
RunResult run_simulation(const MultiModalGraph& graph, std::span<const Agent> agents, double alpha,
                         const SimulationConfig& config, std::uint64_t seed,
                         const BackgroundProfile* background = nullptr,
                         std::span<const std::array<double, 2>> best = {});

struct SweepCell {
  double alpha = 0.0;
  std::optional<RunResult> run;
  std::string error;  // set when the run failed
};

struct SweepResult {
  std::vector<SweepCell> cells;  // in grid order
};

/// Independent run per alpha with a fresh ledger. `jobs` bounds concurrent runs.
SweepResult sweep(const MultiModalGraph& graph, std::span<const Agent> agents, std::span<const double> alpha_grid,
                  const SimulationConfig& config, std::uint64_t seed, const BackgroundProfile* background = nullptr,
                  unsigned jobs = 1);

}  // namespace mmr
