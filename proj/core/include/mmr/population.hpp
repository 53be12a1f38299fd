#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmr/network.hpp"

namespace mmr {

enum class Cohort { UO, SO };
std::string_view to_string(Cohort c);

/// Departure windows, seconds after midnight, for one job type.
struct JobWindow {
  std::string job;
  double onward_start = 0.0;
  double onward_end = 0.0;
  double return_start = 0.0;
  double return_end = 0.0;
  friend bool operator==(const JobWindow&, const JobWindow&) = default;
};

/// Faculty, Students and Staff windows of the reference campus survey.
std::vector<JobWindow> default_job_windows();

struct WeightedNode {
  NodeId node;
  double weight = 1.0;
  friend bool operator==(const WeightedNode&, const WeightedNode&) = default;
};

struct JobShare {
  std::string job;
  double weight = 1.0;
  friend bool operator==(const JobShare&, const JobShare&) = default;
};

struct DemandZone {
  std::string id;
  double population = 0.0;  // relative likelihood of drawing an agent from this zone
  std::vector<WeightedNode> origins;
  std::vector<JobShare> job_mix;
  std::vector<WeightedNode> destinations;
  double car_ownership = 0.0;  // probability
  double bike_ownership = 0.0;
  friend bool operator==(const DemandZone&, const DemandZone&) = default;
};

struct Agent {
  AgentId id;
  double departure = 0.0;
  NodeId origin;
  NodeId destination;
  UserProfile profile;
  Cohort cohort = Cohort::UO;
  std::string job_type;
  std::optional<double> return_departure;
  std::string zone;
};

/// Deterministic in `seed`. Throws EmptyZones when no zone has positive
/// population, std::invalid_argument on P == 0 or a job without a window.
std::vector<Agent> generate_population(std::span<const DemandZone> zones, std::size_t population,
                                       std::span<const JobWindow> windows, std::uint64_t seed,
                                       const UserProfile& base_profile = {}, bool return_trips = true);

struct PopulationSplit {
  std::size_t total = 0;
  double alpha = 0.0;
  std::vector<AgentId> uo;  // X
  std::vector<AgentId> so;  // Y
};

/// |Y| = floor(alpha * P + 0.5). Y is a prefix of a seeded permutation, so
/// for a fixed seed the SO sets are nested as alpha grows.
PopulationSplit split_population(std::span<const Agent> agents, double alpha, std::uint64_t seed);

/// Cohorts of `agents` overwritten from `split`.
void apply_split(std::span<Agent> agents, const PopulationSplit& split);

std::size_t so_count(std::size_t population, double alpha);

}  // namespace mmr
