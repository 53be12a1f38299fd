#include "mmr/population.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "mmr/error.hpp"
#include "random.hpp"

namespace mmr {

std::string_view to_string(Cohort c) { return c == Cohort::SO ? "SO" : "UO"; }

std::vector<JobWindow> default_job_windows() {
  return {
      {"Faculty", 27000.0, 32400.0, 61200.0, 68400.0},
      {"Students", 28800.0, 36000.0, 57600.0, 64800.0},
      {"Staff", 25200.0, 28800.0, 61200.0, 64800.0},
  };
}

std::vector<Agent> generate_population(std::span<const DemandZone> zones, std::size_t population,
                                       std::span<const JobWindow> windows, std::uint64_t seed,
                                       const UserProfile& base_profile, bool return_trips) {
  if (population == 0) throw std::invalid_argument("population must be positive");
  const bool any_zone = std::any_of(zones.begin(), zones.end(), [](const DemandZone& z) {
    return z.population > 0.0 && !z.origins.empty();
  });
  if (!any_zone) throw EmptyZones("no demand zone with positive population and origin nodes");

  std::map<std::string, const JobWindow*> window_of;
  for (const JobWindow& w : windows) window_of[w.job] = &w;
  for (const DemandZone& z : zones) {
    if (z.population <= 0.0) continue;
    if (z.destinations.empty()) throw std::invalid_argument("zone " + z.id + " has no destinations");
    if (z.job_mix.empty() && windows.empty()) throw std::invalid_argument("no job windows");
    for (const JobShare& share : z.job_mix) {
      if (!window_of.contains(share.job)) {
        throw std::invalid_argument("job type " + share.job + " of zone " + z.id + " has no window");
      }
    }
  }

  std::vector<JobShare> uniform_mix;
  for (const JobWindow& w : windows) uniform_mix.push_back({w.job, 1.0});

  std::mt19937_64 rng(seed);
  std::vector<Agent> agents;
  agents.reserve(population);
  for (std::size_t i = 0; i < population; ++i) {
    const DemandZone& zone = zones[detail::pick_weighted(
        rng, zones, [](const DemandZone& z) { return z.origins.empty() ? 0.0 : std::max(z.population, 0.0); })];
    auto node_weight = [](const WeightedNode& n) { return std::max(n.weight, 0.0); };
    const std::span<const JobShare> mix = zone.job_mix.empty() ? std::span<const JobShare>(uniform_mix)
                                                               : std::span<const JobShare>(zone.job_mix);

    Agent a;
    a.id = AgentId{static_cast<std::int64_t>(i)};
    a.zone = zone.id;
    a.origin = zone.origins[detail::pick_weighted(rng, std::span<const WeightedNode>(zone.origins), node_weight)].node;
    a.destination =
        zone.destinations[detail::pick_weighted(rng, std::span<const WeightedNode>(zone.destinations), node_weight)]
            .node;
    a.job_type = mix[detail::pick_weighted(rng, mix, [](const JobShare& s) { return std::max(s.weight, 0.0); })].job;
    const JobWindow& w = *window_of.at(a.job_type);
    a.departure = detail::uniform(rng, w.onward_start, w.onward_end);
    const double return_time = detail::uniform(rng, w.return_start, w.return_end);
    if (return_trips) a.return_departure = return_time;

    a.profile = base_profile;
    a.profile.id = a.id;
    a.profile.owns_car = detail::unit(rng) < zone.car_ownership;
    a.profile.owns_bike = detail::unit(rng) < zone.bike_ownership;
    agents.push_back(std::move(a));
  }
  return agents;
}

std::size_t so_count(std::size_t population, double alpha) {
  const double a = std::clamp(alpha, 0.0, 1.0);
  return std::min(population, static_cast<std::size_t>(std::floor(a * static_cast<double>(population) + 0.5)));
}

PopulationSplit split_population(std::span<const Agent> agents, double alpha, std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  std::vector<std::size_t> order(agents.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[detail::below(rng, i)]);
  }

  PopulationSplit split;
  split.total = agents.size();
  split.alpha = alpha;
  const std::size_t y = so_count(agents.size(), alpha);
  std::vector<bool> is_so(agents.size(), false);
  for (std::size_t k = 0; k < y; ++k) is_so[order[k]] = true;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    (is_so[i] ? split.so : split.uo).push_back(agents[i].id);
  }
  return split;
}

void apply_split(std::span<Agent> agents, const PopulationSplit& split) {
  std::vector<AgentId> so = split.so;
  std::sort(so.begin(), so.end(), [](AgentId a, AgentId b) { return a.value < b.value; });
  for (Agent& a : agents) {
    a.cohort = std::binary_search(so.begin(), so.end(), a.id,
                                  [](AgentId x, AgentId y) { return x.value < y.value; })
                   ? Cohort::SO
                   : Cohort::UO;
  }
}

}  // namespace mmr
