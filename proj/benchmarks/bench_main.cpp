#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>
#include <vector>

#include "mmr/interval_tree.hpp"
#include "mmr/kd_tree.hpp"
#include "mmr/population.hpp"
#include "mmr/routing.hpp"
#include "mmr/scenario_io.hpp"
#include "mmr/simulation.hpp"

namespace {

const std::filesystem::path kGrid10 = std::filesystem::path(MMR_SCENARIO_DIR) / "grid10.json";

std::vector<mmr::Point> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 10000.0);
  std::vector<mmr::Point> pts(n);
  for (auto& p : pts) p = {coord(rng), coord(rng)};
  return pts;
}

void BM_KdTreeBuild(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(mmr::KdTree(pts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KdTreeBuild)->Range(1 << 10, 1 << 16)->Complexity();

void BM_KdTreeWithin(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 2);
  const mmr::KdTree tree(pts);
  const auto probes = random_points(256, 3);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(tree.within(probes[i++ % probes.size()], 100.0));
}
BENCHMARK(BM_KdTreeWithin)->Range(1 << 10, 1 << 16);

void BM_IntervalTreeInsertErase(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> start(0.0, 86400.0), len(10.0, 600.0);
  mmr::IntervalTree tree;
  std::vector<std::pair<mmr::IntervalTree::Handle, double>> live;
  for (int i = 0; i < state.range(0); ++i) {
    const double s = start(rng);
    live.emplace_back(tree.insert({s, s + len(rng), 1}), s);
  }
  std::size_t k = 0;
  for (auto _ : state) {
    auto& [h, s] = live[k++ % live.size()];
    tree.erase(h, s);
    s = start(rng);
    h = tree.insert({s, s + len(rng), 1});
  }
}
BENCHMARK(BM_IntervalTreeInsertErase)->Range(1 << 8, 1 << 14);

void BM_IntervalTreeOverlap(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> start(0.0, 86400.0), len(10.0, 600.0);
  mmr::IntervalTree tree;
  for (int i = 0; i < state.range(0); ++i) {
    const double s = start(rng);
    tree.insert({s, s + len(rng), 1});
  }
  for (auto _ : state) {
    const double lo = start(rng);
    benchmark::DoNotOptimize(tree.overlap_sum(lo, lo + 120.0));
  }
}
BENCHMARK(BM_IntervalTreeOverlap)->Range(1 << 8, 1 << 14);

struct Grid10 {
  mmr::Scenario scenario = mmr::load_scenario(kGrid10);
  mmr::MultiModalGraph graph = mmr::build_graph(scenario);
  std::vector<mmr::Agent> agents =
      mmr::generate_population(scenario.zones, scenario.simulation.population, scenario.job_windows,
                               scenario.simulation.seed, scenario.profile, scenario.simulation.return_trips);
};

const Grid10& grid10() {
  static const Grid10 g;
  return g;
}

void BM_MoaStarGrid10(benchmark::State& state) {
  const Grid10& g = grid10();
  const mmr::NetworkState net{&g.scenario.background, {}, nullptr};
  const mmr::UserOptimalProvider provider(g.graph, net);
  std::size_t i = 0;
  for (auto _ : state) {
    const mmr::Agent& a = g.agents[i++ % g.agents.size()];
    mmr::RouteQuery q{a.origin, a.destination, a.departure, a.profile, std::nullopt};
    benchmark::DoNotOptimize(mmr::moa_star(g.graph, q, provider));
  }
}
BENCHMARK(BM_MoaStarGrid10);

void BM_SimulationGrid10(benchmark::State& state) {
  const Grid10& g = grid10();
  const double alpha = static_cast<double>(state.range(0)) / 10.0;
  const auto best = mmr::best_travel_times(g.graph, g.agents, g.scenario.simulation);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mmr::run_simulation(g.graph, g.agents, alpha, g.scenario.simulation,
                                                 g.scenario.simulation.seed, &g.scenario.background, best));
  }
}
BENCHMARK(BM_SimulationGrid10)->Arg(0)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
