#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "mmr/error.hpp"
#include "mmr/metrics.hpp"
#include "mmr/population.hpp"
#include "mmr/results_io.hpp"
#include "mmr/routing.hpp"
#include "mmr/scenario_io.hpp"
#include "mmr/simulation.hpp"

namespace mmr::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string scenario;
  std::string graph;
  std::string out;
  std::string in;
  std::int64_t from = 0;
  std::int64_t to = 0;
  double depart = 0.0;
  std::string policy = "uo";
  double alpha = 1.0;
  double epsilon = 0.0;
  bool owns_car = false;
  bool owns_bike = false;
  bool no_fallback = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> population;
  std::optional<double> horizon;
  std::vector<double> grid;
  unsigned jobs = 1;
  double compare_a = 0.0;
  double compare_b = 1.0;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario scenario_with_overrides(const Options& o) {
  Scenario s = load_scenario(o.scenario);
  if (o.seed) s.simulation.seed = *o.seed;
  if (o.population) s.simulation.population = *o.population;
  if (o.horizon) s.simulation.horizon_s = *o.horizon;
  if (!o.grid.empty()) s.simulation.alpha_grid = o.grid;
  if (o.no_fallback) s.simulation.allow_fallback = false;
  return s;
}

MultiModalGraph graph_for(const Options& o, const Scenario& s) {
  return o.graph.empty() ? build_graph(s) : load_graph(o.graph);
}

int build_graph_cmd(const Options& o, std::ostream& out) {
  const Scenario s = load_scenario(o.scenario);
  const MultiModalGraph g = build_graph(s);
  if (const fs::path parent = fs::path(o.out).parent_path(); !parent.empty()) fs::create_directories(parent);
  save_graph(g, o.out);
  const auto links = std::count_if(g.edges().begin(), g.edges().end(),
                                   [](const Edge& e) { return e.kind == EdgeKind::SwitchLink; });
  out << "wrote " << o.out << ": " << g.node_count() << " nodes, " << g.edge_count() << " edges (" << links
      << " switch links)\n";
  return kExitOk;
}

int validate_cmd(const Options& o, std::ostream& out) {
  Scenario s;
  try {
    s = parse_scenario(read_text(o.scenario), o.scenario);
  } catch (const ParseError& e) {
    out << e.what() << "\n1 findings\n";
    return kExitFailure;
  }
  const auto findings = validate_scenario(s);
  for (const std::string& f : findings) out << f << '\n';
  out << findings.size() << " findings\n";
  return findings.empty() ? kExitOk : kExitFailure;
}

void print_plan(std::ostream& out, const RoutePlan& p) {
  out << "time " << fixed(p.cost.travel_time, 1) << " s, money " << fixed(p.cost.money, 2) << ", transfers "
      << fixed(p.cost.transfers, 0) << ", modes " << to_string(p.modes_used()) << ", " << p.legs.size() << " legs"
      << (p.fallback ? ", fallback" : "");
}

int route_cmd(const Options& o, std::ostream& out) {
  const Scenario s = scenario_with_overrides(o);
  const MultiModalGraph g = graph_for(o, s);
  UserProfile profile = s.profile;
  profile.owns_car = profile.owns_car || o.owns_car;
  profile.owns_bike = profile.owns_bike || o.owns_bike;

  NetworkState state;
  state.background = &s.background;
  state.lookahead = s.simulation.lookahead_s;
  const CongestionLedger ledger(g);
  SearchOptions options;
  options.epsilon = o.epsilon > 0.0 ? o.epsilon : s.simulation.epsilon;
  options.max_labels = s.simulation.max_labels;
  const RouteQuery query{NodeId{o.from}, NodeId{o.to}, o.depart, profile, std::nullopt};

  std::vector<RoutePlan> plans;
  try {
    if (o.policy == "so") {
      state.ledger = &ledger;
      const SocialOptimalProvider provider(g, state, o.alpha, s.simulation.allow_fallback);
      plans = moa_star(g, query, provider, options);
    } else {
      const UserOptimalProvider provider(g, state);
      plans = moa_star(g, query, provider, options);
    }
  } catch (const NoPath& e) {
    out << "no path: " << e.what() << '\n';
    return kExitFailure;
  }

  out << "pareto set: " << plans.size() << " plan(s)\n";
  for (std::size_t i = 0; i < plans.size(); ++i) {
    out << "  [" << i << "] ";
    print_plan(out, plans[i]);
    out << '\n';
  }
  const RoutePlan& chosen = select_route(plans, profile);
  const auto index = static_cast<std::size_t>(&chosen - plans.data());
  out << "selected: [" << index << "] ";
  print_plan(out, chosen);
  out << "\n  carrying at start: " << to_string(chosen.carrying_at_start) << '\n';
  out << "  edge_id  kind         mode     enter_s     exit_s\n";
  for (const PlanLeg& leg : chosen.legs) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %7lld  %-11s  %-7s  %10.1f  %10.1f", static_cast<long long>(leg.edge_id.value),
                  std::string(to_string(g.edge(leg.edge).kind)).c_str(),
                  leg.mode ? std::string(to_string(*leg.mode)).c_str() : "-", leg.enter, leg.exit);
    out << buf << '\n';
  }
  return kExitOk;
}

void print_summary(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return;
  const std::vector<std::string> wanted{"alpha",     "mean_ntt",      "var_ntt",   "finished", "unfinished",
                                        "car_count", "transit_count", "walk_count", "bike_count", "fallbacks"};
  std::vector<std::size_t> cols;
  for (const auto& w : wanted) {
    const auto it = std::find(rows[0].begin(), rows[0].end(), w);
    if (it != rows[0].end()) cols.push_back(static_cast<std::size_t>(it - rows[0].begin()));
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c : cols) {
      std::string cell = c < row.size() ? row[c] : "";
      if (cell.size() < 13) cell.insert(0, 13 - cell.size(), ' ');
      line += cell;
    }
    out << line << '\n';
  }
}

int run_and_write(const Scenario& s, const MultiModalGraph& g, const std::vector<double>& grid, unsigned jobs,
                  const fs::path& dir, std::ostream& out, std::ostream& err) {
  const auto agents = generate_population(s.zones, s.simulation.population, s.job_windows, s.simulation.seed,
                                          s.profile, s.simulation.return_trips);
  const SweepResult result = sweep(g, agents, grid, s.simulation, s.simulation.seed, &s.background, jobs);
  write_results(g, result, s.simulation.bin_s, dir);
  save_graph(g, dir / "graph.json");
  write_text(dir / "scenario.json", serialize_scenario(s));
  int status = kExitOk;
  for (const SweepCell& cell : result.cells) {
    if (!cell.run) {
      err << "alpha " << fixed(cell.alpha, 2) << ": " << cell.error << '\n';
      status = kExitFailure;
      continue;
    }
    export_heatmap_geojson(g, *cell.run, s.simulation.bin_s,
                           dir / ("heatmap_alpha_" + fixed(cell.alpha, 2) + ".geojson"), s.projection);
  }
  print_summary(out, read_csv(dir / "summary.csv"));
  out << "results written to " << dir.string() << '\n';
  return status;
}

int simulate_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  const Scenario s = scenario_with_overrides(o);
  const MultiModalGraph g = graph_for(o, s);
  return run_and_write(s, g, {o.alpha}, 1, o.out, out, err);
}

int sweep_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  const Scenario s = scenario_with_overrides(o);
  const MultiModalGraph g = graph_for(o, s);
  return run_and_write(s, g, s.simulation.alpha_grid, std::max(1u, o.jobs), o.out, out, err);
}

int report_cmd(const Options& o, std::ostream& out) {
  const fs::path dir = o.in;
  const auto summary = read_csv(dir / "summary.csv");
  print_summary(out, summary);

  // Per-agent deltas between two alpha values.
  const auto agents = read_csv(dir / "agents.csv");
  const std::string a = format_fixed(o.compare_a);
  const std::string b = format_fixed(o.compare_b);
  std::map<std::int64_t, double> actual_a;
  std::map<std::int64_t, double> actual_b;
  for (std::size_t i = 1; i < agents.size(); ++i) {
    const auto& row = agents[i];
    if (row.size() < 8 || row[7] != "1") continue;
    const std::int64_t id = std::stoll(row[1]);
    if (row[0] == a) actual_a[id] = std::stod(row[3]);
    if (row[0] == b) actual_b[id] = std::stod(row[3]);
  }
  std::vector<AgentDelta> deltas;
  for (const auto& [id, ta] : actual_a) {
    const auto it = actual_b.find(id);
    if (it != actual_b.end()) deltas.push_back({AgentId{id}, ta, it->second, ta - it->second});
  }
  write_text(dir / "deltas.csv", deltas_csv(deltas));
  const auto faster = std::count_if(deltas.begin(), deltas.end(), [](const AgentDelta& d) { return d.delta > 0; });
  const auto slower = std::count_if(deltas.begin(), deltas.end(), [](const AgentDelta& d) { return d.delta < 0; });
  out << "deltas alpha " << a << " -> " << b << ": " << deltas.size() << " agents, " << faster << " faster, " << slower
      << " slower\n";

  // Heatmap exports rebuilt from heatmap.csv.
  const MultiModalGraph g = load_graph(dir / "graph.json");
  std::optional<GeoOrigin> projection;
  double bin_s = SimulationConfig{}.bin_s;
  if (fs::exists(dir / "scenario.json")) {
    const Scenario s = parse_scenario(read_text(dir / "scenario.json"), (dir / "scenario.json").string());
    projection = s.projection;
    bin_s = s.simulation.bin_s;
  }
  const auto heat = read_csv(dir / "heatmap.csv");
  std::map<std::string, std::map<std::int64_t, EdgeCongestion>> by_alpha;
  for (std::size_t i = 1; i < heat.size(); ++i) {
    const auto& row = heat[i];
    if (row.size() < 7) continue;
    const EdgeId id{std::stoll(row[1])};
    const auto index = g.edge_index(id);
    if (!index) continue;
    EdgeCongestion& c = by_alpha[row[0]][id.value];
    c.edge = *index;
    c.edge_id = id;
    const auto bin = static_cast<std::size_t>(std::llround(std::stod(row[2]) / bin_s));
    if (c.ratios.size() <= bin) c.ratios.resize(bin + 1, 0.0);
    c.ratios[bin] = std::clamp(std::stod(row[5]), 0.0, 1.0);
    c.peak_ratio = std::max(c.peak_ratio, std::clamp(std::stod(row[6]), 0.0, 1.0));
  }
  for (const auto& [alpha, edges] : by_alpha) {
    std::vector<EdgeCongestion> list;
    for (const auto& [id, c] : edges) list.push_back(c);
    const fs::path path = dir / ("heatmap_alpha_" + fixed(std::stod(alpha), 2) + ".geojson");
    write_text(path, heatmap_geojson(g, list, projection));
    out << "wrote " << path.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-modal routing and social-ratio simulation", "mmr"};
  app.require_subcommand(1, 1);
  Options o;

  auto add_scenario = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", o.scenario, "Scenario JSON document")->required()->envname("MMR_SCENARIO");
  };
  auto add_run_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--graph", o.graph, "Use a cached merged graph from build-graph");
    cmd->add_option("--seed", o.seed, "Override simulation.seed")->envname("MMR_SEED");
    cmd->add_option("--population", o.population, "Override simulation.population");
    cmd->add_option("--horizon", o.horizon, "Override simulation.horizon_s");
    cmd->add_flag("--no-fallback", o.no_fallback, "Disable fallback admission of pruned edges");
  };

  auto* build = app.add_subcommand("build-graph", "Merge the scenario layers and cache the graph");
  add_scenario(build);
  build->add_option("--out", o.out, "Output graph JSON")->required();

  auto* validate = app.add_subcommand("validate", "Print scenario findings");
  add_scenario(validate);

  auto* route = app.add_subcommand("route", "Pareto set and selected plan for one query");
  add_scenario(route);
  add_run_overrides(route);
  route->add_option("--from", o.from, "Origin node id")->required();
  route->add_option("--to", o.to, "Destination node id")->required();
  route->add_option("--depart", o.depart, "Departure, seconds after midnight")->required();
  route->add_option("--policy", o.policy, "uo or so")->check(CLI::IsMember({"uo", "so"}));
  route->add_option("--alpha", o.alpha, "Social ratio for the so policy")->check(CLI::Range(0.0, 1.0));
  route->add_option("--epsilon", o.epsilon, "Epsilon-dominance relaxation")->check(CLI::NonNegativeNumber);
  route->add_flag("--owns-car", o.owns_car, "Traveler owns a car");
  route->add_flag("--owns-bike", o.owns_bike, "Traveler owns a bike");

  auto* simulate = app.add_subcommand("simulate", "Run one simulation at a given social ratio");
  add_scenario(simulate);
  add_run_overrides(simulate);
  simulate->add_option("--alpha", o.alpha, "Social ratio")->required()->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--out", o.out, "Output directory")->required();

  auto* sweep_cmd_app = app.add_subcommand("sweep", "Run the social-ratio sweep");
  add_scenario(sweep_cmd_app);
  add_run_overrides(sweep_cmd_app);
  sweep_cmd_app->add_option("--out", o.out, "Output directory")->required();
  sweep_cmd_app->add_option("--grid", o.grid, "Alpha values, comma separated")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  sweep_cmd_app->add_option("--jobs", o.jobs, "Concurrent runs")->envname("MMR_JOBS")->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Summarize a results directory and write heatmap exports");
  report->add_option("--in", o.in, "Results directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--compare-a", o.compare_a, "First alpha of the delta table");
  report->add_option("--compare-b", o.compare_b, "Second alpha of the delta table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (build->parsed()) return build_graph_cmd(o, out);
    if (validate->parsed()) return validate_cmd(o, out);
    if (route->parsed()) return route_cmd(o, out);
    if (simulate->parsed()) return simulate_cmd(o, out, err);
    if (sweep_cmd_app->parsed()) return sweep_cmd(o, out, err);
    if (report->parsed()) return report_cmd(o, out);
  } catch (const ValidationError& e) {
    err << e.what() << '\n';
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace mmr::cli
