#include "mmr/results_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mmr/error.hpp"

namespace mmr {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string modes_field(ModeSet s) {
  std::string out;
  for (Mode m : kAllModes) {
    if (!s.contains(m)) continue;
    if (!out.empty()) out += '+';
    out += to_string(m);
  }
  return out;
}

}  // namespace

std::string format_fixed(double value) {
  if (!std::isfinite(value)) return "nan";
  if (value == 0.0) value = 0.0;  // no "-0.000000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string summary_csv(std::span<const RunResult* const> runs) {
  std::ostringstream out;
  out << "alpha,mean_ntt,var_ntt,agents,finished,unfinished,walk_count,bike_count,car_count,transit_count,"
         "walk_share,bike_share,car_share,transit_share,fallbacks,replans\n";
  for (const RunResult* run : runs) {
    const RunSummary s = summarize(*run);
    out << format_fixed(s.alpha) << ',' << format_fixed(s.mean_ntt) << ',' << format_fixed(s.var_ntt) << ','
        << s.agents << ',' << s.finished << ',' << s.unfinished;
    for (Mode m : kAllModes) out << ',' << s.mode_counts[index_of(m)];
    for (Mode m : kAllModes) out << ',' << format_fixed(s.mode_share(m));
    out << ',' << s.fallbacks << ',' << s.replans << '\n';
  }
  return out.str();
}

std::string agents_csv(std::span<const RunResult* const> runs) {
  std::ostringstream out;
  out << "alpha,agent_id,cohort,actual_s,best_s,ntt,modes,finished\n";
  for (const RunResult* run : runs) {
    for (const AgentResult& a : run->agents) {
      out << format_fixed(run->alpha) << ',' << a.agent.value << ',' << to_string(a.cohort) << ','
          << format_fixed(a.actual_s) << ',' << format_fixed(a.best_s) << ',' << format_fixed(a.ntt) << ','
          << modes_field(a.modes) << ',' << (a.finished ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::string heatmap_csv(const MultiModalGraph& graph, std::span<const RunResult* const> runs, double bin_s) {
  std::ostringstream out;
  out << "alpha,edge_id,bin_start_s,volume,peak_volume,ratio,peak_ratio\n";
  for (const RunResult* run : runs) {
    for (const HeatmapCell& c : heatmap(graph, *run, bin_s)) {
      out << format_fixed(run->alpha) << ',' << c.edge_id.value << ',' << format_fixed(c.bin_start) << ','
          << format_fixed(c.volume) << ',' << format_fixed(c.peak_volume) << ',' << format_fixed(c.ratio) << ','
          << format_fixed(c.peak_ratio) << '\n';
    }
  }
  return out.str();
}

std::string deltas_csv(std::span<const AgentDelta> deltas) {
  std::ostringstream out;
  out << "agent_id,actual_a_s,actual_b_s,delta_s\n";
  for (const AgentDelta& d : deltas) {
    out << d.agent.value << ',' << format_fixed(d.actual_a) << ',' << format_fixed(d.actual_b) << ','
        << format_fixed(d.delta) << '\n';
  }
  return out.str();
}

std::string diagnostics_log(std::span<const RunResult* const> runs) {
  std::ostringstream out;
  for (const RunResult* run : runs) {
    const Diagnostics& d = run->diagnostics;
    out << "alpha " << format_fixed(run->alpha) << ": uo_queries=" << d.uo_queries << " so_queries=" << d.so_queries
        << " fallbacks=" << d.fallbacks << " replans=" << d.replans << " uncommitted=" << d.uncommitted
        << " unroutable=" << d.unroutable << " unfinished=" << d.unfinished << " floored=" << d.floored << '\n';
    for (const std::string& m : d.messages) out << "  " << m << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> write_results(const MultiModalGraph& graph, const SweepResult& sweep,
                                                 double bin_s, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<const RunResult*> runs;
  std::string failures;
  for (const SweepCell& cell : sweep.cells) {
    if (cell.run) {
      runs.push_back(&*cell.run);
    } else {
      failures += "alpha " + format_fixed(cell.alpha) + ": run failed: " + cell.error + "\n";
    }
  }
  const std::vector<std::filesystem::path> paths{out_dir / "summary.csv", out_dir / "agents.csv",
                                                 out_dir / "heatmap.csv", out_dir / "diagnostics.log"};
  write_text(paths[0], summary_csv(runs));
  write_text(paths[1], agents_csv(runs));
  write_text(paths[2], heatmap_csv(graph, runs, bin_s));
  write_text(paths[3], diagnostics_log(runs) + failures);
  return paths;
}

std::string heatmap_geojson(const MultiModalGraph& graph, std::span<const EdgeCongestion> edges,
                            const std::optional<GeoOrigin>& projection) {
  using json = nlohmann::ordered_json;
  auto coords = [&](Point p) {
    if (projection) {
      const auto ll = unproject(*projection, p);
      return json::array({ll[0], ll[1]});
    }
    return json::array({p.x, p.y});
  };
  json features = json::array();
  for (const EdgeCongestion& c : edges) {
    const std::size_t from = graph.source(c.edge);
    const std::size_t to = graph.target(c.edge);
    if (from == MultiModalGraph::npos || to == MultiModalGraph::npos) continue;
    json ratios = json::array();
    for (double r : c.ratios) ratios.push_back(r);
    features.push_back({{"type", "Feature"},
                        {"geometry",
                         {{"type", "LineString"},
                          {"coordinates", {coords(graph.node(from).position), coords(graph.node(to).position)}}}},
                        {"properties", {{"edge_id", c.edge_id.value}, {"peak_ratio", c.peak_ratio}, {"ratios", ratios}}}});
  }
  const json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump() + "\n";
}

void export_heatmap_geojson(const MultiModalGraph& graph, const RunResult& run, double bin_s,
                            const std::filesystem::path& out_path, const std::optional<GeoOrigin>& projection) {
  const auto edges = edge_congestion(graph, run, bin_s);
  write_text(out_path, heatmap_geojson(graph, edges, projection));
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace mmr
