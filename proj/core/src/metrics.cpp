#include "mmr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mmr {

RunSummary summarize(const RunResult& run) {
  RunSummary s;
  s.alpha = run.alpha;
  s.agents = run.agents.size();
  s.fallbacks = run.diagnostics.fallbacks;
  s.replans = run.diagnostics.replans;
  double sum = 0.0;
  for (const AgentResult& a : run.agents) {
    if (!a.finished) {
      ++s.unfinished;
      continue;
    }
    ++s.finished;
    sum += a.ntt;
    for (Mode m : kAllModes) {
      if (a.modes.contains(m)) ++s.mode_counts[index_of(m)];
    }
  }
  if (s.finished > 0) {
    s.mean_ntt = sum / static_cast<double>(s.finished);
    double sq = 0.0;
    for (const AgentResult& a : run.agents) {
      if (a.finished) sq += (a.ntt - s.mean_ntt) * (a.ntt - s.mean_ntt);
    }
    s.var_ntt = sq / static_cast<double>(s.finished);
  }
  return s;
}

namespace {

std::vector<std::vector<const EdgeOccupancy*>> by_edge(const RunResult& run, std::size_t edges) {
  std::vector<std::vector<const EdgeOccupancy*>> out(edges);
  for (const EdgeOccupancy& o : run.occupancy) {
    if (o.edge < edges) out[o.edge].push_back(&o);
  }
  return out;
}

std::vector<VolumeStepPoint> series_of(std::span<const EdgeOccupancy* const> items) {
  std::map<double, int> delta;
  for (const EdgeOccupancy* o : items) {
    if (!(o->exit > o->enter)) continue;
    delta[o->enter] += 1;
    delta[o->exit] -= 1;
  }
  std::vector<VolumeStepPoint> out;
  int level = 0;
  for (const auto& [t, d] : delta) {
    if (d == 0) continue;
    level += d;
    out.push_back({t, level});
  }
  return out;
}

double capacity_ratio(const Edge& e, double volume) {
  return std::isfinite(e.capacity) && e.capacity > 0.0 ? volume / e.capacity : 0.0;
}

// Per-bin time-averaged and peak volume of a step series.
std::map<long long, std::pair<double, int>> bin_series(std::span<const VolumeStepPoint> series, double bin_s) {
  std::map<long long, std::pair<double, int>> bins;
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    const int v = series[i].volume;
    if (v == 0) continue;
    double t = series[i].time;
    const double end = series[i + 1].time;
    while (t < end) {
      const auto b = static_cast<long long>(std::floor(t / bin_s));
      const double bin_end = static_cast<double>(b + 1) * bin_s;
      const double until = std::min(end, bin_end);
      auto& cell = bins[b];
      cell.first += v * (until - t);
      cell.second = std::max(cell.second, v);
      t = until;
    }
  }
  for (auto& [b, cell] : bins) cell.first /= bin_s;
  return bins;
}

}  // namespace

std::vector<VolumeStepPoint> volume_series(const RunResult& run, std::size_t edge) {
  std::vector<const EdgeOccupancy*> items;
  for (const EdgeOccupancy& o : run.occupancy) {
    if (o.edge == edge) items.push_back(&o);
  }
  return series_of(items);
}

double agent_seconds(std::span<const VolumeStepPoint> series) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    total += series[i].volume * (series[i + 1].time - series[i].time);
  }
  return total;
}

std::vector<HeatmapCell> heatmap(const MultiModalGraph& graph, const RunResult& run, double bin_s) {
  const auto grouped = by_edge(run, graph.edge_count());
  std::vector<std::size_t> order(graph.edge_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return graph.edge(a).id.value < graph.edge(b).id.value; });

  std::vector<HeatmapCell> out;
  for (std::size_t e : order) {
    if (grouped[e].empty()) continue;
    const Edge& edge = graph.edge(e);
    const auto series = series_of(grouped[e]);
    for (const auto& [b, cell] : bin_series(series, bin_s)) {
      HeatmapCell h;
      h.edge = e;
      h.edge_id = edge.id;
      h.bin_start = static_cast<double>(b) * bin_s;
      h.volume = cell.first;
      h.peak_volume = cell.second;
      h.ratio = capacity_ratio(edge, h.volume);
      h.peak_ratio = capacity_ratio(edge, h.peak_volume);
      out.push_back(h);
    }
  }
  return out;
}

std::vector<EdgeCongestion> edge_congestion(const MultiModalGraph& graph, const RunResult& run, double bin_s) {
  const auto grouped = by_edge(run, graph.edge_count());
  std::vector<EdgeCongestion> out;
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    if (grouped[e].empty()) continue;
    const Edge& edge = graph.edge(e);
    EdgeCongestion c;
    c.edge = e;
    c.edge_id = edge.id;
    const auto series = series_of(grouped[e]);
    for (const auto& [b, cell] : bin_series(series, bin_s)) {
      if (b < 0) continue;
      if (c.ratios.size() <= static_cast<std::size_t>(b)) c.ratios.resize(static_cast<std::size_t>(b) + 1, 0.0);
      c.ratios[static_cast<std::size_t>(b)] = std::clamp(capacity_ratio(edge, cell.first), 0.0, 1.0);
      c.peak_ratio = std::max(c.peak_ratio, std::clamp(capacity_ratio(edge, cell.second), 0.0, 1.0));
    }
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(),
            [](const EdgeCongestion& a, const EdgeCongestion& b) { return a.edge_id.value < b.edge_id.value; });
  return out;
}

std::vector<AgentDelta> agent_deltas(const RunResult& a, const RunResult& b) {
  std::map<std::int64_t, const AgentResult*> in_b;
  for (const AgentResult& r : b.agents) in_b[r.agent.value] = &r;
  std::vector<AgentDelta> out;
  for (const AgentResult& r : a.agents) {
    const auto it = in_b.find(r.agent.value);
    if (!r.finished || it == in_b.end() || !it->second->finished) continue;
    out.push_back({r.agent, r.actual_s, it->second->actual_s, r.actual_s - it->second->actual_s});
  }
  std::sort(out.begin(), out.end(), [](const AgentDelta& x, const AgentDelta& y) { return x.agent.value < y.agent.value; });
  return out;
}

}  // namespace mmr
