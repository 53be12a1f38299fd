#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mmr/network.hpp"
#include "mmr/simulation.hpp"

namespace mmr {

struct RunSummary {
  double alpha = 0.0;
  double mean_ntt = 0.0;
  double var_ntt = 0.0;  // population variance over finished agents
  std::size_t agents = 0;
  std::size_t finished = 0;
  std::size_t unfinished = 0;  // agents with an unfinished or unroutable trip
  std::array<std::size_t, 4> mode_counts{};  // agents using each mode, indexed by Mode
  std::size_t fallbacks = 0;
  std::size_t replans = 0;

  double mode_share(Mode m) const {
    return finished == 0 ? 0.0 : static_cast<double>(mode_counts[index_of(m)]) / static_cast<double>(finished);
  }
};

RunSummary summarize(const RunResult& run);

/// Concurrent agents on one edge as a right-continuous step function.
struct VolumeStepPoint {
  double time;
  int volume;  // from `time` until the next point
};
std::vector<VolumeStepPoint> volume_series(const RunResult& run, std::size_t edge);

/// Integral of the volume series over all time, in agent-seconds.
double agent_seconds(std::span<const VolumeStepPoint> series);

struct HeatmapCell {
  std::size_t edge = 0;
  EdgeId edge_id;
  double bin_start = 0.0;
  double volume = 0.0;       // time-averaged agents over the bin
  double peak_volume = 0.0;  // maximum concurrent agents within the bin
  double ratio = 0.0;        // volume / capacity, 0 for uncapacitated edges
  double peak_ratio = 0.0;
};

/// Bins with any traffic, ordered by (edge id, bin start).
std::vector<HeatmapCell> heatmap(const MultiModalGraph& graph, const RunResult& run, double bin_s);

struct EdgeCongestion {
  std::size_t edge = 0;
  EdgeId edge_id;
  double peak_ratio = 0.0;  // clamped to [0, 1]
  std::vector<double> ratios;  // per bin from 0 up to the last used bin, clamped
};

/// One entry per edge traversed at least once, ordered by edge id.
std::vector<EdgeCongestion> edge_congestion(const MultiModalGraph& graph, const RunResult& run, double bin_s);

struct AgentDelta {
  AgentId agent;
  double actual_a = 0.0;
  double actual_b = 0.0;
  double delta = 0.0;  // actual_a - actual_b; positive means faster in run b
};

/// Agents finished in both runs, ordered by id.
std::vector<AgentDelta> agent_deltas(const RunResult& a, const RunResult& b);

}  // namespace mmr
