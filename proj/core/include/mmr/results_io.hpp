#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mmr/metrics.hpp"
#include "mmr/network.hpp"
#include "mmr/scenario_io.hpp"
#include "mmr/simulation.hpp"

namespace mmr {

/// CSV tables of a set of runs, in the order given.
std::string summary_csv(std::span<const RunResult* const> runs);
std::string agents_csv(std::span<const RunResult* const> runs);
std::string heatmap_csv(const MultiModalGraph& graph, std::span<const RunResult* const> runs, double bin_s);
std::string deltas_csv(std::span<const AgentDelta> deltas);
std::string diagnostics_log(std::span<const RunResult* const> runs);

/// Writes summary.csv, agents.csv, heatmap.csv and diagnostics.log into
/// `out_dir` (created if missing) and returns the written paths. Failed sweep
/// cells are listed in the diagnostics log only.
std::vector<std::filesystem::path> write_results(const MultiModalGraph& graph, const SweepResult& sweep,
                                                 double bin_s, const std::filesystem::path& out_dir);

/// One LineString feature per entry, with properties edge_id, peak_ratio and
/// ratios (per time bin). Coordinates are lon/lat when a projection is given.
std::string heatmap_geojson(const MultiModalGraph& graph, std::span<const EdgeCongestion> edges,
                            const std::optional<GeoOrigin>& projection = std::nullopt);
/// Features for every edge traversed in `run`.
void export_heatmap_geojson(const MultiModalGraph& graph, const RunResult& run, double bin_s,
                            const std::filesystem::path& out_path,
                            const std::optional<GeoOrigin>& projection = std::nullopt);

/// Fixed six-decimal formatting used by every CSV writer.
std::string format_fixed(double value);

/// Rows of a CSV file written by this library (no quoting needed).
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

}  // namespace mmr
