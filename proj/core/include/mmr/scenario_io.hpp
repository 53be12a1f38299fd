#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmr/congestion.hpp"
#include "mmr/network.hpp"
#include "mmr/population.hpp"
#include "mmr/simulation.hpp"

namespace mmr {

/// Reference point of a local equirectangular projection; x grows east and y
/// north, in metres.
struct GeoOrigin {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const GeoOrigin&, const GeoOrigin&) = default;
};

/// [lon, lat] of a projected point.
std::array<double, 2> unproject(const GeoOrigin& origin, Point p);

struct Scenario {
  std::string name;
  double link_radius = kDefaultLinkRadius;
  std::optional<GeoOrigin> projection;
  std::vector<std::string> layer_names;
  std::vector<UniModalGraph> layers;
  std::vector<Node> transit_stops;
  std::vector<TransitLine> transit_lines;
  std::optional<std::int64_t> transit_first_edge_id;  // default: one past the largest layer edge id
  SwitchDefaults scm_defaults;
  std::vector<SwitchOverride> switch_overrides;
  BackgroundProfile background;
  std::vector<DemandZone> zones;
  std::vector<JobWindow> job_windows = default_job_windows();
  UserProfile profile;
  SimulationConfig simulation;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Merged multi-modal graph of the scenario (layers, transit, switch links).
MultiModalGraph build_graph(const Scenario& scenario);

/// Structural checks beyond JSON shape: graph findings plus zone, background,
/// override and configuration references. Empty when the scenario is usable.
std::vector<std::string> validate_scenario(const Scenario& scenario);

/// Parses without validating. Throws ParseError naming the line or field.
Scenario parse_scenario(std::string_view text, const std::string& source = "<string>");

/// Parses and validates; throws ParseError, ValidationError or IoError.
Scenario load_scenario(const std::filesystem::path& path);
Scenario load_scenario_text(std::string_view text, const std::string& source = "<string>");

std::string serialize_scenario(const Scenario& scenario);

/// Merged graph cache.
std::string serialize_graph(const MultiModalGraph& graph);
MultiModalGraph parse_graph(std::string_view text, const std::string& source = "<string>");
void save_graph(const MultiModalGraph& graph, const std::filesystem::path& path);
MultiModalGraph load_graph(const std::filesystem::path& path);

}  // namespace mmr
