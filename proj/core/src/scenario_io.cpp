#include "mmr/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "mmr/error.hpp"

namespace mmr {

using json = nlohmann::ordered_json;

namespace {

constexpr double kEarthRadius = 6371008.8;

// ---------------------------------------------------------------------------
// Reading

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ParseError(where, what); }

std::string at(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
  expect_object(j, path);
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) fail(at(path, k), "unknown field");
  }
}

const json& require(const json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(at(path, key), "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  return v;
}

double number(const json& j, const std::string& path, const char* key) {
  return as_number(require(j, path, key), at(path, key));
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_number(*it, at(path, key));
}

std::optional<double> optional_number(const json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  return as_number(*it, at(path, key));
}

bool bool_or(const json& j, const std::string& path, const char* key, bool fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_bool(*it, at(path, key));
}

std::vector<double> numbers(const json& v, const std::string& path) {
  std::vector<double> out;
  const json& arr = as_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_number(arr[i], at(path, i)));
  return out;
}

Mode mode_of(const json& v, const std::string& path) {
  const auto m = parse_mode(as_string(v, path));
  if (!m) fail(path, "unknown mode '" + v.get<std::string>() + "'");
  return *m;
}

ModeSet modes_of(const json& v, const std::string& path) {
  ModeSet out;
  const json& arr = as_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.insert(mode_of(arr[i], at(path, i)));
  return out;
}

SwitchConditions read_conditions(const json& j, const std::string& path) {
  allow_keys(j, path,
             {"required_possession", "parking", "rental", "storage_for", "cost", "time", "max_cost",
              "turn_restricted", "toll", "service_window"});
  SwitchConditions c;
  if (const auto it = j.find("required_possession"); it != j.end() && !it->is_null()) {
    c.required_possession = mode_of(*it, at(path, "required_possession"));
  }
  c.parking_available = bool_or(j, path, "parking", c.parking_available);
  c.rental_available = bool_or(j, path, "rental", c.rental_available);
  if (const auto it = j.find("storage_for"); it != j.end()) c.storage_for = modes_of(*it, at(path, "storage_for"));
  c.switch_cost = number_or(j, path, "cost", 0.0);
  c.switch_time = number_or(j, path, "time", 0.0);
  c.max_cost = optional_number(j, path, "max_cost");
  c.turn_restricted = bool_or(j, path, "turn_restricted", false);
  c.toll = number_or(j, path, "toll", 0.0);
  if (const auto it = j.find("service_window"); it != j.end()) {
    const auto w = numbers(*it, at(path, "service_window"));
    if (w.size() != 2) fail(at(path, "service_window"), "expected [open, close]");
    c.service_window = std::make_pair(w[0], w[1]);
  }
  return c;
}

Node read_node(const json& j, const std::string& path, bool allow_switch_flag) {
  if (allow_switch_flag) {
    allow_keys(j, path, {"id", "x", "y", "modes", "link_radius", "switch"});
  } else {
    allow_keys(j, path, {"id", "x", "y", "modes", "link_radius"});
  }
  Node n;
  n.id = NodeId{as_int(require(j, path, "id"), at(path, "id"))};
  n.position = {number(j, path, "x"), number(j, path, "y")};
  n.modes = modes_of(require(j, path, "modes"), at(path, "modes"));
  n.link_radius = optional_number(j, path, "link_radius");
  if (allow_switch_flag) n.is_switch = bool_or(j, path, "switch", false);
  return n;
}

Edge read_edge(const json& j, const std::string& path, bool full) {
  if (full) {
    allow_keys(j, path,
               {"id", "from", "to", "modes", "kind", "length", "free_flow", "capacity", "bpr_alpha", "bpr_beta",
                "cost", "switch_conditions", "transit"});
  } else {
    allow_keys(j, path,
               {"id", "from", "to", "modes", "length", "free_flow", "capacity", "bpr_alpha", "bpr_beta", "cost"});
  }
  Edge e;
  e.id = EdgeId{as_int(require(j, path, "id"), at(path, "id"))};
  e.from = NodeId{as_int(require(j, path, "from"), at(path, "from"))};
  e.to = NodeId{as_int(require(j, path, "to"), at(path, "to"))};
  e.modes = modes_of(require(j, path, "modes"), at(path, "modes"));
  e.length = number(j, path, "length");
  if (const auto it = j.find("free_flow"); it != j.end()) {
    const std::string p = at(path, "free_flow");
    expect_object(*it, p);
    for (const auto& [k, v] : it->items()) {
      const auto m = parse_mode(k);
      if (!m) fail(at(p, k), "unknown mode");
      e.set_free_flow(*m, as_number(v, at(p, k)));
    }
  }
  e.capacity = number_or(j, path, "capacity", kUnbounded);
  e.bpr_alpha = number_or(j, path, "bpr_alpha", kDefaultBprAlpha);
  e.bpr_beta = number_or(j, path, "bpr_beta", kDefaultBprBeta);
  e.monetary_cost = number_or(j, path, "cost", 0.0);
  if (full) {
    if (const auto it = j.find("kind"); it != j.end()) {
      const auto kind = parse_edge_kind(as_string(*it, at(path, "kind")));
      if (!kind) fail(at(path, "kind"), "unknown edge kind");
      e.kind = *kind;
    }
    if (const auto it = j.find("switch_conditions"); it != j.end()) {
      e.switch_conditions = read_conditions(*it, at(path, "switch_conditions"));
    }
    if (const auto it = j.find("transit"); it != j.end()) {
      const std::string p = at(path, "transit");
      allow_keys(*it, p, {"line", "leg"});
      e.transit = TransitRef{static_cast<std::size_t>(as_int(require(*it, p, "line"), at(p, "line"))),
                             static_cast<std::size_t>(as_int(require(*it, p, "leg"), at(p, "leg")))};
    }
  }
  return e;
}

TransitLine read_line(const json& j, const std::string& path) {
  allow_keys(j, path, {"id", "stops", "departures", "leg_times", "capacity"});
  TransitLine line;
  line.id = LineId{as_int(require(j, path, "id"), at(path, "id"))};
  const json& stops = as_array(require(j, path, "stops"), at(path, "stops"));
  for (std::size_t i = 0; i < stops.size(); ++i) line.stops.push_back(NodeId{as_int(stops[i], at(at(path, "stops"), i))});
  line.departures = numbers(require(j, path, "departures"), at(path, "departures"));
  line.leg_times = numbers(require(j, path, "leg_times"), at(path, "leg_times"));
  line.vehicle_capacity = static_cast<int>(as_int(require(j, path, "capacity"), at(path, "capacity")));
  return line;
}

std::vector<WeightedNode> read_weighted_nodes(const json& v, const std::string& path) {
  std::vector<WeightedNode> out;
  const json& arr = as_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = at(path, i);
    if (arr[i].is_number_integer()) {
      out.push_back({NodeId{arr[i].get<std::int64_t>()}, 1.0});
      continue;
    }
    allow_keys(arr[i], p, {"node", "weight"});
    out.push_back({NodeId{as_int(require(arr[i], p, "node"), at(p, "node"))}, number_or(arr[i], p, "weight", 1.0)});
  }
  return out;
}

DemandZone read_zone(const json& j, const std::string& path) {
  allow_keys(j, path,
             {"id", "population", "origins", "destinations", "job_mix", "car_ownership", "bike_ownership"});
  DemandZone z;
  z.id = as_string(require(j, path, "id"), at(path, "id"));
  z.population = number(j, path, "population");
  z.origins = read_weighted_nodes(require(j, path, "origins"), at(path, "origins"));
  z.destinations = read_weighted_nodes(require(j, path, "destinations"), at(path, "destinations"));
  if (const auto it = j.find("job_mix"); it != j.end()) {
    const std::string p = at(path, "job_mix");
    const json& arr = as_array(*it, p);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string q = at(p, i);
      allow_keys(arr[i], q, {"job", "weight"});
      z.job_mix.push_back({as_string(require(arr[i], q, "job"), at(q, "job")), number_or(arr[i], q, "weight", 1.0)});
    }
  }
  z.car_ownership = number_or(j, path, "car_ownership", 0.0);
  z.bike_ownership = number_or(j, path, "bike_ownership", 0.0);
  return z;
}

JobWindow read_window(const json& j, const std::string& path) {
  allow_keys(j, path, {"job", "onward", "return"});
  JobWindow w;
  w.job = as_string(require(j, path, "job"), at(path, "job"));
  const auto onward = numbers(require(j, path, "onward"), at(path, "onward"));
  const auto back = numbers(require(j, path, "return"), at(path, "return"));
  if (onward.size() != 2) fail(at(path, "onward"), "expected [start, end]");
  if (back.size() != 2) fail(at(path, "return"), "expected [start, end]");
  w.onward_start = onward[0];
  w.onward_end = onward[1];
  w.return_start = back[0];
  w.return_end = back[1];
  return w;
}

UserProfile read_profile(const json& j, const std::string& path) {
  allow_keys(j, path, {"owns_car", "owns_bike", "budget", "weights", "walk_speed", "bike_speed"});
  UserProfile p;
  p.owns_car = bool_or(j, path, "owns_car", false);
  p.owns_bike = bool_or(j, path, "owns_bike", false);
  p.budget = number_or(j, path, "budget", kUnbounded);
  if (const auto it = j.find("weights"); it != j.end()) {
    const auto w = numbers(*it, at(path, "weights"));
    if (w.size() != 3) fail(at(path, "weights"), "expected [time, money, transfers]");
    p.objective_weights = {w[0], w[1], w[2]};
  }
  p.walk_speed = number_or(j, path, "walk_speed", p.walk_speed);
  p.bike_speed = number_or(j, path, "bike_speed", p.bike_speed);
  return p;
}

SimulationConfig read_simulation(const json& j, const std::string& path) {
  allow_keys(j, path,
             {"horizon_s", "alpha_grid", "seed", "population", "replan_limit", "lookahead_s", "bin_s",
              "return_trips", "epsilon", "allow_fallback", "max_labels"});
  SimulationConfig c;
  c.horizon_s = number_or(j, path, "horizon_s", c.horizon_s);
  if (const auto it = j.find("alpha_grid"); it != j.end()) c.alpha_grid = numbers(*it, at(path, "alpha_grid"));
  if (const auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) fail(at(path, "seed"), "expected a non-negative integer");
    c.seed = it->get<std::uint64_t>();
  }
  if (const auto it = j.find("population"); it != j.end()) {
    if (!it->is_number_unsigned()) fail(at(path, "population"), "expected a non-negative integer");
    c.population = it->get<std::size_t>();
  }
  if (const auto it = j.find("replan_limit"); it != j.end()) {
    c.replan_limit = static_cast<int>(as_int(*it, at(path, "replan_limit")));
  }
  c.lookahead_s = number_or(j, path, "lookahead_s", c.lookahead_s);
  c.bin_s = number_or(j, path, "bin_s", c.bin_s);
  c.return_trips = bool_or(j, path, "return_trips", c.return_trips);
  c.epsilon = number_or(j, path, "epsilon", c.epsilon);
  c.allow_fallback = bool_or(j, path, "allow_fallback", c.allow_fallback);
  if (const auto it = j.find("max_labels"); it != j.end()) {
    if (!it->is_number_unsigned()) fail(at(path, "max_labels"), "expected a positive integer");
    c.max_labels = it->get<std::size_t>();
  }
  return c;
}

void read_layer(const json& j, const std::string& path, std::string& name, UniModalGraph& layer) {
  allow_keys(j, path, {"name", "nodes", "edges"});
  name = j.contains("name") ? as_string(j["name"], at(path, "name")) : std::string{};
  const json& nodes = as_array(require(j, path, "nodes"), at(path, "nodes"));
  for (std::size_t i = 0; i < nodes.size(); ++i) layer.nodes.push_back(read_node(nodes[i], at(at(path, "nodes"), i), false));
  if (const auto it = j.find("edges"); it != j.end()) {
    const json& edges = as_array(*it, at(path, "edges"));
    for (std::size_t i = 0; i < edges.size(); ++i) {
      layer.edges.push_back(read_edge(edges[i], at(at(path, "edges"), i), false));
    }
  }
}

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte == 0 ? 0 : byte - 1), '\n');
    throw ParseError(source + ":" + std::to_string(line), "malformed JSON");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Writing

json modes_json(ModeSet s) {
  json out = json::array();
  for (Mode m : kAllModes) {
    if (s.contains(m)) out.push_back(std::string(to_string(m)));
  }
  return out;
}

void put_number(json& j, const char* key, double v) {
  if (std::isfinite(v)) j[key] = v;
}

json conditions_json(const SwitchConditions& c) {
  json j = json::object();
  if (c.required_possession) j["required_possession"] = std::string(to_string(*c.required_possession));
  j["parking"] = c.parking_available;
  j["rental"] = c.rental_available;
  j["storage_for"] = modes_json(c.storage_for);
  j["cost"] = c.switch_cost;
  j["time"] = c.switch_time;
  if (c.max_cost) put_number(j, "max_cost", *c.max_cost);
  if (c.turn_restricted) j["turn_restricted"] = true;
  if (c.toll != 0.0) j["toll"] = c.toll;
  if (c.service_window) j["service_window"] = {c.service_window->first, c.service_window->second};
  return j;
}

json node_json(const Node& n, bool with_switch_flag) {
  json j = {{"id", n.id.value}, {"x", n.position.x}, {"y", n.position.y}, {"modes", modes_json(n.modes)}};
  if (n.link_radius) j["link_radius"] = *n.link_radius;
  if (with_switch_flag && n.is_switch) j["switch"] = true;
  return j;
}

json edge_json(const Edge& e, bool full) {
  json j = {{"id", e.id.value}, {"from", e.from.value}, {"to", e.to.value}, {"modes", modes_json(e.modes)}};
  if (full) j["kind"] = std::string(to_string(e.kind));
  j["length"] = e.length;
  json ff = json::object();
  for (Mode m : kAllModes) {
    if (e.free_flow(m) != 0.0) ff[std::string(to_string(m))] = e.free_flow(m);
  }
  if (!ff.empty()) j["free_flow"] = ff;
  put_number(j, "capacity", e.capacity);
  if (e.bpr_alpha != kDefaultBprAlpha) j["bpr_alpha"] = e.bpr_alpha;
  if (e.bpr_beta != kDefaultBprBeta) j["bpr_beta"] = e.bpr_beta;
  if (e.monetary_cost != 0.0) j["cost"] = e.monetary_cost;
  if (full && e.switch_conditions) j["switch_conditions"] = conditions_json(*e.switch_conditions);
  if (full && e.transit) j["transit"] = {{"line", e.transit->line}, {"leg", e.transit->leg}};
  return j;
}

json line_json(const TransitLine& l) {
  json stops = json::array();
  for (NodeId s : l.stops) stops.push_back(s.value);
  return {{"id", l.id.value},
          {"stops", stops},
          {"departures", l.departures},
          {"leg_times", l.leg_times},
          {"capacity", l.vehicle_capacity}};
}

json weighted_json(const std::vector<WeightedNode>& nodes) {
  json out = json::array();
  for (const WeightedNode& n : nodes) out.push_back({{"node", n.node.value}, {"weight", n.weight}});
  return out;
}

}  // namespace

std::array<double, 2> unproject(const GeoOrigin& origin, Point p) {
  constexpr double deg = 180.0 / std::numbers::pi;
  const double lat = origin.lat + p.y / kEarthRadius * deg;
  const double lon = origin.lon + p.x / (kEarthRadius * std::cos(origin.lat / deg)) * deg;
  return {lon, lat};
}

Scenario parse_scenario(std::string_view text, const std::string& source) {
  const json doc = parse_json(text, source);
  allow_keys(doc, "",
             {"name", "link_radius", "projection", "layers", "transit", "scm_defaults", "switch_overrides",
              "background", "zones", "job_windows", "profile", "simulation"});
  Scenario s;
  if (const auto it = doc.find("name"); it != doc.end()) s.name = as_string(*it, "name");
  s.link_radius = number_or(doc, "", "link_radius", kDefaultLinkRadius);
  if (const auto it = doc.find("projection"); it != doc.end()) {
    allow_keys(*it, "projection", {"lat", "lon"});
    s.projection = GeoOrigin{number(*it, "projection", "lat"), number(*it, "projection", "lon")};
  }

  const json& layers = as_array(require(doc, "", "layers"), "layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    s.layer_names.emplace_back();
    s.layers.emplace_back();
    read_layer(layers[i], at("layers", i), s.layer_names.back(), s.layers.back());
  }

  if (const auto it = doc.find("transit"); it != doc.end()) {
    allow_keys(*it, "transit", {"stops", "lines", "first_edge_id"});
    if (const auto st = it->find("stops"); st != it->end()) {
      const json& stops = as_array(*st, "transit.stops");
      for (std::size_t i = 0; i < stops.size(); ++i) {
        s.transit_stops.push_back(read_node(stops[i], at("transit.stops", i), false));
      }
    }
    if (const auto ln = it->find("lines"); ln != it->end()) {
      const json& lines = as_array(*ln, "transit.lines");
      for (std::size_t i = 0; i < lines.size(); ++i) s.transit_lines.push_back(read_line(lines[i], at("transit.lines", i)));
    }
    if (const auto f = it->find("first_edge_id"); f != it->end()) {
      s.transit_first_edge_id = as_int(*f, "transit.first_edge_id");
    }
  }

  if (const auto it = doc.find("scm_defaults"); it != doc.end()) {
    allow_keys(*it, "scm_defaults", {"base", "by_target_mode"});
    if (const auto b = it->find("base"); b != it->end()) s.scm_defaults.base = read_conditions(*b, "scm_defaults.base");
    if (const auto b = it->find("by_target_mode"); b != it->end()) {
      expect_object(*b, "scm_defaults.by_target_mode");
      for (const auto& [k, v] : b->items()) {
        const std::string p = at("scm_defaults.by_target_mode", k);
        const auto m = parse_mode(k);
        if (!m) fail(p, "unknown mode");
        s.scm_defaults.by_target_mode[*m] = read_conditions(v, p);
      }
    }
  }

  if (const auto it = doc.find("switch_overrides"); it != doc.end()) {
    const json& arr = as_array(*it, "switch_overrides");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = at("switch_overrides", i);
      allow_keys(arr[i], p, {"from", "to", "conditions"});
      s.switch_overrides.push_back({NodeId{as_int(require(arr[i], p, "from"), at(p, "from"))},
                                    NodeId{as_int(require(arr[i], p, "to"), at(p, "to"))},
                                    read_conditions(require(arr[i], p, "conditions"), at(p, "conditions"))});
    }
  }

  if (const auto it = doc.find("background"); it != doc.end()) {
    allow_keys(*it, "background", {"period", "edges"});
    s.background = BackgroundProfile(number_or(*it, "background", "period", kSecondsPerDay));
    if (const auto e = it->find("edges"); e != it->end()) {
      const json& arr = as_array(*e, "background.edges");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = at("background.edges", i);
        allow_keys(arr[i], p, {"edge", "steps"});
        const EdgeId edge{as_int(require(arr[i], p, "edge"), at(p, "edge"))};
        std::vector<VolumeStep> steps;
        const json& raw = as_array(require(arr[i], p, "steps"), at(p, "steps"));
        for (std::size_t k = 0; k < raw.size(); ++k) {
          const auto v = numbers(raw[k], at(at(p, "steps"), k));
          if (v.size() != 3) fail(at(at(p, "steps"), k), "expected [start, end, vehicles]");
          steps.push_back({v[0], v[1], v[2]});
        }
        try {
          s.background.set(edge, std::move(steps));
        } catch (const std::exception& ex) {
          fail(at(p, "steps"), ex.what());
        }
      }
    }
  }

  if (const auto it = doc.find("zones"); it != doc.end()) {
    const json& arr = as_array(*it, "zones");
    for (std::size_t i = 0; i < arr.size(); ++i) s.zones.push_back(read_zone(arr[i], at("zones", i)));
  }
  if (const auto it = doc.find("job_windows"); it != doc.end()) {
    s.job_windows.clear();
    const json& arr = as_array(*it, "job_windows");
    for (std::size_t i = 0; i < arr.size(); ++i) s.job_windows.push_back(read_window(arr[i], at("job_windows", i)));
  }
  if (const auto it = doc.find("profile"); it != doc.end()) s.profile = read_profile(*it, "profile");
  if (const auto it = doc.find("simulation"); it != doc.end()) s.simulation = read_simulation(*it, "simulation");
  return s;
}

MultiModalGraph build_graph(const Scenario& scenario) {
  std::vector<UniModalGraph> layers = scenario.layers;
  if (!scenario.transit_lines.empty() || !scenario.transit_stops.empty()) {
    std::int64_t first = 0;
    if (scenario.transit_first_edge_id) {
      first = *scenario.transit_first_edge_id;
    } else {
      for (const UniModalGraph& l : layers) {
        for (const Edge& e : l.edges) first = std::max(first, e.id.value + 1);
      }
    }
    layers.push_back(make_transit_layer(scenario.transit_stops, scenario.transit_lines, first));
  }
  return merge_graphs(layers, scenario.link_radius, scenario.scm_defaults, scenario.switch_overrides);
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> findings;
  std::optional<MultiModalGraph> graph;
  try {
    graph = build_graph(s);
  } catch (const Error& e) {
    findings.push_back(std::string("graph: ") + e.what());
  }
  if (graph) {
    for (auto& f : validate_graph(*graph).findings) findings.push_back(std::move(f));
  }

  std::unordered_set<NodeId> nodes;
  std::unordered_set<EdgeId> edges;
  if (graph) {
    for (const Node& n : graph->nodes()) nodes.insert(n.id);
    for (const Edge& e : graph->edges()) edges.insert(e.id);
  }

  std::set<std::string> jobs;
  for (const JobWindow& w : s.job_windows) {
    jobs.insert(w.job);
    if (!(w.onward_start <= w.onward_end) || !(w.return_start <= w.return_end)) {
      findings.push_back("job window " + w.job + ": start after end");
    }
  }

  std::set<std::string> zone_ids;
  for (const DemandZone& z : s.zones) {
    const std::string name = "zone " + z.id;
    if (!zone_ids.insert(z.id).second) findings.push_back(name + ": duplicate zone id");
    if (z.population < 0.0) findings.push_back(name + ": negative population");
    auto check_nodes = [&](const std::vector<WeightedNode>& list, const char* what) {
      if (list.empty()) findings.push_back(name + ": no " + what);
      double total = 0.0;
      for (const WeightedNode& n : list) {
        if (graph && !nodes.contains(n.node)) {
          findings.push_back(name + ": " + what + " references missing node " + std::to_string(n.node.value));
        }
        if (n.weight < 0.0) findings.push_back(name + ": negative weight on node " + std::to_string(n.node.value));
        total += std::max(n.weight, 0.0);
      }
      if (!list.empty() && total <= 0.0) findings.push_back(name + ": all " + what + " weights are zero");
    };
    check_nodes(z.origins, "origins");
    check_nodes(z.destinations, "destinations");
    for (const JobShare& share : z.job_mix) {
      if (!jobs.contains(share.job)) findings.push_back(name + ": job type " + share.job + " has no window");
      if (share.weight < 0.0) findings.push_back(name + ": negative weight for job type " + share.job);
    }
    if (z.car_ownership < 0.0 || z.car_ownership > 1.0) findings.push_back(name + ": car_ownership outside [0, 1]");
    if (z.bike_ownership < 0.0 || z.bike_ownership > 1.0) findings.push_back(name + ": bike_ownership outside [0, 1]");
  }

  if (graph) {
    for (const auto& [edge, steps] : s.background.entries()) {
      if (!edges.contains(edge)) {
        findings.push_back("background volume references missing edge " + std::to_string(edge.value));
      }
    }
    for (const SwitchOverride& o : s.switch_overrides) {
      for (NodeId id : {o.from, o.to}) {
        if (!nodes.contains(id)) {
          findings.push_back("switch override references missing node " + std::to_string(id.value));
        }
      }
    }
  }

  const SimulationConfig& c = s.simulation;
  for (double a : c.alpha_grid) {
    if (!(a >= 0.0 && a <= 1.0)) findings.push_back("simulation.alpha_grid: value outside [0, 1]");
  }
  if (c.population == 0) findings.push_back("simulation.population: must be positive");
  if (!(c.horizon_s > 0.0)) findings.push_back("simulation.horizon_s: must be positive");
  if (!(c.bin_s > 0.0)) findings.push_back("simulation.bin_s: must be positive");
  if (c.epsilon < 0.0) findings.push_back("simulation.epsilon: must be non-negative");
  if (c.replan_limit < 0) findings.push_back("simulation.replan_limit: must be non-negative");
  if (!(s.profile.walk_speed > 0.0) || !(s.profile.bike_speed > 0.0)) {
    findings.push_back("profile: speeds must be positive");
  }
  return findings;
}

Scenario load_scenario_text(std::string_view text, const std::string& source) {
  Scenario s = parse_scenario(text, source);
  auto findings = validate_scenario(s);
  if (!findings.empty()) throw ValidationError(std::move(findings));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return load_scenario_text(read_file(path), path.string());
}

std::string serialize_scenario(const Scenario& s) {
  json doc = json::object();
  if (!s.name.empty()) doc["name"] = s.name;
  doc["link_radius"] = s.link_radius;
  if (s.projection) doc["projection"] = {{"lat", s.projection->lat}, {"lon", s.projection->lon}};

  json layers = json::array();
  for (std::size_t i = 0; i < s.layers.size(); ++i) {
    json layer = json::object();
    if (i < s.layer_names.size() && !s.layer_names[i].empty()) layer["name"] = s.layer_names[i];
    json nodes = json::array();
    for (const Node& n : s.layers[i].nodes) nodes.push_back(node_json(n, false));
    json edges = json::array();
    for (const Edge& e : s.layers[i].edges) edges.push_back(edge_json(e, false));
    layer["nodes"] = nodes;
    layer["edges"] = edges;
    layers.push_back(layer);
  }
  doc["layers"] = layers;

  if (!s.transit_stops.empty() || !s.transit_lines.empty() || s.transit_first_edge_id) {
    json transit = json::object();
    json stops = json::array();
    for (const Node& n : s.transit_stops) stops.push_back(node_json(n, false));
    json lines = json::array();
    for (const TransitLine& l : s.transit_lines) lines.push_back(line_json(l));
    transit["stops"] = stops;
    transit["lines"] = lines;
    if (s.transit_first_edge_id) transit["first_edge_id"] = *s.transit_first_edge_id;
    doc["transit"] = transit;
  }

  json by_mode = json::object();
  for (const auto& [m, c] : s.scm_defaults.by_target_mode) by_mode[std::string(to_string(m))] = conditions_json(c);
  doc["scm_defaults"] = {{"base", conditions_json(s.scm_defaults.base)}, {"by_target_mode", by_mode}};

  if (!s.switch_overrides.empty()) {
    json arr = json::array();
    for (const SwitchOverride& o : s.switch_overrides) {
      arr.push_back({{"from", o.from.value}, {"to", o.to.value}, {"conditions", conditions_json(o.conditions)}});
    }
    doc["switch_overrides"] = arr;
  }

  json bg_edges = json::array();
  for (const auto& [edge, steps] : s.background.entries()) {
    json rows = json::array();
    for (const VolumeStep& st : steps) rows.push_back({st.start, st.end, st.vehicles});
    bg_edges.push_back({{"edge", edge.value}, {"steps", rows}});
  }
  doc["background"] = {{"period", s.background.period()}, {"edges", bg_edges}};

  json zones = json::array();
  for (const DemandZone& z : s.zones) {
    json mix = json::array();
    for (const JobShare& share : z.job_mix) mix.push_back({{"job", share.job}, {"weight", share.weight}});
    zones.push_back({{"id", z.id},
                     {"population", z.population},
                     {"origins", weighted_json(z.origins)},
                     {"destinations", weighted_json(z.destinations)},
                     {"job_mix", mix},
                     {"car_ownership", z.car_ownership},
                     {"bike_ownership", z.bike_ownership}});
  }
  doc["zones"] = zones;

  json windows = json::array();
  for (const JobWindow& w : s.job_windows) {
    windows.push_back({{"job", w.job},
                       {"onward", {w.onward_start, w.onward_end}},
                       {"return", {w.return_start, w.return_end}}});
  }
  doc["job_windows"] = windows;

  json profile = {{"owns_car", s.profile.owns_car},
                  {"owns_bike", s.profile.owns_bike},
                  {"weights", s.profile.objective_weights},
                  {"walk_speed", s.profile.walk_speed},
                  {"bike_speed", s.profile.bike_speed}};
  put_number(profile, "budget", s.profile.budget);
  doc["profile"] = profile;

  const SimulationConfig& c = s.simulation;
  doc["simulation"] = {{"horizon_s", c.horizon_s},       {"alpha_grid", c.alpha_grid},
                       {"seed", c.seed},                 {"population", c.population},
                       {"replan_limit", c.replan_limit}, {"lookahead_s", c.lookahead_s},
                       {"bin_s", c.bin_s},               {"return_trips", c.return_trips},
                       {"epsilon", c.epsilon},           {"allow_fallback", c.allow_fallback},
                       {"max_labels", c.max_labels}};
  return doc.dump(2) + "\n";
}

std::string serialize_graph(const MultiModalGraph& graph) {
  json nodes = json::array();
  for (const Node& n : graph.nodes()) nodes.push_back(node_json(n, true));
  json edges = json::array();
  for (const Edge& e : graph.edges()) edges.push_back(edge_json(e, true));
  json lines = json::array();
  for (const TransitLine& l : graph.lines()) lines.push_back(line_json(l));
  json doc = {{"link_radius", graph.link_radius()}, {"nodes", nodes}, {"edges", edges}, {"lines", lines}};
  return doc.dump(1) + "\n";
}

MultiModalGraph parse_graph(std::string_view text, const std::string& source) {
  const json doc = parse_json(text, source);
  allow_keys(doc, "", {"link_radius", "nodes", "edges", "lines"});
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<TransitLine> lines;
  const json& n = as_array(require(doc, "", "nodes"), "nodes");
  for (std::size_t i = 0; i < n.size(); ++i) nodes.push_back(read_node(n[i], at("nodes", i), true));
  const json& e = as_array(require(doc, "", "edges"), "edges");
  for (std::size_t i = 0; i < e.size(); ++i) edges.push_back(read_edge(e[i], at("edges", i), true));
  if (const auto it = doc.find("lines"); it != doc.end()) {
    const json& l = as_array(*it, "lines");
    for (std::size_t i = 0; i < l.size(); ++i) lines.push_back(read_line(l[i], at("lines", i)));
  }
  return MultiModalGraph(std::move(nodes), std::move(edges), std::move(lines),
                         number_or(doc, "", "link_radius", kDefaultLinkRadius));
}

void save_graph(const MultiModalGraph& graph, const std::filesystem::path& path) {
  write_file(path, serialize_graph(graph));
}

MultiModalGraph load_graph(const std::filesystem::path& path) { return parse_graph(read_file(path), path.string()); }

}  // namespace mmr
