#include "mmr/network.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <tuple>
#include <vector>

#include "mmr/error.hpp"
#include "mmr/kd_tree.hpp"
#include "oracles.hpp"

namespace mmr {
namespace {

using testing::Rng;

Node make_node(std::int64_t id, double x, double y, ModeSet modes) {
  Node n;
  n.id = NodeId{id};
  n.position = {x, y};
  n.modes = modes;
  return n;
}

UniModalGraph single_node_layer(std::int64_t id, double x, Mode mode) {
  UniModalGraph g;
  g.nodes.push_back(make_node(id, x, 0, ModeSet{mode}));
  return g;
}

std::size_t switch_links(const MultiModalGraph& g) {
  return static_cast<std::size_t>(std::count_if(g.edges().begin(), g.edges().end(),
                                                [](const Edge& e) { return e.kind == EdgeKind::SwitchLink; }));
}

TEST(MergeGraphs, LinksNodesWithinRadius) {
  const std::vector<UniModalGraph> layers{single_node_layer(1, 0, Mode::Walk), single_node_layer(2, 50, Mode::Car)};
  const MultiModalGraph near = merge_graphs(layers, 100, SwitchDefaults{});
  EXPECT_EQ(switch_links(near), 2u);
  EXPECT_TRUE(near.node(0).is_switch);
  EXPECT_TRUE(near.node(1).is_switch);
  const MultiModalGraph far = merge_graphs(layers, 30, SwitchDefaults{});
  EXPECT_EQ(switch_links(far), 0u);
}

TEST(MergeGraphs, SwitchLinksMatchAllPairsScan) {
  Rng rng(11);
  std::vector<UniModalGraph> layers(3);
  std::int64_t id = 1;
  const Mode modes[] = {Mode::Walk, Mode::Car, Mode::Bike};
  for (std::size_t l = 0; l < 3; ++l) {
    for (int i = 0; i < 100; ++i) {
      layers[l].nodes.push_back(make_node(id++, rng.uniform(0, 2000), rng.uniform(0, 2000), ModeSet{modes[l]}));
    }
  }
  const MultiModalGraph g = merge_graphs(layers, 80, SwitchDefaults{});

  std::set<std::pair<std::int64_t, std::int64_t>> expected;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      if (a == b) continue;
      for (const Node& u : layers[a].nodes) {
        for (const Node& v : layers[b].nodes) {
          if (distance(u.position, v.position) <= 80) expected.emplace(u.id.value, v.id.value);
        }
      }
    }
  }
  std::set<std::pair<std::int64_t, std::int64_t>> got;
  for (const Edge& e : g.edges()) {
    if (e.kind == EdgeKind::SwitchLink) {
      EXPECT_TRUE(got.emplace(e.from.value, e.to.value).second) << "duplicate link";
    }
  }
  EXPECT_EQ(got, expected);
  EXPECT_FALSE(expected.empty());
}

TEST(MergeGraphs, LinksAreSymmetric) {
  Rng rng(12);
  std::vector<UniModalGraph> layers(2);
  for (int i = 0; i < 60; ++i) {
    layers[0].nodes.push_back(make_node(i + 1, rng.uniform(0, 500), rng.uniform(0, 500), ModeSet{Mode::Walk}));
    Node n = make_node(i + 101, rng.uniform(0, 500), rng.uniform(0, 500), ModeSet{Mode::Car});
    if (i % 7 == 0) n.link_radius = 120;  // per-node override
    layers[1].nodes.push_back(n);
  }
  const MultiModalGraph g = merge_graphs(layers, 40, SwitchDefaults{});
  std::set<std::pair<std::int64_t, std::int64_t>> links;
  for (const Edge& e : g.edges()) {
    if (e.kind == EdgeKind::SwitchLink) links.emplace(e.from.value, e.to.value);
  }
  for (const auto& [u, v] : links) EXPECT_TRUE(links.contains({v, u}));
  EXPECT_TRUE(validate_graph(g).ok()) << validate_graph(g).findings.front();
}

TEST(MergeGraphs, RepeatedNodeIdThrows) {
  const std::vector<UniModalGraph> layers{single_node_layer(1, 0, Mode::Walk), single_node_layer(1, 50, Mode::Car)};
  EXPECT_THROW(merge_graphs(layers, 100, SwitchDefaults{}), OverlappingIds);
  const std::vector<NodeId> shared{NodeId{1}};
  const MultiModalGraph g = merge_graphs(layers, 100, SwitchDefaults{}, {}, shared);
  ASSERT_EQ(g.node_count(), 1u);
  EXPECT_EQ(g.node(0).modes, (ModeSet{Mode::Walk, Mode::Car}));
}

TEST(MergeGraphs, MergingNothingIsIdempotent) {
  Rng rng(13);
  std::vector<UniModalGraph> layers(2);
  for (int i = 0; i < 30; ++i) {
    layers[0].nodes.push_back(make_node(i + 1, rng.uniform(0, 300), rng.uniform(0, 300), ModeSet{Mode::Walk}));
    layers[1].nodes.push_back(make_node(i + 101, rng.uniform(0, 300), rng.uniform(0, 300), ModeSet{Mode::Car}));
  }
  SwitchDefaults defaults;
  defaults.base.switch_time = 30;
  const MultiModalGraph once = merge_graphs(layers, 50, defaults);
  const MultiModalGraph twice = merge_graphs(once, {}, defaults);
  EXPECT_EQ(once, twice);
}

TEST(MergeGraphs, OverridesReplaceDefaults) {
  const std::vector<UniModalGraph> layers{single_node_layer(1, 0, Mode::Walk), single_node_layer(2, 10, Mode::Car)};
  SwitchDefaults defaults;
  defaults.base.switch_time = 30;
  SwitchOverride o{NodeId{1}, NodeId{2}, {}};
  o.conditions.switch_cost = 5;
  const MultiModalGraph g = merge_graphs(layers, 100, defaults, std::vector<SwitchOverride>{o});
  for (const Edge& e : g.edges()) {
    if (e.from == NodeId{1}) {
      EXPECT_EQ(e.switch_conditions->switch_cost, 5);
    } else {
      EXPECT_EQ(e.switch_conditions->switch_time, 30);
      // Defaults into a walk node require nothing.
      EXPECT_FALSE(e.switch_conditions->required_possession.has_value());
    }
  }
}

TEST(SwitchDefaults, CarOnlyTargetsRequireACar) {
  SwitchDefaults d;
  EXPECT_EQ(d.for_target(ModeSet{Mode::Car}).required_possession, Mode::Car);
  EXPECT_EQ(d.for_target(ModeSet{Mode::Bike}).required_possession, Mode::Bike);
  EXPECT_FALSE(d.for_target(ModeSet{Mode::Walk}).required_possession.has_value());
  d.by_target_mode[Mode::Transit].switch_cost = 2;
  EXPECT_EQ(d.for_target(ModeSet{Mode::Transit}).switch_cost, 2);
}

TEST(NearestWithin, OwnPositionAndEmptyGraph) {
  const MultiModalGraph g({make_node(1, 5, 5, ModeSet{Mode::Walk}), make_node(2, 6, 5, ModeSet{Mode::Walk})}, {}, {});
  EXPECT_EQ(nearest_within(g, {5, 5}, 0), (std::vector<NodeId>{NodeId{1}}));
  EXPECT_EQ(nearest_within(g, {5, 5}, 1), (std::vector<NodeId>{NodeId{1}, NodeId{2}}));
  EXPECT_TRUE(nearest_within(MultiModalGraph{}, {0, 0}, 100).empty());
}

TEST(NearestWithin, MatchesLinearScan) {
  Rng rng(14);
  std::vector<Node> nodes;
  for (int i = 0; i < 1000; ++i) {
    // Coarse grid coordinates force distance ties, exercising the id order.
    nodes.push_back(make_node(1000 - i, rng.integer(0, 100) * 10.0, rng.integer(0, 100) * 10.0, ModeSet{Mode::Walk}));
  }
  const MultiModalGraph g(nodes, {}, {});
  for (int q = 0; q < 100; ++q) {
    const Point p{rng.uniform(-50, 1050), rng.uniform(-50, 1050)};
    const double r = rng.uniform(0, 150);
    std::vector<std::tuple<double, std::int64_t>> scan;
    for (const Node& n : nodes) {
      const double d = distance(n.position, p);
      if (d <= r) scan.emplace_back(d, n.id.value);
    }
    std::sort(scan.begin(), scan.end());
    std::vector<NodeId> expected;
    for (const auto& [d, id] : scan) expected.push_back(NodeId{id});
    EXPECT_EQ(nearest_within(g, p, r), expected);
  }
}

TEST(KdTree, RadiusQueriesMatchLinearScan) {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point> pts;
    const int n = rng.integer(0, 400);
    for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
    const KdTree tree(pts);
    for (int q = 0; q < 50; ++q) {
      const Point c{rng.uniform(-10, 110), rng.uniform(-10, 110)};
      const double r = rng.uniform(0, 30);
      std::vector<std::size_t> expected;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (distance(pts[i], c) <= r) expected.push_back(i);
      }
      auto got = tree.within(c, r);
      std::sort(got.begin(), got.end());
      EXPECT_EQ(got, expected);
    }
  }
}

Edge link_into(ModeSet target, SwitchConditions c) {
  Edge e;
  e.id = EdgeId{1};
  e.from = NodeId{1};
  e.to = NodeId{2};
  e.kind = EdgeKind::SwitchLink;
  e.modes = target;
  e.switch_conditions = c;
  return e;
}

TEST(EvaluateScm, CarToBusNeedsParking) {
  SwitchConditions c;
  c.parking_available = true;
  c.switch_cost = 2;
  UserProfile u;
  u.owns_car = true;
  u.budget = 10;
  const PossessionState carrying_car{ModeSet{Mode::Car}, {}};
  EXPECT_TRUE(evaluate_scm(link_into(ModeSet{Mode::Transit}, c), u, 0, carrying_car));
  EXPECT_EQ(switch_outcome(link_into(ModeSet{Mode::Transit}, c), ModeSet{Mode::Car}), ModeSet{});
  c.parking_available = false;
  EXPECT_FALSE(evaluate_scm(link_into(ModeSet{Mode::Transit}, c), u, 0, carrying_car));
}

TEST(EvaluateScm, BikeNeedsStorageOrParking) {
  SwitchConditions c;
  c.parking_available = false;
  const PossessionState bike{ModeSet{Mode::Bike}, {}};
  EXPECT_FALSE(evaluate_scm(link_into(ModeSet{Mode::Transit}, c), UserProfile{}, 0, bike));
  c.storage_for.insert(Mode::Bike);
  EXPECT_TRUE(evaluate_scm(link_into(ModeSet{Mode::Transit}, c), UserProfile{}, 0, bike));
  EXPECT_EQ(switch_outcome(link_into(ModeSet{Mode::Transit}, c), ModeSet{Mode::Bike}), ModeSet{Mode::Bike});
}

TEST(EvaluateScm, PossessionRentalAndBudget) {
  SwitchConditions c;
  c.required_possession = Mode::Car;
  const Edge into_car = link_into(ModeSet{Mode::Car}, c);
  EXPECT_FALSE(evaluate_scm(into_car, UserProfile{}, 0, PossessionState{}));
  EXPECT_TRUE(evaluate_scm(into_car, UserProfile{}, 0, PossessionState{ModeSet{Mode::Car}, {}}));
  c.rental_available = true;
  c.switch_cost = 3;
  const Edge rental = link_into(ModeSet{Mode::Car}, c);
  UserProfile u;
  u.budget = 5;
  EXPECT_TRUE(evaluate_scm(rental, u, 0, PossessionState{}));
  EXPECT_EQ(switch_outcome(rental, ModeSet{}), ModeSet{Mode::Car});
  EXPECT_FALSE(evaluate_scm(rental, u, 0, PossessionState{}, 2.5));  // 3 > 5 - 2.5
  c.max_cost = 2;
  EXPECT_FALSE(evaluate_scm(link_into(ModeSet{Mode::Car}, c), u, 0, PossessionState{}));
}

TEST(EvaluateScm, OptionalExtras) {
  SwitchConditions c;
  c.service_window = std::make_pair(3600.0, 7200.0);
  const Edge windowed = link_into(ModeSet{Mode::Walk}, c);
  EXPECT_FALSE(evaluate_scm(windowed, UserProfile{}, 100, PossessionState{}));
  EXPECT_TRUE(evaluate_scm(windowed, UserProfile{}, 3600, PossessionState{}));
  EXPECT_TRUE(evaluate_scm(windowed, UserProfile{}, 86400 + 4000, PossessionState{}));
  c.service_window.reset();
  c.turn_restricted = true;
  EXPECT_FALSE(evaluate_scm(link_into(ModeSet{Mode::Walk}, c), UserProfile{}, 0, PossessionState{}));
  c.turn_restricted = false;
  c.toll = 4;
  UserProfile u;
  u.budget = 3;
  EXPECT_FALSE(evaluate_scm(link_into(ModeSet{Mode::Walk}, c), u, 0, PossessionState{}));
}

TEST(EvaluateScm, StreetEdgesCheckModePermission) {
  Edge e;
  e.kind = EdgeKind::Street;
  e.modes = ModeSet{Mode::Walk, Mode::Car};
  EXPECT_TRUE(evaluate_scm(e, UserProfile{}, 0, PossessionState{}));
  EXPECT_TRUE(evaluate_scm(e, UserProfile{}, 0, PossessionState{ModeSet{Mode::Car}, {}}));
  EXPECT_FALSE(evaluate_scm(e, UserProfile{}, 0, PossessionState{ModeSet{Mode::Bike}, {}}));
  e.kind = EdgeKind::TransitLeg;
  e.modes = ModeSet{Mode::Transit};
  EXPECT_FALSE(evaluate_scm(e, UserProfile{}, 0, PossessionState{ModeSet{Mode::Car}, {}}));
  EXPECT_TRUE(evaluate_scm(e, UserProfile{}, 0, PossessionState{ModeSet{Mode::Bike}, {}}));
}

TEST(EvaluateScm, IsPure) {
  Rng rng(16);
  for (int i = 0; i < 500; ++i) {
    const Edge e = link_into(ModeSet::from_bits(static_cast<std::uint8_t>(rng.integer(1, 15))),
                             testing::random_conditions(rng, ModeSet{Mode::Car, Mode::Bike}));
    UserProfile u;
    u.budget = rng.integer(0, 5);
    const PossessionState p{ModeSet::from_bits(static_cast<std::uint8_t>(rng.integer(0, 15))), {}};
    const double tau = rng.uniform(0, 86400);
    EXPECT_EQ(evaluate_scm(e, u, tau, p), evaluate_scm(e, u, tau, p));
  }
}

Edge road(std::int64_t id, std::int64_t from, std::int64_t to) {
  Edge e;
  e.id = EdgeId{id};
  e.from = NodeId{from};
  e.to = NodeId{to};
  e.modes = ModeSet{Mode::Car, Mode::Walk};
  e.length = 100;
  e.set_free_flow(Mode::Car, 10);
  e.capacity = 5;
  return e;
}

std::vector<Node> square() {
  return {make_node(1, 0, 0, ModeSet{Mode::Car, Mode::Walk}), make_node(2, 100, 0, ModeSet{Mode::Car, Mode::Walk}),
          make_node(3, 100, 100, ModeSet{Mode::Car, Mode::Walk}),
          make_node(4, 0, 100, ModeSet{Mode::Car, Mode::Walk})};
}

TEST(ValidateGraph, WellFormedFixtureIsClean) {
  const MultiModalGraph g(square(), {road(1, 1, 2), road(2, 2, 3), road(3, 3, 4), road(4, 4, 1)}, {});
  EXPECT_TRUE(validate_graph(g).ok());
}

TEST(ValidateGraph, DanglingEndpoint) {
  const MultiModalGraph g(square(), {road(1, 1, 2), road(2, 2, 9)}, {});
  const auto report = validate_graph(g);
  ASSERT_EQ(report.findings.size(), 1u);
  EXPECT_NE(report.findings[0].find("9"), std::string::npos);
}

TEST(ValidateGraph, ZeroCapacityCarEdge) {
  Edge e = road(1, 1, 2);
  e.capacity = 0;
  const auto report = validate_graph(MultiModalGraph(square(), {e}, {}));
  ASSERT_EQ(report.findings.size(), 1u);
  EXPECT_NE(report.findings[0].find("capacity"), std::string::npos);
}

TEST(ValidateGraph, UnreachableTransitStop) {
  TransitLine line;
  line.id = LineId{1};
  line.stops = {NodeId{1}, NodeId{2}};
  line.departures = {0};
  line.leg_times = {60};
  line.vehicle_capacity = 10;
  UniModalGraph transit = make_transit_layer({make_node(1, 0, 0, ModeSet{Mode::Transit}),
                                              make_node(2, 100, 0, ModeSet{Mode::Transit})},
                                             {line}, 100);
  const MultiModalGraph g = merge_graphs(std::vector<UniModalGraph>{transit}, 50, SwitchDefaults{});
  EXPECT_EQ(validate_graph(g).findings.size(), 2u);
}

TEST(TransitLine, NextDepartureWrapsToTheNextDay) {
  TransitLine line;
  line.stops = {NodeId{1}, NodeId{2}, NodeId{3}};
  line.departures = {100, 200};
  line.leg_times = {30, 40};
  EXPECT_EQ(line.next_departure(0, 0), (std::pair<std::int64_t, double>{0, 100}));
  EXPECT_EQ(line.next_departure(1, 131), (std::pair<std::int64_t, double>{1, 230}));
  EXPECT_EQ(line.next_departure(1, 231), (std::pair<std::int64_t, double>{2, 86400 + 130}));
  EXPECT_DOUBLE_EQ(line.departure_time(1, 3), 86400 + 230);
}

TEST(TransitLayer, OneLegPerConsecutiveStopPair) {
  TransitLine line;
  line.id = LineId{7};
  line.stops = {NodeId{1}, NodeId{2}, NodeId{3}};
  line.departures = {0};
  line.leg_times = {30, 40};
  line.vehicle_capacity = 20;
  const UniModalGraph layer = make_transit_layer(
      {make_node(1, 0, 0, ModeSet{Mode::Transit}), make_node(2, 300, 0, ModeSet{Mode::Transit}),
       make_node(3, 300, 400, ModeSet{Mode::Transit})},
      {line}, 500);
  ASSERT_EQ(layer.edges.size(), 2u);
  EXPECT_EQ(layer.edges[0].id, EdgeId{500});
  EXPECT_EQ(layer.edges[1].id, EdgeId{501});
  EXPECT_DOUBLE_EQ(layer.edges[1].length, 400);
  EXPECT_DOUBLE_EQ(layer.edges[1].free_flow(Mode::Transit), 40);
  EXPECT_EQ(layer.edges[1].transit, (TransitRef{0, 1}));
}

}  // namespace
}  // namespace mmr
