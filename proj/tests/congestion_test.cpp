#include "mmr/congestion.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "mmr/error.hpp"
#include "mmr/interval_tree.hpp"
#include "oracles.hpp"

namespace mmr {
namespace {

using testing::NaiveIntervalList;
using testing::Rng;

Edge road(double t_f, double capacity, double alpha = 0.15, double beta = 4) {
  Edge e;
  e.id = EdgeId{1};
  e.modes = ModeSet{Mode::Car};
  e.length = 1000;
  e.set_free_flow(Mode::Car, t_f);
  e.capacity = capacity;
  e.bpr_alpha = alpha;
  e.bpr_beta = beta;
  return e;
}

TEST(Bpr, HandEvaluatedExamples) {
  const Edge e = road(100, 8);
  EXPECT_DOUBLE_EQ(bpr_travel_time(e, 0), 100);
  EXPECT_NEAR(bpr_travel_time(e, 8), 174.900625, 1e-9);
  EXPECT_NEAR(bpr_travel_time(e, 16), 285.61, 1e-9);
}

TEST(Bpr, MatchesDirectFormula) {
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const double t_f = rng.uniform(1, 600), a = rng.uniform(0, 1), b = rng.uniform(1, 6);
    const double c = rng.uniform(0.5, 50), v = rng.uniform(0, 100);
    const double expected = t_f * std::pow(1.0 + a * v / c, b);
    EXPECT_NEAR(bpr_travel_time(road(t_f, c, a, b), v), expected, 1e-9 * expected);
  }
}

TEST(Bpr, StrictlyIncreasingInVolume) {
  const Edge e = road(60, 3);
  double prev = bpr_travel_time(e, 0);
  for (int v = 1; v < 50; ++v) {
    const double t = bpr_travel_time(e, v);
    EXPECT_GT(t, prev);
    prev = t;
  }
}

TEST(Bpr, NonRoadEdgeThrows) {
  Edge walk;
  walk.modes = ModeSet{Mode::Walk};
  walk.length = 100;
  EXPECT_THROW(bpr_travel_time(walk, 1), NonRoadEdge);
  Edge uncapacitated = road(10, kUnbounded);
  EXPECT_THROW(bpr_travel_time(uncapacitated, 1), NonRoadEdge);
}

TEST(Background, LookupConventions) {
  BackgroundProfile p(86400);
  p.set(EdgeId{1}, {{0, 86400, 10}});
  p.set(EdgeId{2}, {{0, 3600, 5}, {3600, 7200, 20}});
  Edge e1;
  e1.id = EdgeId{1};
  EXPECT_EQ(background_volume(p, e1, 12345), 10);
  EXPECT_EQ(p.volume(EdgeId{3}, 100), 0);
  EXPECT_EQ(p.volume(EdgeId{2}, 3599.999), 5);
  EXPECT_EQ(p.volume(EdgeId{2}, 3600), 20);
  EXPECT_EQ(p.volume(EdgeId{2}, 7200), 0);
  EXPECT_EQ(p.volume(EdgeId{2}, 86400 + 3600), 20);
  EXPECT_EQ(p.volume(EdgeId{2}, -1), 0);
}

TEST(Background, RejectsOverlapsAndNegativeVolumes) {
  BackgroundProfile p;
  EXPECT_THROW(p.set(EdgeId{1}, {{0, 100, 1}, {50, 150, 1}}), std::invalid_argument);
  EXPECT_THROW(p.set(EdgeId{1}, {{0, 100, -1}}), std::invalid_argument);
}

TEST(IntervalTree, MatchesNaiveListUnderRandomOperations) {
  Rng rng(22);
  IntervalTree tree;
  NaiveIntervalList naive;
  std::map<std::uint64_t, double> live;  // handle -> start
  for (int op = 0; op < 5000; ++op) {
    const int kind = rng.integer(0, 9);
    if (kind < 4 || live.empty()) {
      const double s = rng.integer(0, 200), len = rng.integer(1, 40);
      const int value = rng.integer(1, 3);
      const auto h = tree.insert({s, s + len, value});
      naive.add(s, s + len, value, h);
      live[h] = s;
    } else if (kind < 6) {
      auto it = live.begin();
      std::advance(it, rng.integer(0, static_cast<int>(live.size()) - 1));
      EXPECT_TRUE(tree.erase(it->first, it->second));
      EXPECT_TRUE(naive.remove(it->first));
      live.erase(it);
    } else {
      const double lo = rng.integer(-10, 250);
      const double hi = rng.chance(0.3) ? lo : lo + rng.integer(1, 50);
      ASSERT_EQ(tree.overlap_sum(lo, hi), naive.overlap_sum(lo, hi)) << "op " << op;
    }
    ASSERT_EQ(tree.size(), naive.size());
  }
  std::vector<TraversalInterval> expected;
  for (const auto& i : naive.items()) expected.push_back({i.start, i.end, i.value});
  EXPECT_EQ(tree.items(), expected);
  EXPECT_FALSE(tree.erase(999999, 0));
}

TEST(IntervalTree, CopiesAreIndependent) {
  IntervalTree a;
  const auto h = a.insert({0, 10, 1});
  IntervalTree b = a;
  EXPECT_TRUE(b.erase(h, 0));
  EXPECT_EQ(a.overlap_sum(5, 5), 1);
  EXPECT_EQ(b.overlap_sum(5, 5), 0);
}

// Two car edges, a walk edge and a two-stop bus line with two seats.
struct LedgerFixture {
  MultiModalGraph graph;
  LedgerFixture() {
    std::vector<Node> nodes;
    for (int i = 1; i <= 3; ++i) {
      Node n;
      n.id = NodeId{i};
      n.position = {100.0 * i, 0};
      n.modes = ModeSet{Mode::Car, Mode::Walk, Mode::Transit};
      nodes.push_back(n);
    }
    std::vector<Edge> edges;
    for (int i = 1; i <= 2; ++i) {
      Edge e = road(100, 4);
      e.id = EdgeId{i};
      e.from = NodeId{i};
      e.to = NodeId{i + 1};
      edges.push_back(e);
    }
    Edge walk;
    walk.id = EdgeId{3};
    walk.from = NodeId{1};
    walk.to = NodeId{2};
    walk.modes = ModeSet{Mode::Walk};
    walk.length = 100;
    edges.push_back(walk);
    Edge bus;
    bus.id = EdgeId{4};
    bus.from = NodeId{2};
    bus.to = NodeId{3};
    bus.modes = ModeSet{Mode::Transit};
    bus.kind = EdgeKind::TransitLeg;
    bus.set_free_flow(Mode::Transit, 60);
    bus.capacity = 2;
    bus.transit = TransitRef{0, 0};
    edges.push_back(bus);
    TransitLine line;
    line.id = LineId{1};
    line.stops = {NodeId{2}, NodeId{3}};
    line.departures = {0, 600};
    line.leg_times = {60};
    line.vehicle_capacity = 2;
    graph = MultiModalGraph(std::move(nodes), std::move(edges), {line});
  }
};

PlanLeg car_leg(std::size_t edge, double enter, double exit) {
  return PlanLeg{edge, EdgeId{static_cast<std::int64_t>(edge + 1)}, Mode::Car, enter, exit, std::nullopt};
}

PlanLeg bus_leg(std::int64_t run, double enter, double exit) {
  return PlanLeg{3, EdgeId{4}, Mode::Transit, enter, exit, run};
}

RoutePlan plan_of(std::vector<PlanLeg> legs) {
  RoutePlan p;
  p.legs = std::move(legs);
  return p;
}

TEST(Ledger, CarPlanInsertsOneIntervalPerCarLeg) {
  LedgerFixture f;
  CongestionLedger ledger(f.graph);
  ledger.add_user_plan(plan_of({car_leg(0, 0, 100), car_leg(1, 100, 250)}), AgentId{1});
  EXPECT_EQ(ledger.tree(0).items(), (std::vector<TraversalInterval>{{0, 100, 1}}));
  EXPECT_EQ(ledger.tree(1).items(), (std::vector<TraversalInterval>{{100, 250, 1}}));
  EXPECT_EQ(ledger.committed_count(1, 249, 249), 1);
  EXPECT_EQ(ledger.committed_count(1, 250, 250), 0);
}

TEST(Ledger, WalkPlanLeavesLedgerUnchanged) {
  LedgerFixture f;
  CongestionLedger ledger(f.graph);
  const auto before = ledger.snapshot();
  ledger.add_user_plan(plan_of({PlanLeg{2, EdgeId{3}, Mode::Walk, 0, 70, std::nullopt}}), AgentId{1});
  EXPECT_EQ(ledger.snapshot(), before);
  EXPECT_TRUE(ledger.empty());
}

TEST(Ledger, FullBusIsTransactional) {
  LedgerFixture f;
  CongestionLedger ledger(f.graph);
  ledger.add_user_plan(plan_of({bus_leg(0, 0, 60)}), AgentId{1});
  ledger.add_user_plan(plan_of({bus_leg(0, 0, 60)}), AgentId{2});
  EXPECT_EQ(ledger.occupancy(3, 0), 2);
  const auto before = ledger.snapshot();
  EXPECT_THROW(ledger.add_user_plan(plan_of({car_leg(0, 0, 100), bus_leg(0, 100, 160)}), AgentId{3}),
               TransitOverCapacity);
  EXPECT_EQ(ledger.snapshot(), before);
  EXPECT_FALSE(ledger.has_plan(AgentId{3}));
  ledger.add_user_plan(plan_of({bus_leg(1, 600, 660)}), AgentId{3});
  EXPECT_EQ(ledger.occupancy(3, 1), 1);
}

TEST(Ledger, RemoveRevertsAndUnknownThrows) {
  LedgerFixture f;
  CongestionLedger ledger(f.graph);
  ledger.add_user_plan(plan_of({car_leg(0, 0, 100)}), AgentId{1});
  const auto before = ledger.snapshot();
  ledger.add_user_plan(plan_of({car_leg(0, 50, 150), bus_leg(0, 150, 210)}), AgentId{2});
  ledger.remove_user_plan(AgentId{2});
  EXPECT_EQ(ledger.snapshot(), before);
  EXPECT_THROW(ledger.remove_user_plan(AgentId{2}), UnknownAgent);
  EXPECT_THROW(ledger.remove_user_plan(AgentId{42}), UnknownAgent);
}

TEST(Ledger, NonIncreasingPlanTimesAreRejected) {
  LedgerFixture f;
  CongestionLedger ledger(f.graph);
  EXPECT_THROW(ledger.add_user_plan(plan_of({car_leg(0, 100, 100)}), AgentId{1}), std::invalid_argument);
  EXPECT_THROW(ledger.add_user_plan(plan_of({car_leg(0, 0, 100), car_leg(1, 90, 200)}), AgentId{1}),
               std::invalid_argument);
}

TEST(Ledger, InterleavedPlansMatchReplay) {
  LedgerFixture f;
  Rng rng(23);
  CongestionLedger ledger(f.graph);
  std::map<std::int64_t, RoutePlan> committed;
  for (int step = 0; step < 400; ++step) {
    if (committed.empty() || rng.chance(0.6)) {
      const double t = rng.integer(0, 500);
      std::vector<PlanLeg> legs{car_leg(0, t, t + rng.integer(1, 100))};
      if (rng.chance(0.5)) legs.push_back(car_leg(1, legs[0].exit, legs[0].exit + rng.integer(1, 100)));
      if (rng.chance(0.3)) legs.push_back(bus_leg(rng.integer(0, 3), legs.back().exit, legs.back().exit + 60));
      const std::int64_t id = step + 1;
      try {
        ledger.add_user_plan(plan_of(legs), AgentId{id});
        committed[id] = plan_of(legs);
      } catch (const TransitOverCapacity&) {
      }
    } else {
      auto it = committed.begin();
      std::advance(it, rng.integer(0, static_cast<int>(committed.size()) - 1));
      ledger.remove_user_plan(AgentId{it->first});
      committed.erase(it);
    }
  }
  CongestionLedger replay(f.graph);
  for (const auto& [id, plan] : committed) replay.add_user_plan(plan, AgentId{id});
  const auto a = ledger.snapshot(), b = replay.snapshot();
  ASSERT_EQ(a.intervals.size(), b.intervals.size());
  for (std::size_t e = 0; e < a.intervals.size(); ++e) {
    auto x = a.intervals[e], y = b.intervals[e];
    auto key = [](const TraversalInterval& l, const TraversalInterval& r) {
      return std::tie(l.start, l.end) < std::tie(r.start, r.end);
    };
    std::sort(x.begin(), x.end(), key);
    std::sort(y.begin(), y.end(), key);
    EXPECT_EQ(x, y);
  }
  EXPECT_EQ(a.occupancy, b.occupancy);
  EXPECT_EQ(ledger.plan_count(), committed.size());
}

TEST(PredictedCongestion, Examples) {
  LedgerFixture f;
  CongestionLedger ledger(f.graph);
  EXPECT_EQ(predicted_congestion_level(ledger, 0, 15, 2.0), 0.0);
  for (int i = 0; i < 3; ++i) ledger.add_user_plan(plan_of({car_leg(0, 10, 20)}), AgentId{i + 1});
  EXPECT_DOUBLE_EQ(predicted_congestion_level(ledger, 0, 15, 2.0), 0.75);
  for (int i = 3; i < 6; ++i) ledger.add_user_plan(plan_of({car_leg(0, 12, 30)}), AgentId{i + 1});
  EXPECT_DOUBLE_EQ(predicted_congestion_level(ledger, 0, 15, 2.0), 1.0);
}

TEST(PredictedCongestion, DefaultWindowIsFreeFlowTime) {
  LedgerFixture f;
  CongestionLedger ledger(f.graph);
  ledger.add_user_plan(plan_of({car_leg(0, 199, 300)}), AgentId{1});
  EXPECT_DOUBLE_EQ(predicted_congestion_level(ledger, 0, 100), 0.25);  // [100, 200) reaches 199
  EXPECT_DOUBLE_EQ(predicted_congestion_level(ledger, 0, 99), 0.0);
}

TEST(PredictedCongestion, MonotoneInCommittedPlans) {
  LedgerFixture f;
  Rng rng(24);
  CongestionLedger ledger(f.graph);
  double prev = 0;
  for (int i = 0; i < 30; ++i) {
    const double t = rng.integer(0, 100);
    ledger.add_user_plan(plan_of({car_leg(0, t, t + rng.integer(1, 80))}), AgentId{i + 1});
    const double level = predicted_congestion_level(ledger, 0, 50, 20);
    EXPECT_GE(level, prev);
    EXPECT_LE(level, 1.0);
    prev = level;
  }
}

}  // namespace
}  // namespace mmr
