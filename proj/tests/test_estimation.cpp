#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmplan/closure.hpp"
#include "qmplan/dataset.hpp"
#include "qmplan/grid_world.hpp"
#include "qmplan/hitting_time.hpp"
#include "qmplan/policy.hpp"
#include "qmplan/successor_distance.hpp"
#include "test_util.hpp"

using qmplan::Action;
using qmplan::DistanceTable;
using qmplan::GridWorld;
using qmplan::kInf;
using qmplan::State;
using qmplan::Trajectory;

namespace {

Trajectory traj(std::vector<State> states) {
  Trajectory t;
  t.states = std::move(states);
  t.actions.assign(t.states.size() - 1, Action::NoOp);  // unused by the estimator
  return t;
}

}  // namespace

TEST(HittingTime, SinglePassGapsByHand) {
  DistanceTable d = qmplan::empirical_hitting_time({traj({0, 1, 2})}, 3);
  EXPECT_DOUBLE_EQ(d.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(d.at(0, 2), 2.0);
  EXPECT_DOUBLE_EQ(d.at(1, 2), 1.0);
  EXPECT_EQ(d.at(1, 0), kInf);
  EXPECT_EQ(d.at(2, 0), kInf);
  EXPECT_EQ(d.at(2, 1), kInf);
  for (State s = 0; s < 3; ++s) EXPECT_DOUBLE_EQ(d.at(s, s), 0.0);
}

TEST(HittingTime, EveryOccurrenceContributesItsFirstHit) {
  // 0,1,0,1: both visits of 0 sit one step before a 1, and the first
  // visit of 1 sits one step before a 0.
  DistanceTable d = qmplan::empirical_hitting_time({traj({0, 1, 0, 1})}, 2);
  EXPECT_DOUBLE_EQ(d.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(d.at(1, 0), 1.0);

  // gaps 2 (via a detour) and 1 average to 1.5
  DistanceTable e =
      qmplan::empirical_hitting_time({traj({0, 2, 1}), traj({0, 1})}, 3);
  EXPECT_DOUBLE_EQ(e.at(0, 1), 1.5);
}

TEST(HittingTime, MatchesTheQuadraticRescanOracle) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  auto trajs =
      qmplan::collect_trajectories(w, qmplan::RandomPolicy{}, 50, 20, 9);
  DistanceTable fast = qmplan::empirical_hitting_time(trajs, w.num_states());
  DistanceTable slow = oracle::first_hit_scan(trajs, w.num_states());
  for (State s = 0; s < fast.n; ++s)
    for (State g = 0; g < fast.n; ++g) {
      if (slow.at(s, g) == kInf)
        EXPECT_EQ(fast.at(s, g), kInf) << s << "," << g;
      else
        EXPECT_NEAR(fast.at(s, g), slow.at(s, g), 1e-9) << s << "," << g;
    }
}

TEST(HittingTime, RandomWalkEstimatesViolateTheTriangleInequality) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  auto trajs =
      qmplan::collect_trajectories(w, qmplan::RandomPolicy{}, 200, 30, 7);
  DistanceTable d = qmplan::empirical_hitting_time(trajs, w.num_states());
  auto violations = qmplan::audit_quasimetric(d);
  EXPECT_FALSE(violations.empty());
  // and they are real: recheck the first one against the table
  const auto& v = violations.front();
  EXPECT_GT(d.at(v.s, v.g), d.at(v.s, v.w) + d.at(v.w, v.g));
}

TEST(HittingTime, DenseDataLeavesAlmostNoPairUnobserved) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  auto trajs =
      qmplan::collect_trajectories(w, qmplan::RandomPolicy{}, 3000, 50, 1);
  DistanceTable d = qmplan::empirical_hitting_time(trajs, w.num_states());
  int unobserved = 0, offdiag = 0;
  for (State s = 0; s < d.n; ++s)
    for (State g = 0; g < d.n; ++g) {
      if (s == g) continue;
      ++offdiag;
      unobserved += (d.at(s, g) == kInf) ? 1 : 0;
    }
  EXPECT_LT(static_cast<double>(unobserved) / offdiag, 0.01);
}

TEST(HittingTime, OvershootsTheShortestPathOnAverage) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  auto trajs =
      qmplan::collect_trajectories(w, qmplan::RandomPolicy{}, 500, 40, 5);
  DistanceTable est = qmplan::empirical_hitting_time(trajs, w.num_states());
  DistanceTable dstar = qmplan::shortest_path_distances(w);
  double est_sum = 0.0, true_sum = 0.0;
  for (State s = 0; s < est.n; ++s)
    for (State g = 0; g < est.n; ++g) {
      if (s == g || est.at(s, g) == kInf) continue;
      est_sum += est.at(s, g);
      true_sum += dstar.at(s, g);
    }
  EXPECT_GT(est_sum, true_sum);
}

TEST(SuccessorDistance, ClosedFormMatchesPolicyEnumeration) {
  GridWorld w = GridWorld::from_text(testutil::kChain5);
  for (double gamma : {0.5, 0.9, 0.99}) {
    auto sd = qmplan::successor_distance_exact(w, gamma);
    auto ref = oracle::successor_distance_enumeration(w, gamma);
    for (State s = 0; s < w.num_states(); ++s)
      for (State g = 0; g < w.num_states(); ++g)
        EXPECT_NEAR(sd.state.at(s, g), ref[s][g], 1e-9)
            << "gamma " << gamma << " pair " << s << "," << g;
  }
}

TEST(SuccessorDistance, ScalesShortestPathsByTheDiscountUnit) {
  GridWorld w = GridWorld::from_text(testutil::kDetour);
  DistanceTable steps = qmplan::shortest_path_distances(w);
  double gamma = 0.9;
  auto sd = qmplan::successor_distance_exact(w, gamma);
  for (State s = 0; s < w.num_states(); ++s)
    for (State g = 0; g < w.num_states(); ++g) {
      if (steps.at(s, g) == kInf)
        EXPECT_EQ(sd.state.at(s, g), kInf);
      else
        EXPECT_DOUBLE_EQ(sd.state.at(s, g),
                         steps.at(s, g) * std::log(1.0 / gamma));
    }
}

TEST(SuccessorDistance, IsAnExactQuasimetric) {
  GridWorld w = GridWorld::from_text(testutil::kDetour);
  auto sd = qmplan::successor_distance_exact(w, 0.9);
  EXPECT_TRUE(qmplan::audit_quasimetric(sd.state).empty());
}

TEST(SuccessorDistance, ShrinksAsTheDiscountApproachesOne) {
  GridWorld w = GridWorld::from_text(testutil::kChain5);
  auto lo = qmplan::successor_distance_exact(w, 0.5);
  auto hi = qmplan::successor_distance_exact(w, 0.99);
  for (State s = 0; s < w.num_states(); ++s)
    for (State g = 0; g < w.num_states(); ++g)
      if (s != g) EXPECT_LT(hi.state.at(s, g), lo.state.at(s, g));
}

TEST(SuccessorDistance, RejectsDegenerateDiscounts) {
  GridWorld w = GridWorld::from_text(testutil::kChain5);
  EXPECT_THROW(qmplan::successor_distance_exact(w, 0.0), qmplan::ConfigError);
  EXPECT_THROW(qmplan::successor_distance_exact(w, 1.0), qmplan::ConfigError);
}

TEST(ActionLift, CommittedActionCostsByHand) {
  GridWorld w = GridWorld::from_text(testutil::kOpen3x3);
  DistanceTable dstar = qmplan::shortest_path_distances(w);
  auto lift = qmplan::action_distance_from_state(w, dstar);
  State g = w.state_at(1, 1).value();
  State next_door = w.state_at(1, 2).value();

  EXPECT_DOUBLE_EQ(lift.at(g, Action::NoOp, g), 0.0);
  EXPECT_DOUBLE_EQ(lift.at(g, Action::East, g), 2.0);  // step out, walk back
  EXPECT_DOUBLE_EQ(lift.at(next_door, Action::West, g), 1.0);
  EXPECT_DOUBLE_EQ(lift.at(next_door, Action::NoOp, g), 2.0);
}

TEST(ActionLift, ArgminRecoversShortestPathActions) {
  GridWorld w = GridWorld::from_text(testutil::kDetour);
  DistanceTable dstar = qmplan::shortest_path_distances(w);
  auto lift = qmplan::action_distance_from_state(w, dstar);
  for (State s = 0; s < w.num_states(); ++s)
    for (State g = 0; g < w.num_states(); ++g) {
      if (dstar.at(s, g) == kInf) continue;
      auto set = qmplan::greedy_action_set(lift, s, g);
      if (s == g) {
        ASSERT_EQ(set.size(), 1u);
        EXPECT_EQ(set[0], Action::NoOp);
        continue;
      }
      for (Action a : set)
        EXPECT_DOUBLE_EQ(dstar.at(w.step(s, a), g), dstar.at(s, g) - 1.0);
      // and min over actions reproduces the state distance
      double best = kInf;
      for (Action a : qmplan::kAllActions)
        best = std::min(best, lift.at(s, a, g));
      EXPECT_DOUBLE_EQ(best, dstar.at(s, g));
    }
}
