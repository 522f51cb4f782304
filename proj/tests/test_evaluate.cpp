#include "qmplan/evaluate.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "qmplan/distance_table.hpp"
#include "qmplan/grid_world.hpp"
#include "qmplan/planner.hpp"
#include "qmplan/policy.hpp"
#include "qmplan/rollout.hpp"
#include "test_util.hpp"

using qmplan::Action;
using qmplan::ComputeError;
using qmplan::ConfigError;
using qmplan::DistanceTable;
using qmplan::GridWorld;
using qmplan::kInf;
using qmplan::Rng;
using qmplan::State;
using qmplan::SuccessCurve;

namespace {

struct NoOpPolicy : qmplan::Policy {
  qmplan::ActionProbs probs(State, State) const override {
    qmplan::ActionProbs p{};
    p[static_cast<int>(Action::NoOp)] = 1.0;
    return p;
  }
  Action act(State, State, Rng&, Rng&) const override { return Action::NoOp; }
};

SuccessCurve curve_of(const std::vector<double>& uppers,
                      const std::vector<double>& rates) {
  SuccessCurve c;
  c.bin_upper = uppers;
  c.success_rate = rates;
  c.pair_count.assign(uppers.size(), 100);
  return c;
}

GridWorld rooms_world() {
  std::ifstream in(testutil::asset_path("rooms.txt"));
  std::stringstream buf;
  buf << in.rdbuf();
  return GridWorld::from_text(buf.str());
}

}  // namespace

TEST(Stratified, CurveIsAFoldOverTheReturnedPairs) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  DistanceTable dstar = qmplan::shortest_path_distances(w);
  qmplan::RandomPolicy pi;
  std::vector<double> bins = {1, 2, 4, 8};
  auto run = qmplan::stratified_success(w, pi, dstar, bins, 400,
                                        qmplan::default_max_steps(w), 5);
  ASSERT_EQ(run.pairs.size(), 400u);

  std::vector<int> total(bins.size(), 0), won(bins.size(), 0);
  for (const auto& p : run.pairs) {
    ASSERT_NE(p.s, p.g);
    ASSERT_GE(p.dstar, 1.0);
    ASSERT_LE(p.dstar, bins.back());
    EXPECT_DOUBLE_EQ(p.dstar, dstar.at(p.s, p.g));
    std::size_t k = 0;
    while (p.dstar > bins[k]) ++k;
    total[k] += 1;
    won[k] += p.success ? 1 : 0;
  }
  std::size_t ci = 0;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    if (total[k] == 0) continue;
    ASSERT_LT(ci, run.curve.bin_upper.size());
    EXPECT_DOUBLE_EQ(run.curve.bin_upper[ci], bins[k]);
    EXPECT_EQ(run.curve.pair_count[ci], total[k]);
    EXPECT_DOUBLE_EQ(run.curve.success_rate[ci],
                     static_cast<double>(won[k]) / total[k]);
    ++ci;
  }
  EXPECT_EQ(ci, run.curve.bin_upper.size());
}

TEST(Stratified, BinsAreLabeledByUpperEdgeAndEmptyOnesVanish) {
  GridWorld w = GridWorld::from_text(testutil::kCorridor11);  // diameter 10
  DistanceTable dstar = qmplan::shortest_path_distances(w);
  NoOpPolicy pi;
  std::vector<double> bins = {1, 2, 4, 8, 16, 32};
  auto run = qmplan::stratified_success(w, pi, dstar, bins, 600, 20, 3);
  for (const auto& p : run.pairs) {
    std::size_t k = 0;
    while (p.dstar > bins[k]) ++k;
    // spot-check the upper-edge rule itself
    if (p.dstar == 3.0) EXPECT_DOUBLE_EQ(bins[k], 4.0);
    if (p.dstar == 2.0) EXPECT_DOUBLE_EQ(bins[k], 2.0);
    if (p.dstar == 10.0) EXPECT_DOUBLE_EQ(bins[k], 16.0);
  }
  // nothing in the corridor is farther than 10, so the 32-bin is absent
  EXPECT_EQ(run.curve.rate_at(32.0), -1.0);
  EXPECT_GE(run.curve.rate_at(16.0), 0.0);
  // a policy that never moves never succeeds (pairs have s != g)
  for (double r : run.curve.success_rate) EXPECT_DOUBLE_EQ(r, 0.0);
}

TEST(Stratified, PerfectPolicySaturatesEveryBin) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  DistanceTable dstar = qmplan::shortest_path_distances(w);
  auto lift = qmplan::action_distance_from_state(w, dstar);
  qmplan::GreedyPolicy pi(lift, 7);
  auto run = qmplan::stratified_success(w, pi, dstar, {1, 2, 4, 8}, 300,
                                        qmplan::default_max_steps(w), 11);
  for (double r : run.curve.success_rate) EXPECT_DOUBLE_EQ(r, 1.0);
  for (const auto& p : run.pairs) EXPECT_EQ(p.steps, static_cast<int>(p.dstar));
}

TEST(Stratified, RejectsBadBinsAndEmptyPools) {
  GridWorld w = GridWorld::from_text(testutil::kOpen3x3);
  DistanceTable dstar = qmplan::shortest_path_distances(w);
  qmplan::RandomPolicy pi;
  EXPECT_THROW(qmplan::stratified_success(w, pi, dstar, {}, 10, 10, 1),
               ConfigError);
  EXPECT_THROW(qmplan::stratified_success(w, pi, dstar, {2, 2}, 10, 10, 1),
               ConfigError);
  EXPECT_THROW(qmplan::stratified_success(w, pi, dstar, {0.5}, 10, 10, 1),
               ComputeError);  // no pair at distance <= 0.5
}

TEST(Stratified, RandomWalkSuccessDecaysWithDistance) {
  GridWorld w = rooms_world();
  DistanceTable dstar = qmplan::shortest_path_distances(w);
  qmplan::RandomPolicy pi;
  auto run = qmplan::stratified_success(w, pi, dstar, {1, 2, 4, 8, 16, 32, 64},
                                        5000, qmplan::default_max_steps(w), 2);
  ASSERT_GE(run.curve.bin_upper.size(), 6u);
  int inversions = 0;
  double worst = 0.0;
  for (std::size_t i = 1; i < run.curve.success_rate.size(); ++i) {
    double rise = run.curve.success_rate[i] - run.curve.success_rate[i - 1];
    if (rise > 0.0) {
      ++inversions;
      worst = std::max(worst, rise);
    }
  }
  EXPECT_LE(inversions, 1);
  EXPECT_LE(worst, 0.05);
  EXPECT_GT(run.curve.success_rate.front(), 0.9);
  EXPECT_LT(run.curve.success_rate.back(), 0.5);
}

TEST(Reach, ClosedFormValuesAreExact) {
  EXPECT_DOUBLE_EQ(qmplan::reach_worst_case(0.0), 1.0);
  EXPECT_DOUBLE_EQ(qmplan::reach_worst_case(0.1), 1.125);
  EXPECT_DOUBLE_EQ(qmplan::reach_worst_case(0.25), 1.5);
  EXPECT_EQ(qmplan::reach_worst_case(0.5), kInf);
  EXPECT_EQ(qmplan::reach_worst_case(0.75), kInf);
  EXPECT_THROW(qmplan::reach_worst_case(-0.01), ConfigError);
}

TEST(Eta, ReadsDoublingsOffTheCurve) {
  auto rep = qmplan::eta_and_reach(curve_of({1, 2, 4}, {1.0, 0.4, 0.1}), 1.0);
  ASSERT_EQ(rep.eta_per_doubling.size(), 2u);
  EXPECT_DOUBLE_EQ(rep.eta_per_doubling[0].first, 1.0);
  EXPECT_DOUBLE_EQ(rep.eta_per_doubling[0].second, 0.4);
  EXPECT_DOUBLE_EQ(rep.eta_per_doubling[1].first, 2.0);
  EXPECT_DOUBLE_EQ(rep.eta_per_doubling[1].second, 0.25);
  EXPECT_DOUBLE_EQ(rep.eta_aggregate, std::sqrt(0.1));
  EXPECT_DOUBLE_EQ(rep.reach, qmplan::reach_worst_case(std::sqrt(0.1)));
}

TEST(Eta, StopsAtMissingBinsAndZeroDenominators) {
  // bin 4 missing: only the first doubling is readable
  auto rep = qmplan::eta_and_reach(curve_of({1, 2, 8}, {1.0, 0.5, 0.2}), 1.0);
  ASSERT_EQ(rep.eta_per_doubling.size(), 1u);
  EXPECT_DOUBLE_EQ(rep.eta_aggregate, 0.5);

  // a zero mid-curve ends the chain after contributing its own doubling
  auto z = qmplan::eta_and_reach(curve_of({1, 2, 4}, {1.0, 0.0, 0.0}), 1.0);
  ASSERT_EQ(z.eta_per_doubling.size(), 1u);
  EXPECT_DOUBLE_EQ(z.eta_aggregate, 0.0);
  EXPECT_DOUBLE_EQ(z.reach, 1.0);
}

TEST(Eta, PerfectCurvesGiveEtaOneAndInfiniteReach) {
  auto rep =
      qmplan::eta_and_reach(curve_of({1, 2, 4, 8}, {1.0, 1.0, 1.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(rep.eta_aggregate, 1.0);
  EXPECT_EQ(rep.reach, kInf);
}

TEST(Eta, RaisesWhenTheBaseBinIsMissingOrDead) {
  EXPECT_THROW(qmplan::eta_and_reach(curve_of({2, 4}, {1.0, 0.5}), 1.0),
               ConfigError);
  EXPECT_THROW(qmplan::eta_and_reach(curve_of({1, 2}, {0.0, 0.0}), 1.0),
               ComputeError);
  EXPECT_THROW(qmplan::eta_and_reach(curve_of({1, 3}, {1.0, 0.5}), 1.0),
               ComputeError);  // no bin at 2: not a single full doubling
}

TEST(Invariance, PlanningARandomWalkChangesNothing) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  DistanceTable dstar = qmplan::shortest_path_distances(w);
  qmplan::RandomPolicy base;
  qmplan::OptimalWaypointPlanner planner(dstar);
  qmplan::PlanComposedPolicy composed(base, planner);
  auto res = qmplan::planning_invariance_ratio(
      w, base, composed, dstar, 4.0, 300, qmplan::default_max_steps(w), 8);
  EXPECT_EQ(res.n_pairs, 300);
  EXPECT_DOUBLE_EQ(res.base_rate, res.planned_rate);
  EXPECT_DOUBLE_EQ(res.ratio, 1.0);
  EXPECT_GT(res.base_rate, 0.0);
}

TEST(Invariance, GreedyOnTrueDistancesIsInvariantAtRateOne) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  DistanceTable dstar = qmplan::shortest_path_distances(w);
  auto lift = qmplan::action_distance_from_state(w, dstar);
  qmplan::GreedyPolicy base(lift, 3);
  qmplan::OptimalWaypointPlanner planner(dstar);
  qmplan::PlanComposedPolicy composed(base, planner);
  auto res = qmplan::planning_invariance_ratio(
      w, base, composed, dstar, 5.0, 200, qmplan::default_max_steps(w), 8);
  EXPECT_DOUBLE_EQ(res.base_rate, 1.0);
  EXPECT_DOUBLE_EQ(res.planned_rate, 1.0);
  EXPECT_DOUBLE_EQ(res.ratio, 1.0);
}

TEST(Invariance, ZeroOverZeroIsNaNAndGainOverZeroIsInfinite) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  DistanceTable dstar = qmplan::shortest_path_distances(w);
  NoOpPolicy frozen;
  qmplan::IdentityPlanner identity;
  qmplan::PlanComposedPolicy still_frozen(frozen, identity);
  auto nan_res = qmplan::planning_invariance_ratio(w, frozen, still_frozen,
                                                   dstar, 3.0, 50, 40, 1);
  EXPECT_DOUBLE_EQ(nan_res.base_rate, 0.0);
  EXPECT_TRUE(std::isnan(nan_res.ratio));

  auto lift = qmplan::action_distance_from_state(w, dstar);
  qmplan::GreedyPolicy good(lift, 5);
  qmplan::OptimalWaypointPlanner planner(dstar);
  qmplan::PlanComposedPolicy composed(good, planner);
  auto inf_res = qmplan::planning_invariance_ratio(w, frozen, composed, dstar,
                                                   3.0, 50, 200, 1);
  EXPECT_DOUBLE_EQ(inf_res.base_rate, 0.0);
  EXPECT_DOUBLE_EQ(inf_res.planned_rate, 1.0);
  EXPECT_EQ(inf_res.ratio, kInf);
}

TEST(Invariance, EmptyDistantPoolRaises) {
  GridWorld w = GridWorld::from_text(testutil::kOpen3x3);
  DistanceTable dstar = qmplan::shortest_path_distances(w);
  qmplan::RandomPolicy base;
  qmplan::IdentityPlanner identity;
  qmplan::PlanComposedPolicy composed(base, identity);
  EXPECT_THROW(qmplan::planning_invariance_ratio(w, base, composed, dstar,
                                                 100.0, 10, 10, 1),
               ComputeError);
}
