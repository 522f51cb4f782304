#include "qmplan/dataset.hpp"

#include <gtest/gtest.h>

#include "qmplan/grid_world.hpp"
#include "qmplan/policy.hpp"
#include "qmplan/rng.hpp"
#include "test_util.hpp"

using qmplan::Action;
using qmplan::GridWorld;
using qmplan::Rng;
using qmplan::State;
using qmplan::Trajectory;

namespace {

struct NoOpStub {
  Action act(State, State, Rng&, Rng&) const { return Action::NoOp; }
};

}  // namespace

TEST(Dataset, NoOpBehaviorNeverMoves) {
  GridWorld w = GridWorld::from_text(testutil::kOpen3x3);
  auto trajs = qmplan::collect_trajectories(w, NoOpStub{}, 2, 3, 11);
  ASSERT_EQ(trajs.size(), 2u);
  for (const Trajectory& t : trajs) {
    ASSERT_EQ(t.states.size(), 4u);
    ASSERT_EQ(t.actions.size(), 3u);
    for (State s : t.states) EXPECT_EQ(s, t.states[0]);
    for (Action a : t.actions) EXPECT_EQ(a, Action::NoOp);
    EXPECT_TRUE(t.consistent_with(w));
  }
}

TEST(Dataset, RandomWalksReplayThroughTheDynamics) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  auto trajs =
      qmplan::collect_trajectories(w, qmplan::RandomPolicy{}, 20, 30, 3);
  ASSERT_EQ(trajs.size(), 20u);
  for (const Trajectory& t : trajs) EXPECT_TRUE(t.consistent_with(w));

  Trajectory broken = trajs[0];
  broken.states[1] = broken.states[1] == 0 ? 1 : 0;
  bool still = broken.consistent_with(w);
  // flipping one state must break the replay unless the flip landed on
  // the true successor, which the construction above rules out
  EXPECT_FALSE(still && broken.states[1] != trajs[0].states[1]);
}

TEST(Dataset, CollectionIsReproducibleFromTheSeed) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  auto a = qmplan::collect_trajectories(w, qmplan::RandomPolicy{}, 10, 25, 42);
  auto b = qmplan::collect_trajectories(w, qmplan::RandomPolicy{}, 10, 25, 42);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].states, b[i].states);
    EXPECT_EQ(a[i].actions, b[i].actions);
  }
  auto c = qmplan::collect_trajectories(w, qmplan::RandomPolicy{}, 10, 25, 43);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    any_diff |= (a[i].states != c[i].states);
  EXPECT_TRUE(any_diff);
}

TEST(Dataset, PerTrajectoryStreamsAreIndependentOfTheCount) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  auto small =
      qmplan::collect_trajectories(w, qmplan::RandomPolicy{}, 5, 25, 42);
  auto large =
      qmplan::collect_trajectories(w, qmplan::RandomPolicy{}, 12, 25, 42);
  for (std::size_t i = 0; i < small.size(); ++i) {
    EXPECT_EQ(small[i].states, large[i].states);
    EXPECT_EQ(small[i].actions, large[i].actions);
  }
}

TEST(Dataset, CoverageCountsOrderedPairsSeenInOrder) {
  // single pass 0 -> 1 -> 2 on a 4-state space: covered pairs are
  // exactly (0,1), (0,2), (1,2)
  Trajectory t;
  t.states = {0, 1, 2};
  t.actions = {Action::East, Action::East};
  EXPECT_DOUBLE_EQ(qmplan::coverage_fraction({t}, 4), 3.0 / 12.0);

  // revisits count both directions: 0 -> 1 -> 0 covers (0,1) and (1,0)
  Trajectory back;
  back.states = {0, 1, 0};
  back.actions = {Action::East, Action::West};
  EXPECT_DOUBLE_EQ(qmplan::coverage_fraction({back}, 3), 2.0 / 6.0);

  // the pair (s, g) needs g strictly after s; co-occurrence alone is not
  // enough, so a single state covers nothing
  Trajectory stay;
  stay.states = {2, 2};
  stay.actions = {Action::NoOp};
  EXPECT_DOUBLE_EQ(qmplan::coverage_fraction({stay}, 3), 0.0);
}

TEST(Dataset, LongRandomCollectionCoversAlmostEveryPair) {
  GridWorld w = GridWorld::from_text(testutil::kRoom6);
  auto trajs =
      qmplan::collect_trajectories(w, qmplan::RandomPolicy{}, 3000, 50, 1);
  double cov = qmplan::coverage_fraction(trajs, w.num_states());
  EXPECT_GT(cov, 0.99);
}
