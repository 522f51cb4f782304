#pragma once

#include <cstdint>

#include "qmplan/grid_world.hpp"
#include "qmplan/policy.hpp"
#include "qmplan/rng.hpp"

namespace qmplan {

struct RolloutResult {
  bool success = false;
  int steps = 0;        // steps taken before reaching g (when success)
  State final_state = -1;
};

inline int default_max_steps(const GridWorld& world) {
  return 4 * world.num_states();
}

// Runs the policy until the goal is reached or max_steps actions have been
// taken. Success is checked before acting, so s0 == g succeeds in 0 steps.
// Two independent streams are derived from the seed: one for action
// sampling, one for waypoint draws inside composed policies. Keeping them
// apart makes a planner-wrapped stochastic policy consume action
// randomness exactly like its unwrapped form.
inline RolloutResult rollout(const GridWorld& world, const Policy& policy,
                             State s0, State g, int max_steps,
                             std::uint64_t seed) {
  Rng act_rng(derive_seed(seed, 0xAC7));
  Rng plan_rng(derive_seed(seed, 0x91A));
  State s = s0;
  for (int t = 0;; ++t) {
    if (s == g) return {true, t, s};
    if (t == max_steps) return {false, max_steps, s};
    s = world.step(s, policy.act(s, g, act_rng, plan_rng));
  }
}

}  // namespace qmplan
