#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "qmplan/grid_world.hpp"
#include "qmplan/rng.hpp"

// Trajectory datasets: rollouts of a behavior policy from uniformly random
// start cells. Collection is reproducible from (maze, seed) alone; each
// trajectory draws from its own stream derived as f(master_seed, index), so
// inserting or reordering trajectories never perturbs the others.

namespace qmplan {

struct Trajectory {
  std::vector<State> states;   // length len+1
  std::vector<Action> actions; // length len

  bool consistent_with(const GridWorld& world) const {
    if (states.size() != actions.size() + 1) return false;
    for (std::size_t t = 0; t < actions.size(); ++t)
      if (world.step(states[t], actions[t]) != states[t + 1]) return false;
    return true;
  }
};

struct DatasetMeta {
  std::uint64_t seed = 0;
  int num_trajectories = 0;
  int trajectory_length = 0;
  double coverage_fraction = 0.0;  // see coverage_fraction() below
};

// Behavior policies for collection only need an action law; the random
// walk used throughout ignores its goal argument. Defined here to avoid a
// dependency on the full policy module.
template <typename PolicyT>
std::vector<Trajectory> collect_trajectories(const GridWorld& world,
                                             const PolicyT& policy,
                                             int num_trajectories,
                                             int trajectory_length,
                                             std::uint64_t seed) {
  std::vector<Trajectory> out;
  out.reserve(num_trajectories);
  for (int i = 0; i < num_trajectories; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    Trajectory traj;
    State s = static_cast<State>(rng.uniform_index(world.num_states()));
    traj.states.push_back(s);
    for (int t = 0; t < trajectory_length; ++t) {
      Action a = policy.act(s, s, rng, rng);  // goal-free behavior: g := s
      s = world.step(s, a);
      traj.actions.push_back(a);
      traj.states.push_back(s);
    }
    out.push_back(std::move(traj));
  }
  return out;
}

// Fraction of ordered pairs (s, g), s != g, such that g occurs strictly
// after some occurrence of s in at least one trajectory. This is exactly
// the set of pairs the hitting-time estimator can say anything about.
inline double coverage_fraction(const std::vector<Trajectory>& trajectories,
                                int num_states) {
  std::vector<char> covered(
      static_cast<std::size_t>(num_states) * num_states, 0);
  std::vector<char> seen_after(num_states, 0);
  for (const Trajectory& traj : trajectories) {
    const auto& st = traj.states;
    // Walk backward keeping the set of states that occur after position i.
    std::fill(seen_after.begin(), seen_after.end(), 0);
    for (std::size_t ri = st.size(); ri-- > 0;) {
      State s = st[ri];
      if (ri + 1 < st.size()) {
        for (State g = 0; g < num_states; ++g)
          if (seen_after[g] && g != s)
            covered[static_cast<std::size_t>(s) * num_states + g] = 1;
      }
      seen_after[s] = 1;
    }
  }
  std::size_t hits = 0;
  for (char c : covered) hits += c;
  return static_cast<double>(hits) /
         (static_cast<double>(num_states) * (num_states - 1));
}

}  // namespace qmplan
