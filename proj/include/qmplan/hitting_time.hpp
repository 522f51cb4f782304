#pragma once

#include <vector>

#include "qmplan/dataset.hpp"
#include "qmplan/distance_table.hpp"

namespace qmplan {

// Monte Carlo temporal-distance estimate from trajectories: for each ordered
// pair (s, g), the mean over every occurrence of s (at index i, in any
// trajectory where g appears at some j > i) of the first-hit gap
// min{j > i : state_j = g} - i. Pairs never observed in that order stay
// +inf; the diagonal is pinned to 0.
//
// The estimator is deliberately naive. It averages path lengths of a random
// behavior policy, so it systematically overshoots the shortest path and,
// on a fixed seed, even violates the triangle inequality (the projection
// module exists to repair exactly that).
inline DistanceTable empirical_hitting_time(
    const std::vector<Trajectory>& trajectories, int num_states) {
  std::vector<double> sum(static_cast<std::size_t>(num_states) * num_states,
                          0.0);
  std::vector<std::int64_t> cnt(
      static_cast<std::size_t>(num_states) * num_states, 0);
  // next_at[g] = smallest index > i where g occurs, maintained while i
  // walks backward; occupied[] lists which entries of next_at are live.
  std::vector<int> next_at(num_states, -1);
  std::vector<State> occupied;
  for (const Trajectory& traj : trajectories) {
    const auto& st = traj.states;
    std::fill(next_at.begin(), next_at.end(), -1);
    occupied.clear();
    for (std::size_t ri = st.size(); ri-- > 0;) {
      State s = st[ri];
      for (State g : occupied) {
        if (next_at[g] < 0 || g == s) continue;
        std::size_t idx = static_cast<std::size_t>(s) * num_states + g;
        sum[idx] += static_cast<double>(next_at[g]) - static_cast<double>(ri);
        cnt[idx] += 1;
      }
      if (next_at[s] < 0) occupied.push_back(s);
      next_at[s] = static_cast<int>(ri);
    }
  }
  DistanceTable d(num_states);
  for (State s = 0; s < num_states; ++s)
    for (State g = 0; g < num_states; ++g)
      if (s != g && cnt[static_cast<std::size_t>(s) * num_states + g] > 0)
        d.at(s, g) = sum[static_cast<std::size_t>(s) * num_states + g] /
                     cnt[static_cast<std::size_t>(s) * num_states + g];
  return d;
}

}  // namespace qmplan
