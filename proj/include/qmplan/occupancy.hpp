#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qmplan/distance_table.hpp"
#include "qmplan/error.hpp"
#include "qmplan/grid_world.hpp"

namespace qmplan {

// Exact policy evaluation of the gamma-discounted state-visit mass under
// the uniform-random behavior policy:
//
//   O[s][g] = sum_t gamma^t Pr(s_t = g | s_0 = s)
//           = 1[s=g] + gamma * mean_a O[step(s,a)][g],
//
// solved as the dense linear system (I - gamma * P) O = I. Every entry lies
// in [0, 1/(1-gamma)]; rows sum to exactly 1/(1-gamma).
//
// The action-conditioned variant commits the first step:
//   P(g|s,a) = 1[s=g] + gamma * O[step(s,a)][g].
struct DiscountedOccupancy {
  int n = 0;
  double gamma = 0.0;
  std::vector<double> state;   // n*n, O[s][g]
  std::vector<double> action;  // n*kNumActions*n, P(g|s,a)

  double state_at(State s, State g) const {
    return state[static_cast<std::size_t>(s) * n + g];
  }
  double action_at(State s, Action a, State g) const {
    return action[(static_cast<std::size_t>(s) * kNumActions +
                   static_cast<int>(a)) * n + g];
  }
};

inline DiscountedOccupancy discounted_occupancy_uniform(const GridWorld& world,
                                                        double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw ConfigError("occupancy: gamma must be in (0,1)");
  const int n = world.num_states();

  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  for (State s = 0; s < n; ++s)
    for (Action a : kAllActions)
      A(s, world.step(s, a)) -= gamma / kNumActions;

  // A is strictly diagonally dominant (row sums of the subtracted part are
  // gamma < 1), so the plain LU factorization is safe.
  Eigen::MatrixXd O =
      A.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));

  DiscountedOccupancy occ;
  occ.n = n;
  occ.gamma = gamma;
  occ.state.resize(static_cast<std::size_t>(n) * n);
  for (State s = 0; s < n; ++s)
    for (State g = 0; g < n; ++g)
      occ.state[static_cast<std::size_t>(s) * n + g] = O(s, g);
  occ.action.resize(static_cast<std::size_t>(n) * kNumActions * n);
  for (State s = 0; s < n; ++s)
    for (Action a : kAllActions) {
      State t = world.step(s, a);
      for (State g = 0; g < n; ++g)
        occ.action[(static_cast<std::size_t>(s) * kNumActions +
                    static_cast<int>(a)) * n + g] =
            (s == g ? 1.0 : 0.0) + gamma * O(t, g);
    }
  return occ;
}

}  // namespace qmplan
