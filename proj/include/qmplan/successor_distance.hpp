#pragma once

#include <cmath>

#include "qmplan/distance_table.hpp"
#include "qmplan/error.hpp"
#include "qmplan/grid_world.hpp"

namespace qmplan {

// Optimal discounted goal-reaching distance, in closed form.
//
// The underlying quantity is min over policies of
//     log( occupancy(g | start g) / occupancy(g | start s) )
// with occupancy(g | s) the gamma-discounted visit mass of g. In a
// deterministic world where NoOp self-loops everywhere, the best policy
// walks a shortest path and then parks on the goal, giving exactly
// k * log(1/gamma) for a pair that is k steps apart; the brute-force
// policy-enumeration check in the test suite pins this down on small
// worlds. Unreachable pairs stay +inf.
struct SuccessorDistances {
  DistanceTable state;        // d(s, g)
  ActionDistanceTable action; // d(s, a, g): commit to a, then act optimally
};

inline SuccessorDistances successor_distance_exact(const GridWorld& world,
                                                   double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw ConfigError("successor distance: gamma must be in (0,1)");
  const double unit = std::log(1.0 / gamma);
  const DistanceTable steps = shortest_path_distances(world);
  const int n = steps.n;

  SuccessorDistances out;
  out.state = DistanceTable(n);
  out.action = ActionDistanceTable(n);
  for (State s = 0; s < n; ++s) {
    for (State g = 0; g < n; ++g) {
      double k = steps.at(s, g);
      out.state.at(s, g) = (k == kInf) ? kInf : k * unit;
    }
    for (Action a : kAllActions) {
      State t = world.step(s, a);
      for (State g = 0; g < n; ++g) {
        if (s == g && a == Action::NoOp) {
          out.action.at(s, a, g) = 0.0;  // parked on the goal already
          continue;
        }
        double k = steps.at(t, g);
        out.action.at(s, a, g) = (k == kInf) ? kInf : (1.0 + k) * unit;
      }
    }
  }
  return out;
}

}  // namespace qmplan
