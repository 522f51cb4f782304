#pragma once

#include <algorithm>
#include <queue>
#include <string>
#include <vector>

#include "qmplan/error.hpp"
#include "qmplan/grid_world.hpp"

// Dense distance tables. +infinity is the first-class "unreachable"
// sentinel throughout: min/plus on doubles is exact for it, and tables
// whose finite entries are integers (shortest paths, restrictions and
// closures of them) stay exact because IEEE doubles represent small
// integers exactly.

namespace qmplan {

struct DistanceTable {
  int n = 0;
  std::vector<double> v;  // n*n row-major, v[s*n + g]

  DistanceTable() = default;
  explicit DistanceTable(int n_states)
      : n(n_states),
        v(static_cast<std::size_t>(n_states) * n_states, kInf) {
    for (int s = 0; s < n; ++s) at(s, s) = 0.0;
  }

  double& at(State s, State g) {
    return v[static_cast<std::size_t>(s) * n + g];
  }
  double at(State s, State g) const {
    return v[static_cast<std::size_t>(s) * n + g];
  }

  // Nonnegative entries, exactly-zero diagonal. Off-diagonal +inf is fine.
  void validate() const {
    for (int s = 0; s < n; ++s) {
      for (int g = 0; g < n; ++g) {
        double d = at(s, g);
        if (d < 0.0 || d != d)
          throw ComputeError("distance table: negative or NaN entry at (" +
                             std::to_string(s) + "," + std::to_string(g) +
                             ")");
      }
      if (at(s, s) != 0.0)
        throw ComputeError("distance table: nonzero diagonal at state " +
                           std::to_string(s));
    }
  }
};

// d[s][a][g]: cost-to-go of committing to action a in state s.
struct ActionDistanceTable {
  int n = 0;
  std::vector<double> v;  // n*kNumActions*n

  ActionDistanceTable() = default;
  explicit ActionDistanceTable(int n_states)
      : n(n_states),
        v(static_cast<std::size_t>(n_states) * kNumActions * n_states, kInf) {}

  double& at(State s, Action a, State g) {
    return v[(static_cast<std::size_t>(s) * kNumActions +
              static_cast<int>(a)) * n + g];
  }
  double at(State s, Action a, State g) const {
    return v[(static_cast<std::size_t>(s) * kNumActions +
              static_cast<int>(a)) * n + g];
  }
};

// All-pairs shortest path step counts by breadth-first search from every
// state over the four move actions (NoOp never shortens a path). Unreachable
// pairs stay +inf; the diagonal is zero.
inline DistanceTable shortest_path_distances(const GridWorld& world) {
  const int n = world.num_states();
  DistanceTable d(n);
  std::vector<int> dist(n);
  for (State src = 0; src < n; ++src) {
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<State> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      State s = q.front();
      q.pop();
      for (Action a : {Action::North, Action::South, Action::East,
                       Action::West}) {
        State t = world.step(s, a);
        if (dist[t] < 0) {
          dist[t] = dist[s] + 1;
          q.push(t);
        }
      }
    }
    for (State g = 0; g < n; ++g)
      if (dist[g] >= 0) d.at(src, g) = dist[g];
  }
  return d;
}

// Lifts a state distance to action costs: stepping costs one unit plus the
// remaining distance from where the action lands. The one exception keeps
// the lift consistent with "already there": standing still at the goal is
// free, so argmin_a of the lift at (g, g) is exactly {NoOp} and
// min_a d(s,a,g) reproduces d(s,g) everywhere.
inline ActionDistanceTable action_distance_from_state(const GridWorld& world,
                                                      const DistanceTable& d) {
  if (world.num_states() != d.n)
    throw ComputeError("action lift: table size does not match world");
  ActionDistanceTable out(d.n);
  for (State s = 0; s < d.n; ++s) {
    for (Action a : kAllActions) {
      State t = world.step(s, a);
      for (State g = 0; g < d.n; ++g) {
        out.at(s, a, g) = (s == g && a == Action::NoOp)
                              ? 0.0
                              : 1.0 + d.at(t, g);
      }
    }
  }
  return out;
}

}  // namespace qmplan
