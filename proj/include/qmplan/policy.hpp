#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "qmplan/distance_table.hpp"
#include "qmplan/error.hpp"
#include "qmplan/grid_world.hpp"
#include "qmplan/rng.hpp"

namespace qmplan {

using ActionProbs = std::array<double, kNumActions>;

// Exact argmin over the five action costs, in action order. Ties are kept;
// +inf entries never qualify. A goal with every action at +inf is
// unrankable and raises.
inline std::vector<Action> greedy_action_set(const ActionDistanceTable& d,
                                             State s, State g) {
  double best = kInf;
  for (Action a : kAllActions) best = std::min(best, d.at(s, a, g));
  if (best == kInf)
    throw ComputeError("greedy: every action distance is +inf for (" +
                       std::to_string(s) + "," + std::to_string(g) + ")");
  std::vector<Action> out;
  for (Action a : kAllActions)
    if (d.at(s, a, g) == best) out.push_back(a);
  return out;
}

// pi(a|s,g) proportional to exp(-coeff * d(s,a,g)). +inf costs get exactly
// zero mass. The finite costs are shifted by their minimum before
// exponentiation, which keeps the law invariant under adding a constant to
// every cost and avoids underflow for large distances.
inline ActionProbs boltzmann_policy_probs(const ActionDistanceTable& d,
                                          State s, State g, double coeff) {
  double best = kInf;
  for (Action a : kAllActions) best = std::min(best, d.at(s, a, g));
  if (best == kInf)
    throw ComputeError("boltzmann: every action distance is +inf for (" +
                       std::to_string(s) + "," + std::to_string(g) + ")");
  ActionProbs p{};
  double z = 0.0;
  for (Action a : kAllActions) {
    double cost = d.at(s, a, g);
    double w = (cost == kInf) ? 0.0 : std::exp(-coeff * (cost - best));
    p[static_cast<int>(a)] = w;
    z += w;
  }
  for (double& w : p) w /= z;
  return p;
}

// Goal-conditioned action law. probs() is the distribution itself; act()
// is what rollouts call and may consume the action stream (Boltzmann,
// random, +inf fallbacks) or none of it (greedy is deterministic per seed).
// plan_rng exists so composed policies can draw waypoints from a stream
// separate from action sampling; everyone else ignores it.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual ActionProbs probs(State s, State g) const = 0;
  virtual Action act(State s, State g, Rng& act_rng, Rng& plan_rng) const = 0;
};

namespace detail {

// Deterministic tie-break: element of rank hash(seed, s) mod |set|. The
// key deliberately omits the goal so that two goals inducing the same
// argmin set at s get the same action; that is what makes direct and
// waypoint-conditioned greedy behavior agree wherever their argmin sets
// coincide. Across seeds the pick is uniform over the set.
inline Action pick_tied(const std::vector<Action>& set, std::uint64_t seed,
                        State s) {
  std::uint64_t h = derive_seed(seed, static_cast<std::uint64_t>(s));
  return set[h % set.size()];
}

inline Action sample_from_probs(const ActionProbs& p, Rng& rng) {
  double u = rng.uniform_unit();
  double acc = 0.0;
  for (int i = 0; i < kNumActions; ++i) {
    acc += p[i];
    if (u < acc) return static_cast<Action>(i);
  }
  return Action::NoOp;  // u landed in rounding slack at the top
}

inline bool all_inf(const ActionDistanceTable& d, State s, State g) {
  for (Action a : kAllActions)
    if (d.at(s, a, g) != kInf) return false;
  return true;
}

}  // namespace detail

// Acts on the exact argmin of an action-distance table. When the table has
// no information at all for (s, g) -- common for raw hitting-time estimates
// off the observed set -- the policy degrades to a uniform draw instead of
// raising, so rollouts remain total.
class GreedyPolicy : public Policy {
 public:
  GreedyPolicy(const ActionDistanceTable& d, std::uint64_t seed)
      : d_(&d), seed_(seed) {}

  ActionProbs probs(State s, State g) const override {
    ActionProbs p{};
    if (detail::all_inf(*d_, s, g)) {
      p.fill(1.0 / kNumActions);
      return p;
    }
    auto set = greedy_action_set(*d_, s, g);
    for (Action a : set) p[static_cast<int>(a)] = 1.0 / set.size();
    return p;
  }

  Action act(State s, State g, Rng& act_rng, Rng&) const override {
    if (detail::all_inf(*d_, s, g))
      return static_cast<Action>(act_rng.uniform_index(kNumActions));
    return detail::pick_tied(greedy_action_set(*d_, s, g), seed_, s);
  }

 private:
  const ActionDistanceTable* d_;
  std::uint64_t seed_;
};

class BoltzmannPolicy : public Policy {
 public:
  BoltzmannPolicy(const ActionDistanceTable& d, double coeff)
      : d_(&d), coeff_(coeff) {}

  ActionProbs probs(State s, State g) const override {
    if (detail::all_inf(*d_, s, g)) {
      ActionProbs p{};
      p.fill(1.0 / kNumActions);
      return p;
    }
    return boltzmann_policy_probs(*d_, s, g, coeff_);
  }

  Action act(State s, State g, Rng& act_rng, Rng&) const override {
    return detail::sample_from_probs(probs(s, g), act_rng);
  }

 private:
  const ActionDistanceTable* d_;
  double coeff_;
};

class RandomPolicy : public Policy {
 public:
  ActionProbs probs(State, State) const override {
    ActionProbs p{};
    p.fill(1.0 / kNumActions);
    return p;
  }
  Action act(State, State, Rng& act_rng, Rng&) const override {
    return static_cast<Action>(act_rng.uniform_index(kNumActions));
  }
};

// Optimal out to horizon H, deliberately wrong one step past it: on pairs
// at true distance exactly H+1 it commits to the first action (in action
// order) outside the optimal first-action set. Since NoOp is never optimal
// away from the goal, such an action always exists. Everywhere else it is
// the greedy policy on true shortest paths. Rollouts that start farther
// than H walk inward until they are H+1 away and then bounce on that shell
// forever, which is precisely the counterexample shape: optimal on every
// horizon-H ball, not optimal globally.
class AdversarialPolicy : public Policy {
 public:
  AdversarialPolicy(const GridWorld& world, int horizon, std::uint64_t seed)
      : horizon_(horizon), seed_(seed) {
    dstar_ = shortest_path_distances(world);
    action_ = action_distance_from_state(world, dstar_);
    bool any = false;
    for (State s = 0; s < dstar_.n && !any; ++s)
      for (State g = 0; g < dstar_.n && !any; ++g)
        if (dstar_.at(s, g) == horizon_ + 1) any = true;
    if (!any)
      throw ComputeError(
          "adversarial: no pair at distance H+1 = " +
          std::to_string(horizon_ + 1) + " exists in this maze");
  }

  ActionProbs probs(State s, State g) const override {
    ActionProbs p{};
    p[static_cast<int>(choose(s, g))] = 1.0;
    return p;
  }

  Action act(State s, State g, Rng&, Rng&) const override {
    return choose(s, g);
  }

 private:
  Action choose(State s, State g) const {
    auto optimal = greedy_action_set(action_, s, g);
    if (dstar_.at(s, g) == horizon_ + 1) {
      for (Action a : kAllActions) {
        bool in_optimal = false;
        for (Action o : optimal) in_optimal |= (o == a);
        if (!in_optimal) return a;
      }
    }
    return detail::pick_tied(optimal, seed_, s);
  }

  int horizon_;
  std::uint64_t seed_;
  DistanceTable dstar_;
  ActionDistanceTable action_;
};

}  // namespace qmplan
