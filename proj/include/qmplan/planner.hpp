#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "qmplan/distance_table.hpp"
#include "qmplan/error.hpp"
#include "qmplan/policy.hpp"
#include "qmplan/rng.hpp"

namespace qmplan {

// Waypoint selection over a state-distance table. Planners are stateless;
// composed policies call them anew at every timestep.
class Planner {
 public:
  virtual ~Planner() = default;
  // Raises ComputeError when no waypoint has a finite through-cost.
  virtual State waypoint(State s, State g, Rng& rng) const = 0;
};

// Uniform draw from the exact argmin set of d(s,w) + d(w,g). The current
// state is excluded when s != g: it is always a zero-progress member of the
// literal argmin set (d(s,s) + d(s,g) = d(s,g)), and conditioning a policy
// on "reach where you already are" can only stall a rollout. The goal
// itself stays eligible, so the candidate set is nonempty whenever any
// finite route exists -- including pairs whose direct entry d(s,g) is +inf
// but which connect through an intermediate state.
class OptimalWaypointPlanner : public Planner {
 public:
  explicit OptimalWaypointPlanner(const DistanceTable& d) : d_(&d) {}

  State waypoint(State s, State g, Rng& rng) const override {
    if (s == g) return g;
    const int n = d_->n;
    double best = kInf;
    for (State w = 0; w < n; ++w) {
      if (w == s) continue;
      double sw = d_->at(s, w);
      if (sw == kInf) continue;
      best = std::min(best, sw + d_->at(w, g));
    }
    if (best == kInf)
      throw ComputeError("planner: goal unreachable through any waypoint");
    std::vector<State> argmin;
    for (State w = 0; w < n; ++w) {
      if (w == s) continue;
      double sw = d_->at(s, w);
      if (sw != kInf && sw + d_->at(w, g) == best) argmin.push_back(w);
    }
    return argmin[rng.uniform_index(argmin.size())];
  }

  // Exposed for tests that quantify over the whole candidate set.
  std::vector<State> argmin_set(State s, State g) const {
    if (s == g) return {g};
    const int n = d_->n;
    double best = kInf;
    for (State w = 0; w < n; ++w) {
      if (w == s) continue;
      double sw = d_->at(s, w);
      if (sw == kInf) continue;
      best = std::min(best, sw + d_->at(w, g));
    }
    std::vector<State> out;
    if (best == kInf) return out;
    for (State w = 0; w < n; ++w) {
      if (w == s) continue;
      double sw = d_->at(s, w);
      if (sw != kInf && sw + d_->at(w, g) == best) out.push_back(w);
    }
    return out;
  }

 private:
  const DistanceTable* d_;
};

// Uniform draw from states roughly halfway out: both d(s,w) and d(w,g)
// within `slack` of d(s,g)/2. Falls back to the optimal-waypoint rule when
// the midpoint band is empty (short pairs, sparse tables).
class MidpointPlanner : public Planner {
 public:
  MidpointPlanner(const DistanceTable& d, double slack = 1.0)
      : d_(&d), fallback_(d), slack_(slack) {
    if (!(slack >= 0.0)) throw ConfigError("midpoint: slack must be >= 0");
  }

  State waypoint(State s, State g, Rng& rng) const override {
    if (s == g) return g;
    std::vector<State> band = candidates(s, g);
    if (band.empty()) return fallback_.waypoint(s, g, rng);
    return band[rng.uniform_index(band.size())];
  }

  std::vector<State> candidates(State s, State g) const {
    std::vector<State> out;
    double total = d_->at(s, g);
    if (total == kInf) return out;
    double half = total / 2.0;
    for (State w = 0; w < d_->n; ++w) {
      double sw = d_->at(s, w);
      double wg = d_->at(w, g);
      if (sw == kInf || wg == kInf) continue;
      if (std::abs(sw - half) <= slack_ && std::abs(wg - half) <= slack_)
        out.push_back(w);
    }
    return out;
  }

 private:
  const DistanceTable* d_;
  OptimalWaypointPlanner fallback_;
  double slack_;
};

// Degenerate planner: the waypoint is the goal. Composing with it must
// reproduce the base policy exactly; useful as a harness control.
class IdentityPlanner : public Planner {
 public:
  State waypoint(State, State g, Rng&) const override { return g; }
};

// Base policy steered through a planner: at every step the action is what
// the base policy would do if the waypoint were the goal. Waypoint draws
// come from plan_rng -- a stream separate from action sampling -- so a
// stochastic base policy consumes its action stream identically with and
// without planning. If the planner cannot reach the goal at all, the step
// falls back to conditioning on the goal directly.
class PlanComposedPolicy : public Policy {
 public:
  PlanComposedPolicy(const Policy& base, const Planner& planner)
      : base_(&base), planner_(&planner) {}

  ActionProbs probs(State s, State g) const override {
    // The marginal law would average over waypoint draws; report the base
    // law at the goal, which is what the composition preserves on argmin
    // agreement. Rollouts only ever use act().
    return base_->probs(s, g);
  }

  Action act(State s, State g, Rng& act_rng, Rng& plan_rng) const override {
    State w;
    try {
      w = planner_->waypoint(s, g, plan_rng);
    } catch (const ComputeError&) {
      w = g;
    }
    return base_->act(s, w, act_rng, plan_rng);
  }

 private:
  const Policy* base_;
  const Planner* planner_;
};

}  // namespace qmplan
