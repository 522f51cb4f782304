#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qmplan/dataset.hpp"
#include "qmplan/distance_table.hpp"
#include "qmplan/error.hpp"
#include "qmplan/grid_world.hpp"
#include "qmplan/occupancy.hpp"
#include "qmplan/rng.hpp"

// Temporal-difference consistency probe for goal-conditioned critics.
//
// Given batch rows (x0_i, x1_i) of dataset transitions and a goal column
// xT_j, logits L[i,j] score x0_i against goal xT_j and L'[i,j] score x1_i
// against the same goals. The probe compares the critic's own softmax rows
// against the bootstrapped target
//
//   td[i,j] = (1 - gamma) * 1[x1_i = xT_j] + gamma * softmax_j(L'[i,:])[j]
//
// and reports the mean row KL(td || softmax(L)). For an arbitrary distance
// table the scores are just -d. The exact-critic construction that drives
// the probe to zero is below (exact_critic_logits): its L rows are
// action-conditioned future-occupancy scores, evaluated with the very
// action the dataset took at x0, while L' bootstraps with the
// policy-averaged state scores at x1. With a goal column that enumerates
// every state once, each of its softmax rows equals the target identically.

namespace qmplan {

struct BellmanBatch {
  std::vector<State> x0;
  std::vector<Action> a0;  // the dataset action that produced x1
  std::vector<State> x1;
  std::vector<State> xT;   // goal column; same length as the rows
};

// Row-major dense logits, rows x batch-goal columns.
struct Logits {
  int rows = 0, cols = 0;
  std::vector<double> v;
  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const {
    return v[static_cast<std::size_t>(i) * cols + j];
  }
};

namespace detail {

inline void softmax_row(const Logits& l, int i, std::vector<double>& out) {
  double m = -kInf;
  for (int j = 0; j < l.cols; ++j) m = std::max(m, l.at(i, j));
  double z = 0.0;
  for (int j = 0; j < l.cols; ++j) {
    out[j] = std::exp(l.at(i, j) - m);
    z += out[j];
  }
  for (int j = 0; j < l.cols; ++j) out[j] /= z;
}

}  // namespace detail

inline double bellman_error(const Logits& l, const Logits& l_next,
                            const std::vector<State>& x1,
                            const std::vector<State>& xT, double gamma) {
  if (l.rows != l_next.rows || l.cols != l_next.cols ||
      l.rows != static_cast<int>(x1.size()) ||
      l.cols != static_cast<int>(xT.size()))
    throw ComputeError("bellman: logits/batch shape mismatch");
  std::vector<double> p(l.cols), q(l.cols);
  double total = 0.0;
  for (int i = 0; i < l.rows; ++i) {
    detail::softmax_row(l_next, i, p);
    detail::softmax_row(l, i, q);
    double kl = 0.0;
    for (int j = 0; j < l.cols; ++j) {
      double td = gamma * p[j] + (x1[i] == xT[j] ? 1.0 - gamma : 0.0);
      if (td > 0.0) kl += td * (std::log(td) - std::log(q[j]));
    }
    total += kl;
  }
  // Each per-sample term is a KL divergence, so the mean is nonnegative up
  // to cancellation residue; clamp the residue out.
  return std::max(0.0, total / l.rows);
}

// Convenience path for plain distance tables: score(s, g) = -d(s, g) on
// both sides.
inline double bellman_error_from_table(const DistanceTable& d,
                                       const BellmanBatch& batch,
                                       double gamma) {
  const int rows = static_cast<int>(batch.x0.size());
  const int cols = static_cast<int>(batch.xT.size());
  Logits l{rows, cols, {}}, ln{rows, cols, {}};
  l.v.resize(static_cast<std::size_t>(rows) * cols);
  ln.v.resize(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      l.at(i, j) = -d.at(batch.x0[i], batch.xT[j]);
      ln.at(i, j) = -d.at(batch.x1[i], batch.xT[j]);
    }
  return bellman_error(l, ln, batch.x1, batch.xT, gamma);
}

// One row per maze state: row j's goal is state j (the full-state goal
// column the exact critic needs), and its transition (x0, a0, x1) is drawn
// uniformly from the dataset. Requires at least one transition.
inline BellmanBatch build_bellman_batch(const GridWorld& world,
                                        const std::vector<Trajectory>& data,
                                        std::uint64_t seed) {
  std::vector<std::pair<const Trajectory*, int>> transitions;
  for (const Trajectory& t : data)
    for (std::size_t k = 0; k < t.actions.size(); ++k)
      transitions.push_back({&t, static_cast<int>(k)});
  if (transitions.empty())
    throw ConfigError("bellman: dataset has no transitions");

  Rng rng(derive_seed(seed, 0xBE11));
  BellmanBatch b;
  const int n = world.num_states();
  for (State j = 0; j < n; ++j) {
    auto [traj, k] = transitions[rng.uniform_index(transitions.size())];
    b.x0.push_back(traj->states[k]);
    b.a0.push_back(traj->actions[k]);
    b.x1.push_back(traj->states[k + 1]);
    b.xT.push_back(j);
  }
  return b;
}

// Logit pair that satisfies the probe identically (up to rounding):
//   L [i,j] = log( (1-gamma) * O[x1_i][xT_j] )   -- future mass after
//                                                   committing to a0_i
//   L'[i,j] = log( (1-gamma) * mean_a O[step(x1_i,a)][xT_j] )
// where O is the exact uniform-policy discounted occupancy. The first is
// the action-conditioned critic at (x0, a0); in a deterministic world its
// bootstrap identity against the state-averaged L' holds per sample, and
// the full-state goal column makes every softmax row sum the occupancy to
// exactly one.
struct CriticLogits {
  Logits l, l_next;
};

inline CriticLogits exact_critic_logits(const GridWorld& world,
                                        const DiscountedOccupancy& occ,
                                        const BellmanBatch& batch) {
  const int rows = static_cast<int>(batch.x0.size());
  const int cols = static_cast<int>(batch.xT.size());
  const double gamma = occ.gamma;
  CriticLogits out;
  out.l = Logits{rows, cols, {}};
  out.l_next = Logits{rows, cols, {}};
  out.l.v.resize(static_cast<std::size_t>(rows) * cols);
  out.l_next.v.resize(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    State x1 = batch.x1[i];
    for (int j = 0; j < cols; ++j) {
      State g = batch.xT[j];
      out.l.at(i, j) = std::log((1.0 - gamma) * occ.state_at(x1, g));
      double mean = 0.0;
      for (Action a : kAllActions)
        mean += occ.state_at(world.step(x1, a), g);
      mean /= kNumActions;
      out.l_next.at(i, j) = std::log((1.0 - gamma) * mean);
    }
  }
  return out;
}

// The state-goal scores of the exact critic itself, V(s,g) =
// log((1-gamma) * O[s][g]). A noise-corrupted checkpoint is this matrix
// plus sigma * E for a fixed standard-normal E.
inline Logits state_critic_scores(const DiscountedOccupancy& occ) {
  Logits v{occ.n, occ.n, {}};
  v.v.resize(static_cast<std::size_t>(occ.n) * occ.n);
  for (State s = 0; s < occ.n; ++s)
    for (State g = 0; g < occ.n; ++g)
      v.at(s, g) = std::log((1.0 - occ.gamma) * occ.state_at(s, g));
  return v;
}

// Probe logits for any state-goal critic: the current side reads the
// critic at x1 directly, the bootstrap side is the log of the mean
// exponentiated critic over the actions available at x1. Feeding the
// exact scores reproduces exact_critic_logits up to exp/log rounding.
inline CriticLogits critic_logits_from_scores(const GridWorld& world,
                                              const Logits& scores,
                                              const BellmanBatch& batch) {
  const int rows = static_cast<int>(batch.x0.size());
  const int cols = static_cast<int>(batch.xT.size());
  CriticLogits out;
  out.l = Logits{rows, cols, {}};
  out.l_next = Logits{rows, cols, {}};
  out.l.v.resize(static_cast<std::size_t>(rows) * cols);
  out.l_next.v.resize(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    State x1 = batch.x1[i];
    for (int j = 0; j < cols; ++j) {
      State g = batch.xT[j];
      out.l.at(i, j) = scores.at(x1, g);
      double m = -kInf;
      for (Action a : kAllActions)
        m = std::max(m, scores.at(world.step(x1, a), g));
      double acc = 0.0;
      for (Action a : kAllActions)
        acc += std::exp(scores.at(world.step(x1, a), g) - m);
      out.l_next.at(i, j) = m + std::log(acc / kNumActions);
    }
  }
  return out;
}

struct BellmanCheckpoint {
  std::string checkpoint;
  double sigma = 0.0;
  double error = 0.0;
  double easy_success = 0.0;
  double distant_success = 0.0;
};

using BellmanTrace = std::vector<BellmanCheckpoint>;

}  // namespace qmplan
