#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qmplan/closure.hpp"
#include "qmplan/distance_table.hpp"
#include "qmplan/error.hpp"

// Distances between distributions over states: the exact minimum-cost
// coupling under a quasimetric ground cost (an asymmetric optimal
// transport). Solved by successive shortest augmenting paths on the
// bipartite transportation graph; supports are capped at 64 points per
// side, so the dense Bellman-Ford searches are instant and the arithmetic
// stays well inside double precision. Optimality is certified afterwards,
// independently of the search: a final shortest-distance sweep over the
// residual graph yields feasible LP duals whose objective must meet the
// primal cost to within 1e-9, with complementary slackness on every
// flow-carrying arc.

namespace qmplan {

inline constexpr int kMaxTransportSupport = 64;

struct DiscreteDistribution {
  std::vector<State> support;
  std::vector<double> prob;

  // sums to 1 within 1e-12, no duplicate support points, probs > 0
  void validate(int num_states) const {
    if (support.size() != prob.size() || support.empty())
      throw ConfigError("distribution: support/prob length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (support[i] < 0 || support[i] >= num_states)
        throw ConfigError("distribution: support point outside state space");
      if (!(prob[i] > 0.0))
        throw ConfigError("distribution: probabilities must be positive");
      sum += prob[i];
      for (std::size_t j = i + 1; j < support.size(); ++j)
        if (support[i] == support[j])
          throw ConfigError("distribution: duplicate support point " +
                            std::to_string(support[i]));
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ConfigError("distribution: probabilities sum to " +
                        std::to_string(sum) + ", not 1");
  }
};

struct TransportEntry {
  int i, j;  // indices into P.support / Q.support
  double mass;
};

struct TransportPlan {
  std::vector<TransportEntry> entries;
  double cost = 0.0;
  double max_marginal_error = 0.0;  // worst row/column sum deviation
};

struct DqmdResult {
  double value = 0.0;
  TransportPlan plan;
  double duality_gap = 0.0;
};

inline DqmdResult dqmd(const QuasimetricTable& cost,
                       const DiscreteDistribution& p,
                       const DiscreteDistribution& q) {
  if (!cost.certified)
    throw ComputeError("dqmd: ground cost is not a certified quasimetric");
  p.validate(cost.d.n);
  q.validate(cost.d.n);
  const int np = static_cast<int>(p.support.size());
  const int nq = static_cast<int>(q.support.size());
  if (np > kMaxTransportSupport || nq > kMaxTransportSupport)
    throw ComputeError("dqmd: support size exceeds the exact-solve cap of " +
                       std::to_string(kMaxTransportSupport));

  std::vector<double> c(static_cast<std::size_t>(np) * nq);
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < nq; ++j) {
      double cij = cost.d.at(p.support[i], q.support[j]);
      if (cij == kInf)
        throw ComputeError("dqmd: infinite ground cost between supports");
      c[static_cast<std::size_t>(i) * nq + j] = cij;
    }

  // Mass is routed as integer multiples of 2^-52: both marginals are
  // quantized so each side totals exactly 2^52, and integers up to 2^53
  // are exact in doubles, so supply/demand/flow arithmetic never rounds.
  // That rules out the degenerate regime of floating-point min-cost flow,
  // where cancellation residue on a reverse arc bottlenecks the next
  // augmentation into an equally tiny push and the loop crawls: here every
  // push is at least one quantum and every bottleneck zeroes its supply,
  // demand, or reverse arc exactly. The quantization perturbs each mass by
  // at most 2^-53 plus one pinned residue, far inside the 1e-9 gates below.
  constexpr double kScale = 4503599627370496.0;  // 2^52
  auto quantized = [](const std::vector<double>& prob) {
    std::vector<double> m(prob.size());
    double total = 0.0;
    std::size_t largest = 0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
      m[i] = std::round(prob[i] * kScale);
      total += m[i];
      if (prob[i] > prob[largest]) largest = i;
    }
    m[largest] += kScale - total;
    return m;
  };

  // Residual graph: forward arcs row->col always exist (uncapacitated,
  // cost c_ij); a reverse arc col->row with cost -c_ij exists while
  // flow[i][j] > 0. Path costs are floats, so relaxation demands more than
  // kEps of improvement; otherwise one-ulp rounding around a zero-cost
  // cycle of arcs reads as a negative cycle. Paths at most kEps-per-arc
  // short of optimal only shift work onto the final certificate, which
  // checks the result independently.
  constexpr double kEps = 1e-12;
  const int nn = np + nq;
  std::vector<double> supply = quantized(p.prob);
  std::vector<double> demand = quantized(q.prob);
  std::vector<double> flow(static_cast<std::size_t>(np) * nq, 0.0);
  std::vector<double> dist(nn);
  std::vector<int> prev(nn);
  double remaining = kScale;
  int rounds = 0;

  while (remaining > 0.0) {
    // A genuine instance exhausts a supply, a demand, or a reverse arc
    // every round; running far past that is numerical degeneracy and must
    // fail loudly rather than crawl.
    if (++rounds > 1000 * nn)
      throw ComputeError("dqmd: augmentation budget exceeded (degenerate "
                         "instance)");

    // Cheapest path from any row with supply to any column with demand,
    // by plain Bellman-Ford (reverse arcs have negative cost, and at this
    // size dense passes are cheaper than being clever).
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev.begin(), prev.end(), -1);
    for (int i = 0; i < np; ++i)
      if (supply[i] > 0.0) dist[i] = 0.0;
    bool changed = true;
    for (int pass = 0; changed && pass <= nn; ++pass) {
      if (pass == nn)
        throw ComputeError("dqmd: negative cycle in residual graph");
      changed = false;
      for (int i = 0; i < np; ++i) {
        if (dist[i] == kInf) continue;
        const double* ci = &c[static_cast<std::size_t>(i) * nq];
        for (int j = 0; j < nq; ++j)
          if (dist[i] + ci[j] < dist[np + j] - kEps) {
            dist[np + j] = dist[i] + ci[j];
            prev[np + j] = i;
            changed = true;
          }
      }
      for (int j = 0; j < nq; ++j) {
        if (dist[np + j] == kInf) continue;
        for (int i = 0; i < np; ++i)
          if (flow[static_cast<std::size_t>(i) * nq + j] > 0.0 &&
              dist[np + j] - c[static_cast<std::size_t>(i) * nq + j] <
                  dist[i] - kEps) {
            dist[i] = dist[np + j] - c[static_cast<std::size_t>(i) * nq + j];
            prev[i] = np + j;
            changed = true;
          }
      }
    }

    int tgt = -1;
    double dt = kInf;
    for (int j = 0; j < nq; ++j)
      if (demand[j] > 0.0 && dist[np + j] < dt) dt = dist[np + (tgt = j)];
    if (tgt < 0)
      throw ComputeError("dqmd: no augmenting path (internal)");

    // Bottleneck: target demand, origin supply, and any reverse arc flow.
    double push = demand[tgt];
    int v = np + tgt;
    while (prev[v] >= 0) {
      int u = prev[v];
      if (v < np)  // entered row v by draining flow[v][u-np]
        push = std::min(push,
                        flow[static_cast<std::size_t>(v) * nq + (u - np)]);
      v = u;
    }
    push = std::min(push, supply[v]);

    v = np + tgt;
    while (prev[v] >= 0) {
      int u = prev[v];
      if (v >= np)
        flow[static_cast<std::size_t>(u) * nq + (v - np)] += push;
      else
        flow[static_cast<std::size_t>(v) * nq + (u - np)] -= push;
      v = u;
    }
    supply[v] -= push;
    demand[tgt] -= push;
    remaining -= push;
  }

  DqmdResult res;
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < nq; ++j) {
      double f = flow[static_cast<std::size_t>(i) * nq + j];
      if (f > 0.0) {
        double mass = f / kScale;
        res.plan.entries.push_back({i, j, mass});
        res.value += mass * c[static_cast<std::size_t>(i) * nq + j];
      }
    }
  res.plan.cost = res.value;

  // Marginal feasibility of the returned plan.
  {
    std::vector<double> row(np, 0.0), col(nq, 0.0);
    for (const TransportEntry& e : res.plan.entries) {
      row[e.i] += e.mass;
      col[e.j] += e.mass;
    }
    double worst = 0.0;
    for (int i = 0; i < np; ++i)
      worst = std::max(worst, std::abs(row[i] - p.prob[i]));
    for (int j = 0; j < nq; ++j)
      worst = std::max(worst, std::abs(col[j] - q.prob[j]));
    res.plan.max_marginal_error = worst;
    if (worst >= 1e-9)
      throw ComputeError("dqmd: transport plan marginals drifted");
  }

  // Dual certificate, derived from the final residual graph alone (not
  // from the search): h(v) = shortest distance from a virtual node with
  // zero-cost arcs to every node. Then u_i = -h(i), v_j = h(col_j) are
  // feasible (forward arcs are always residual, so h(col_j) - h(row_i)
  // <= c_ij for every pair) with equality on flow-carrying arcs, and the
  // dual objective must equal the primal cost. Relaxation keeps the same
  // kEps slack as the search; the slop it admits into the dual objective
  // is a few hundred kEps at worst, well under the gap gate.
  {
    std::vector<double> h(nn, 0.0);
    bool changed = true;
    for (int pass = 0; changed && pass <= nn; ++pass) {
      if (pass == nn)
        throw ComputeError("dqmd: certificate found a negative cycle");
      changed = false;
      for (int i = 0; i < np; ++i)
        for (int j = 0; j < nq; ++j) {
          double cij = c[static_cast<std::size_t>(i) * nq + j];
          if (h[i] + cij < h[np + j] - kEps) {
            h[np + j] = h[i] + cij;
            changed = true;
          }
          if (flow[static_cast<std::size_t>(i) * nq + j] > 0.0 &&
              h[np + j] - cij < h[i] - kEps) {
            h[i] = h[np + j] - cij;
            changed = true;
          }
        }
    }
    double dual = 0.0;
    for (int j = 0; j < nq; ++j) dual += h[np + j] * q.prob[j];
    for (int i = 0; i < np; ++i) dual -= h[i] * p.prob[i];
    res.duality_gap = std::abs(res.value - dual);
    if (res.duality_gap >= 1e-9)
      throw ComputeError("dqmd: optimality certificate failed, gap = " +
                         std::to_string(res.duality_gap));
  }
  return res;
}

// Both sides of the triangle inequality for three distributions:
// lhs = dqmd(P, R), rhs = dqmd(P, Q) + dqmd(Q, R).
inline std::pair<double, double> triangle_witness(
    const QuasimetricTable& cost, const DiscreteDistribution& p,
    const DiscreteDistribution& q, const DiscreteDistribution& r) {
  double lhs = dqmd(cost, p, r).value;
  double rhs = dqmd(cost, p, q).value + dqmd(cost, q, r).value;
  return {lhs, rhs};
}

}  // namespace qmplan
