#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qmplan/distance_table.hpp"
#include "qmplan/error.hpp"
#include "qmplan/grid_world.hpp"
#include "qmplan/policy.hpp"
#include "qmplan/rollout.hpp"

// Distance-stratified evaluation: success curves over shortest-path
// distance bins, the per-doubling decay factor eta, the worst-case Reach
// it implies, and the planning-invariance ratio.

namespace qmplan {

struct PairOutcome {
  State s, g;
  double dstar;
  bool success;
  int steps;
};

// Bins are labeled by their upper edge: a pair with true distance in
// (edges[k-1], edges[k]] lands in the bin labeled edges[k] (first bin
// covers (0, edges[0]]). Bins that caught no pairs are omitted.
struct SuccessCurve {
  std::vector<double> bin_upper;
  std::vector<int> pair_count;
  std::vector<double> success_rate;

  // rate of the bin labeled exactly `upper`, or -1 when absent
  double rate_at(double upper) const {
    for (std::size_t i = 0; i < bin_upper.size(); ++i)
      if (bin_upper[i] == upper) return success_rate[i];
    return -1.0;
  }
};

struct EvalRun {
  SuccessCurve curve;
  std::vector<PairOutcome> pairs;
};

namespace detail {

inline std::vector<std::pair<State, State>> eligible_pairs(
    const DistanceTable& dstar, double min_d, double max_d) {
  std::vector<std::pair<State, State>> out;
  for (State s = 0; s < dstar.n; ++s)
    for (State g = 0; g < dstar.n; ++g) {
      if (s == g) continue;
      double d = dstar.at(s, g);
      if (d != kInf && d >= min_d && d <= max_d) out.push_back({s, g});
    }
  return out;
}

}  // namespace detail

// The curve is a pure fold over the returned per-pair outcomes; tests and
// the report command recount it from those records. Pairs are drawn
// uniformly (with replacement) from ordered reachable pairs s != g whose
// true distance does not exceed the last bin edge; rollout i uses the seed
// stream derived from (seed, i).
inline EvalRun stratified_success(const GridWorld& world, const Policy& policy,
                                  const DistanceTable& dstar,
                                  const std::vector<double>& bin_edges,
                                  int n_pairs, int max_steps,
                                  std::uint64_t seed) {
  if (bin_edges.empty()) throw ConfigError("evaluation: no bin edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i)
    if (bin_edges[i] <= bin_edges[i - 1])
      throw ConfigError("evaluation: bin edges must be strictly ascending");

  auto pool = detail::eligible_pairs(dstar, 1.0, bin_edges.back());
  if (pool.empty())
    throw ComputeError("evaluation: no reachable pair within the bin range");

  Rng pick(derive_seed(seed, 0x5E1EC7));
  EvalRun run;
  run.pairs.reserve(n_pairs);
  for (int i = 0; i < n_pairs; ++i) {
    auto [s, g] = pool[pick.uniform_index(pool.size())];
    RolloutResult r = rollout(world, policy, s, g, max_steps,
                              derive_seed(seed, 0x0117, i));
    run.pairs.push_back({s, g, dstar.at(s, g), r.success, r.steps});
  }

  std::vector<int> total(bin_edges.size(), 0), won(bin_edges.size(), 0);
  for (const PairOutcome& p : run.pairs) {
    std::size_t k = 0;
    while (p.dstar > bin_edges[k]) ++k;
    total[k] += 1;
    won[k] += p.success ? 1 : 0;
  }
  for (std::size_t k = 0; k < bin_edges.size(); ++k) {
    if (total[k] == 0) continue;
    run.curve.bin_upper.push_back(bin_edges[k]);
    run.curve.pair_count.push_back(total[k]);
    run.curve.success_rate.push_back(static_cast<double>(won[k]) / total[k]);
  }
  return run;
}

// Worst-case reach multiplier implied by a per-doubling success decay of
// eta: the fraction of the full task horizon attainable by an agent that
// only ever generalizes one doubling. Diverges once eta reaches 1/2.
inline double reach_worst_case(double eta) {
  if (eta < 0.0) throw ConfigError("reach: eta must be nonnegative");
  if (eta >= 0.5) return kInf;
  return 1.0 + eta / (1.0 - 2.0 * eta);
}

struct HorizonReport {
  std::vector<std::pair<double, double>> eta_per_doubling;  // (c, S(2c)/S(c))
  double eta_aggregate = 0.0;  // geometric mean over available doublings
  double reach = 0.0;          // reach_worst_case(eta_aggregate)
};

// Reads the decay per horizon doubling off a success curve: for
// c = c0, 2*c0, 4*c0, ... while both bins exist, eta_c = rate(2c)/rate(c).
// Stops early if a numerator bin is missing or a denominator hits zero.
inline HorizonReport eta_and_reach(const SuccessCurve& curve, double c0) {
  double r0 = curve.rate_at(c0);
  if (r0 < 0.0)
    throw ConfigError("eta: no bin labeled c0 = " + std::to_string(c0));
  if (r0 == 0.0)
    throw ComputeError("eta: success at the base horizon c0 is zero");

  HorizonReport rep;
  double prod = 1.0;
  for (double c = c0;; c *= 2.0) {
    double rc = curve.rate_at(c);
    double r2c = curve.rate_at(2.0 * c);
    if (rc <= 0.0 || r2c < 0.0) break;
    double eta = r2c / rc;
    rep.eta_per_doubling.push_back({c, eta});
    prod *= eta;
  }
  if (rep.eta_per_doubling.empty())
    throw ComputeError("eta: curve spans no full doubling from c0");
  rep.eta_aggregate =
      std::pow(prod, 1.0 / static_cast<double>(rep.eta_per_doubling.size()));
  rep.reach = reach_worst_case(rep.eta_aggregate);
  return rep;
}

struct InvarianceResult {
  double base_rate = 0.0;
  double planned_rate = 0.0;
  double ratio = 0.0;  // planned / base; NaN when 0/0, +inf when x/0
  int n_pairs = 0;
};

// Success of the planner-composed policy relative to the base policy, on
// one shared seeded sample of distant pairs (true distance >= threshold).
// Both arms replay the identical pair list with identical rollout seeds.
inline InvarianceResult planning_invariance_ratio(
    const GridWorld& world, const Policy& base, const Policy& composed,
    const DistanceTable& dstar, double threshold, int n_pairs, int max_steps,
    std::uint64_t seed) {
  auto pool = detail::eligible_pairs(dstar, threshold, kInf);
  if (pool.empty())
    throw ComputeError("invariance: no reachable pair at distance >= " +
                       std::to_string(threshold));
  Rng pick(derive_seed(seed, 0x9A185));
  int base_won = 0, planned_won = 0;
  for (int i = 0; i < n_pairs; ++i) {
    auto [s, g] = pool[pick.uniform_index(pool.size())];
    std::uint64_t rs = derive_seed(seed, 0x0117, i);
    base_won += rollout(world, base, s, g, max_steps, rs).success ? 1 : 0;
    planned_won +=
        rollout(world, composed, s, g, max_steps, rs).success ? 1 : 0;
  }
  InvarianceResult res;
  res.n_pairs = n_pairs;
  res.base_rate = static_cast<double>(base_won) / n_pairs;
  res.planned_rate = static_cast<double>(planned_won) / n_pairs;
  if (base_won == 0 && planned_won == 0)
    res.ratio = std::nan("");
  else if (base_won == 0)
    res.ratio = kInf;
  else
    res.ratio = res.planned_rate / res.base_rate;
  return res;
}

struct ScatterRow {
  std::string method;
  double eta_aggregate;
  double invariance_ratio;
};

}  // namespace qmplan
