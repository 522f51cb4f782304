#pragma once

#include <string>
#include <vector>

#include "qmplan/distance_table.hpp"
#include "qmplan/error.hpp"

// Path relaxation: project an arbitrary nonnegative temporal-distance
// estimate onto the cone of quasimetrics by closing it under
//
//     d(s, g) <- min over w of d(s, w) + d(w, g).
//
// The fixed points of that operator are exactly the quasimetrics, and the
// closure computed here is the largest quasimetric pointwise below the
// input, reached exactly by one Floyd-Warshall-style min-plus sweep (no
// iterate-until-converged loop, no tolerance).

namespace qmplan {

struct TriangleViolation {
  State s, w, g;
  double lhs;  // d(s, g)
  double rhs;  // d(s, w) + d(w, g)
};

struct QuasimetricTable {
  DistanceTable d;
  bool certified = false;  // exhaustive audit found no violating triple
  double audit_eps = 0.0;
};

// Exhaustive scan over all ordered triples. A triple violates when
// d(s,g) > d(s,w) + d(w,g) + eps; eps = 0 keeps integer tables exact,
// 1e-9 absorbs float rounding for real-valued ones. Also rejects tables
// that fail the nonnegativity / zero-diagonal axioms outright.
inline std::vector<TriangleViolation> audit_quasimetric(
    const DistanceTable& d, double eps = 1e-9) {
  d.validate();
  std::vector<TriangleViolation> out;
  const int n = d.n;
  for (State s = 0; s < n; ++s) {
    for (State w = 0; w < n; ++w) {
      const double sw = d.at(s, w);
      if (sw == kInf) continue;
      for (State g = 0; g < n; ++g) {
        const double rhs = sw + d.at(w, g);
        if (d.at(s, g) > rhs + eps)
          out.push_back({s, w, g, d.at(s, g), rhs});
      }
    }
  }
  return out;
}

inline QuasimetricTable certify(DistanceTable d, double eps = 1e-9) {
  QuasimetricTable q;
  q.certified = audit_quasimetric(d, eps).empty();
  q.d = std::move(d);
  q.audit_eps = eps;
  return q;
}

inline QuasimetricTable path_relaxation_closure(const DistanceTable& input,
                                                double audit_eps = 1e-9) {
  input.validate();  // negative entries or a nonzero diagonal are errors
  QuasimetricTable out;
  out.d = input;
  DistanceTable& d = out.d;
  const int n = d.n;
  for (State w = 0; w < n; ++w) {
    for (State s = 0; s < n; ++s) {
      const double sw = d.at(s, w);
      if (sw == kInf) continue;
      const double* row_w = &d.v[static_cast<std::size_t>(w) * n];
      double* row_s = &d.v[static_cast<std::size_t>(s) * n];
      for (State g = 0; g < n; ++g) {
        const double via = sw + row_w[g];
        if (via < row_s[g]) row_s[g] = via;
      }
    }
  }
  out.audit_eps = audit_eps;
  out.certified = audit_quasimetric(d, audit_eps).empty();
  if (!out.certified)
    throw ComputeError("path relaxation: closure failed its own audit");
  return out;
}

// Keeps only entries strictly below the cutoff (the "short pairs"); the
// rest become +inf. The diagonal survives any positive cutoff.
inline DistanceTable short_pair_restriction(const DistanceTable& d,
                                            double cutoff) {
  if (!(cutoff > 0.0))
    throw ConfigError("short-pair restriction: cutoff must be positive");
  DistanceTable out = d;
  for (double& x : out.v)
    if (x >= cutoff) x = kInf;
  return out;
}

}  // namespace qmplan
