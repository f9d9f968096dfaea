#pragma once

#include <cstdint>
#include <vector>

#include "entangle/types.hpp"

namespace entangle {

// One product term of a local filtering operation.  `a` maps the A side of a
// bipartite state into C^rows(a), `b` the B side; for entanglement-fraction
// estimation both map into C^d.  States with more than two factors are
// grouped into sides by label prefix: labels starting with 'A' form the A
// side, labels starting with 'B' the B side.
struct LocalFilterPair {
  Matrix a;
  Matrix b;
  int d = 2;  // target local dimension for fidelity objectives
};

// A separable (multi-term) filtering operation: rho -> sum_k (a_k (x) b_k)
// rho (a_k (x) b_k)'.
struct SeparableMapSpec {
  std::vector<LocalFilterPair> terms;
};

struct FilteredState {
  DensityOperator state;  // unnormalized conditional output, factors (A, B)
  double weight = 0.0;    // trace of the output = tr[Omega(rho)]

  DensityOperator normalized() const;
};

// Apply a single-term or separable filter.  Throws FilterAnnihilationError
// when the output trace vanishes (relative to the filter and state scale).
FilteredState apply_filter(const DensityOperator& rho,
                           const LocalFilterPair& f);
FilteredState apply_filter(const DensityOperator& rho,
                           const SeparableMapSpec& spec);

// Overlap of the normalized state with the maximally entangled projector on
// C^d (x) C^d: tr[rho phi_d] / tr[rho].  Requires a two-factor state with
// both local dimensions equal to d.
double fidelity_with_phid(const DensityOperator& rho, int d);

struct SeesawConfig {
  int restarts = 64;
  int max_iterations = 500;
  double tolerance = 1e-9;       // stop when the objective gain drops below
  double regularization = 1e-12; // relative denominator regularization
  std::uint64_t seed = 1;
};

struct SeesawResult {
  double e_lower = 0.0;             // certified lower bound, in [1/d, 1]
  LocalFilterPair best_filter;      // attains e_lower on re-evaluation
  double success_probability = 0.0; // with operator-norm-normalized filters
  double trace_of_filtered = 0.0;   // output trace for the unit-trace input
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective_trace;  // per-iteration, best restart
};

// Lower-bound the entanglement fraction
//   e_d(rho) = sup_{A,B} tr[(A(x)B) rho (A(x)B)' phi_d] / tr[(A(x)B) rho ...]
// by alternating generalized Rayleigh-quotient maximization over A and B,
// with seeded random restarts.  Filters map each side into C^d; no further
// rank restriction is imposed.  Every reported value is attained by
// best_filter, hence a true lower bound; a basis-vector warm start guarantees
// e_lower >= 1/d.  Deterministic for a fixed seed, independent of the thread
// cap.  Optional warm_starts are tried before the built-in candidates.
SeesawResult e_d_seesaw(const DensityOperator& rho, int d,
                        const SeesawConfig& cfg = {},
                        const std::vector<LocalFilterPair>& warm_starts = {});

// Optimal conclusive-teleportation fidelity from an entanglement fraction:
// (1 + d*e) / (1 + d).  Requires e in [1/d, 1] (within 1e-9).
double f_d_from_e(double e, int d);

// True iff the best single term of `spec` reaches a fidelity within 1e-10 of
// the full multi-term map (the mediant inequality guarantees it always does).
bool single_term_dominance_check(const DensityOperator& rho,
                                 const SeparableMapSpec& spec, int d);

}  // namespace entangle
