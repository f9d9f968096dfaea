#pragma once

#include <cstdint>

#include "entangle/filters.hpp"
#include "entangle/types.hpp"

namespace entangle {

// Shift-and-phase operator X^a Z^b on C^d (X|s> = |s+1 mod d>,
// Z|s> = exp(2 pi i s / d)|s>).
Matrix weyl_operator(int d, int a, int b);

// Generalized Bell vector (W_ab (x) I) |phi_d>.
Vector bell_vector(int d, int a, int b);

struct TeleportConfig {
  int d = 2;
  int n_samples = 20000;
  std::uint64_t seed = 1;
};

// One round of the standard d-dimensional protocol: generalized Bell
// measurement on (input, A), shift-and-phase correction on B, averaged over
// all d^2 outcomes.  Trace preserving; requires a normalized d (x) d
// resource.  With the maximally entangled resource the output equals the
// input exactly.
DensityOperator standard_teleport(const DensityOperator& resource,
                                  const Vector& psi_in);

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  int n_samples = 0;
};

// Monte Carlo estimate of the average teleportation fidelity over Haar-random
// pure inputs.  Samples are drawn in fixed-size chunks with one stream per
// chunk and reduced in chunk order, so the estimate is bit-reproducible for a
// fixed seed regardless of the thread cap.
McEstimate average_fidelity_mc(const DensityOperator& resource,
                               const TeleportConfig& cfg);

// Conclusive mode: the filter success is post-selected analytically (the
// normalized filtered state feeds the standard protocol); the success
// probability is reported separately by callers via apply_filter.
McEstimate conclusive_fidelity_mc(const DensityOperator& resource,
                                  const LocalFilterPair& filter,
                                  const TeleportConfig& cfg);

struct FidelityRelationReport {
  SeesawResult seesaw;
  double filter_fidelity = 0.0;  // fidelity of the stored filter's output
  double predicted = 0.0;        // (1 + d * filter_fidelity) / (1 + d)
  McEstimate mc;                 // conclusive Monte Carlo with that filter
  bool consistent = false;
};

// End-to-end check that conclusive teleportation achieves the fidelity
// implied by the filtered state's overlap: estimates e_d(rho) by seesaw,
// predicts (1 + d e)/(1 + d), and verifies the Monte Carlo conclusive
// fidelity matches within 3 standard errors (plus a 1e-3 guard).
FidelityRelationReport verify_fidelity_relation(const DensityOperator& rho,
                                                int d,
                                                const SeesawConfig& seesaw_cfg,
                                                const TeleportConfig& mc_cfg);

}  // namespace entangle
