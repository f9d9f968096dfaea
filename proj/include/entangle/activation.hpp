#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "entangle/filters.hpp"
#include "entangle/rng.hpp"
#include "entangle/types.hpp"

namespace entangle {

// Activation experiments live on six labelled spaces: sigma on (A1, B1) and
// rho on (A2, A3, B2, B3), with A3 = B3 = C^d and dim A1 = dim A2,
// dim B1 = dim B2.  All operations below use this positional convention for
// their arguments; sigma^T means the full transpose in the computational
// basis.

// Upper-bound certificate for the entanglement fraction of a rho-family
// member.  `separable_floor` states have e_d = 1/d exactly; `analytic_family`
// bounds come with a derivation in docs/activation_families.md.
struct ECertificate {
  enum class Kind { separable_floor, analytic_family };
  Kind kind = Kind::separable_floor;
  double value = 0.0;
  std::string note;
};

const char* to_string(ECertificate::Kind kind);

struct CertifiedState {
  DensityOperator rho;
  ECertificate cert;
};

// The canonical activation filter pair: a contracts the normalized maximally
// entangled bra on (A1, A2) and passes A3 through, so it maps
// H_A1 (x) H_A2 (x) H_A3 -> C^d; b acts likewise on the B side.
LocalFilterPair activation_filter(int dim_a1, int dim_b1, int d);

struct IdentityCheckResult {
  double max_residual = 0.0;  // entrywise max |LHS - z * RHS|
  double z = 0.0;             // positive constant, 1/(dim_a1 * dim_b1)
};

// Check the contraction identity behind the activation filter: filtering
// sigma (x) rho with the pair above equals z * tr_{A2,B2}[rho (sigma^T (x) I)]
// as operators on A3 (x) B3.
IdentityCheckResult activation_identity_check(const DensityOperator& rho,
                                              const DensityOperator& sigma,
                                              int d);

// tr[rho (sigma^T (x) (lambda I - phi_d))], the activation indicator: a
// strictly negative value is sufficient for the joint state rho (x) sigma to
// admit a filter with fidelity above lambda.
double activation_condition(const DensityOperator& rho,
                            const DensityOperator& sigma, double lambda,
                            int d);

struct WitnessOperator {
  Matrix w;  // Hermitian on (A1, B1)
  Factorization factors;
  double lambda = 0.0;
  int d = 2;
  std::string provenance;  // description of the generating rho
};

// W = tr_{A3,B3}[rho (I (x) (lambda I - phi_d))].  Requires a certificate
// with value <= lambda (PreconditionError otherwise): that bound is what
// makes tr[W s] >= 0 for every separable s.  tr[W sigma^T] equals
// activation_condition(rho, sigma, lambda, d).
WitnessOperator witness_from_rho(const CertifiedState& rho, double lambda,
                                 int d);

// Minimum of <a (x) b| W |a (x) b> over Haar-sampled product states.
double witness_min_over_products(const WitnessOperator& w, int n_samples,
                                 std::uint64_t seed);

// Detection value tr[W sigma^T]; negative means sigma is detected.
double witness_value(const WitnessOperator& w, const DensityOperator& sigma);

// ---- Certified rho families ------------------------------------------------

// Flag family: rho = (1/m) sum_c J_c rho_inner J_c' with local isometries
// J_c|u> = |(c-u) mod m>_{A2} |u>_{A3} (and likewise on B), applied to the
// two-qubit inner state
//   rho_inner = f phi_2 + (1-f) [ (1-w) |01><01| + w |10><10| ],
// where w = noise_bias.  The isometries have pairwise orthogonal ranges on
// each side, so the entanglement fraction of rho equals that of rho_inner,
// and a balancing local filter reduces rho_inner to a Bell-diagonal state:
//   e_2 = max(1/2, f / (f + 2 (1-f) sqrt(w (1-w)))).
// Certificate derivation: docs/activation_families.md.  Only d = 2 carries
// an established certificate; other d are rejected.
CertifiedState gadget_family_state(double f_inner, int d, int m,
                                   double noise_bias = 0.5);

// Separable floor family: rho = |g><g| (x) |h><h| with |g> in A2 (x) A3 the
// (normalized) row-major vectorization of g (m x d), and likewise h on the B
// side.  Product across the A|B cut, so e_d = 1/d exactly.
CertifiedState separable_floor_state(const Matrix& g, const Matrix& h);

// 3 (x) 3 family (2/7) phi_3 + (alpha/7) s+ + ((5-alpha)/7) s- with
// s+ = (|01><01| + |12><12| + |20><20|)/3 and s- its transpose-shifted
// partner; alpha in [2, 5].  PPT for alpha <= 4, entangled for alpha > 3, so
// bound entangled on (3, 4].
DensityOperator sigma_alpha(double alpha, const std::string& la = "A1",
                            const std::string& lb = "B1");

// Random mixture of Haar product states on (A1, B1) (for witness probes).
DensityOperator sample_separable(int dim_a, int dim_b, int max_terms,
                                 Rng& rng);

// ---- Experiment runner -----------------------------------------------------

struct FamilySpec {
  enum class Kind { flag_gadget, separable_floor };
  Kind kind = Kind::flag_gadget;
  // flag_gadget: inner fidelities to try; empty selects a default grid from
  // lambda.  Ignored by separable_floor.
  std::vector<double> inner_fidelities;
  // flag_gadget: |10><10| noise weights to try; empty means {0.5}.  Ignored
  // by separable_floor.
  std::vector<double> noise_biases;
};

struct ActivationBudget {
  SeesawConfig joint_seesaw;  // verification seesaw on rho (x) sigma
  SeesawConfig sigma_seesaw;  // separable_floor: seesaw on sigma^T
};

struct ActivationInstance {
  DensityOperator rho;
  DensityOperator sigma;
  double lambda = 0.0;
  int d = 2;
  ECertificate e_rho_bound;
  SeesawResult e_joint_lower;
  double condition_value = 0.0;
};

struct ActivationOutcome {
  bool found = false;
  std::optional<ActivationInstance> instance;
  double min_condition_value = 0.0;  // smallest indicator seen in the scan
  std::string message;
};

// Scan the requested family for a rho with certificate <= lambda whose
// activation indicator with sigma is negative, then verify the joint bound
// e_d(rho (x) sigma) > lambda by seesaw (warm-started with the activation
// filter).  A failed scan returns found = false with the minimum indicator
// value; it is a report, not an error.
ActivationOutcome run_activation_experiment(const DensityOperator& sigma,
                                            double lambda, int d,
                                            const FamilySpec& family,
                                            const ActivationBudget& budget);

// ---- Probes ----------------------------------------------------------------

struct LemmaProbeResult {
  bool psd_holds = false;   // min eigenvalue of the gap operator >= -1e-9
  double trace_gap = 0.0;   // trace of the gap operator
  double min_eigenvalue = 0.0;
};

// Gap operator Z = K - Omega(K) for K = lambda I - phi_d and a separable map
// Omega.  Separable maps can only shrink K in this sense degenerately: if Z
// is PSD then its trace vanishes.  The probe reports both quantities;
// lambda must lie in [1/d, 1).
LemmaProbeResult lemma_probe(const SeparableMapSpec& map, double lambda,
                             int d);

struct MuProbeResult {
  double mu_prime = 0.0;
  bool flag = false;
};

// Filter a Werner state, project back onto the Werner family, and read off
// the new parameter mu'.  Entanglement cannot be created by local filtering,
// so max(mu', 1/2) <= max(mu, 1/2) + 1e-9; the flag records that check (for
// mu >= 1/2 it reduces to mu' <= mu + 1e-9; separable inputs stay separable
// but mu' may drift within [0, 1/2]).
MuProbeResult werner_mu_monotonicity_probe(double mu, int d,
                                           const SeparableMapSpec& map);

}  // namespace entangle
