#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entangle/types.hpp"

namespace entangle {

// Unit vector (1/sqrt(d)) sum_s |ss>.
Vector max_entangled_vector(int d);
// Rank-1 projector onto the maximally entangled vector, on labels (la, lb).
DensityOperator max_entangled(int d, const std::string& la = "A",
                              const std::string& lb = "B");

// Swap operator and the (un-normalized) symmetric / antisymmetric projectors
// on C^d (x) C^d.
Matrix swap_operator(int d);
Matrix symmetric_projector(int d);
Matrix antisymmetric_projector(int d);

struct WernerParam {
  double mu = 0.0;  // in [0, 1]; entangled iff mu > 1/2
  int d = 2;        // local dimension >= 2
};

// mu * (antisymmetric projector / its trace) + (1-mu) * (symmetric / trace).
DensityOperator werner(const WernerParam& p, const std::string& la = "A",
                       const std::string& lb = "B");

// f * phi_d + (1-f) * (I - phi_d) / (d^2 - 1).
DensityOperator isotropic(double fidelity, int d, const std::string& la = "A",
                          const std::string& lb = "B");

// Projection onto the Werner family: tr[rho Pa] * wminus + tr[rho Ps] * wplus.
// Idempotent, trace preserving; Werner inputs are fixed points.  Requires a
// two-factor state with equal local dimensions.
DensityOperator twirl_werner(const DensityOperator& rho);

// Projection onto the isotropic family: f * phi + (tr - f)(I - phi)/(d^2-1)
// with f = tr[rho phi].  Same requirements and properties as twirl_werner.
DensityOperator twirl_isotropic(const DensityOperator& rho);

struct PptResult {
  bool is_ppt = false;
  double min_eigenvalue = 0.0;
};

// Partial transpose on the factors in `cut` (a proper nonempty subset of the
// labels); is_ppt <=> min eigenvalue >= -1e-9 * tr(rho).
PptResult ppt_check(const DensityOperator& rho,
                    const std::vector<std::string>& cut);

}  // namespace entangle
