#pragma once

#include <string>
#include <vector>

#include "entangle/types.hpp"

namespace entangle {

inline constexpr long kDefaultMaxDimension = 256;

// Kronecker product a (x) b (general rectangular).  Guards against accidental
// blow-ups: the larger result dimension must stay within max_dim; pass a
// larger limit explicitly where a big composite is intended.
Matrix tensor_product(const Matrix& a, const Matrix& b,
                      long max_dim = kDefaultMaxDimension);
DensityOperator tensor_product(const DensityOperator& a,
                               const DensityOperator& b,
                               long max_dim = kDefaultMaxDimension);

// Trace out every factor not listed in `keep`.  Kept factors remain in their
// original order regardless of the order of `keep`.
Matrix partial_trace(const Matrix& m, const Factorization& f,
                     const std::vector<std::string>& keep,
                     Factorization* out_factors = nullptr);
DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<std::string>& keep);

// Transpose the listed factors in the computational basis.  Involutive and
// trace-preserving; the result is Hermitian but in general indefinite, so it
// is returned as a raw matrix.
Matrix partial_transpose(const Matrix& m, const Factorization& f,
                         const std::vector<std::string>& party);

// Reorder tensor factors to the given label order (a permutation of all
// labels present).
Matrix permute_factors(const Matrix& m, const Factorization& f,
                       const std::vector<std::string>& order,
                       Factorization* out_factors = nullptr);
DensityOperator permute_factors(const DensityOperator& rho,
                                const std::vector<std::string>& order);

struct Eigensystem {
  RealVector values;  // descending
  Matrix vectors;     // orthonormal columns matching `values`
};

// Full eigendecomposition of a Hermitian matrix (Hermiticity validated).
Eigensystem hermitian_eigensystem(const Matrix& m);

struct RayleighResult {
  double value = 0.0;
  Vector x;
};

// Maximize x'n x / x'(d + eps*I) x over nonzero x, for Hermitian n and
// positive-semidefinite d with positive trace.  eps < 0 selects the default
// 1e-12 * tr(d).
RayleighResult rayleigh_max(const Matrix& n, const Matrix& d,
                            double eps = -1.0);

// Number of singular values above 1e-9 of the unit vector v reshaped to a
// dim_a x dim_b matrix (row-major).
int schmidt_rank(const Vector& v, int dim_a, int dim_b);

}  // namespace entangle
