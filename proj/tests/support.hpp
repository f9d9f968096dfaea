#pragma once

// Shared helpers for the test binaries.

#include <cmath>
#include <limits>

#include "entangle/rng.hpp"
#include "entangle/tensor.hpp"
#include "entangle/types.hpp"

namespace entangle::testing {

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

// Random normalized density operator on (da, db) with labels A, B.
inline DensityOperator random_bipartite(int da, int db, Rng& rng,
                                        int rank = 0) {
  Matrix m = random_density_matrix(da * db, rng, rank);
  return DensityOperator::trusted(std::move(m), {{"A", da}, {"B", db}},
                                  /*normalized=*/true);
}

// Random matrix with independent complex-Gaussian entries.
inline Matrix ginibre(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.complex_normal();
  }
  return m;
}

}  // namespace entangle::testing
