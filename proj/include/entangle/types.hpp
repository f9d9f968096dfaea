#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace entangle {

using Complex = std::complex<double>;

// Dense complex matrices in row-major layout.  Every operator in the toolkit
// is stored this way so that composite-index arithmetic (i = i1*d2 + i2)
// matches the memory layout of the matrix.
using Matrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
using RealVector = Eigen::Matrix<double, Eigen::Dynamic, 1>;

// One tensor factor of a Hilbert space: a unique label and its dimension.
struct Factor {
  std::string label;
  int dim = 0;
};

using Factorization = std::vector<Factor>;

long total_dimension(const Factorization& factors);
bool labels_unique(const Factorization& factors);
// Position of `label` in `factors`, or -1 when absent.
int factor_index(const Factorization& factors, const std::string& label);

// Hermitian operator on a labelled tensor-product space.  Operators are
// first-class even when unnormalized; `normalized` records whether the trace
// is 1 within 1e-10.
//
// `checked` validates external input (finiteness, Hermiticity within 1e-10,
// positive trace, eigenvalues >= -1e-9 * trace) and symmetrizes the matrix;
// `trusted` skips validation and is for internal constructions whose
// properties hold by construction (including indefinite intermediates such as
// partially transposed operators).
struct DensityOperator {
  Matrix mat;
  Factorization factors;
  bool normalized = false;

  static DensityOperator checked(Matrix m, Factorization f);
  static DensityOperator trusted(Matrix m, Factorization f,
                                 bool normalized = false);

  int dim() const { return static_cast<int>(mat.rows()); }
  double trace_real() const { return mat.trace().real(); }
};

}  // namespace entangle
