#include "entangle/states.hpp"

#include <cmath>

#include "entangle/errors.hpp"
#include "entangle/tensor.hpp"

namespace entangle {

Vector max_entangled_vector(int d) {
  if (d < 2) throw ArgumentError("local dimension must be at least 2");
  Vector v = Vector::Zero(static_cast<long>(d) * d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (int s = 0; s < d; ++s) v[static_cast<long>(s) * d + s] = amp;
  return v;
}

DensityOperator max_entangled(int d, const std::string& la,
                              const std::string& lb) {
  const Vector v = max_entangled_vector(d);
  Matrix m = v * v.adjoint();
  return DensityOperator::trusted(std::move(m), {{la, d}, {lb, d}},
                                  /*normalized=*/true);
}

Matrix swap_operator(int d) {
  if (d < 2) throw ArgumentError("local dimension must be at least 2");
  Matrix s = Matrix::Zero(static_cast<long>(d) * d, static_cast<long>(d) * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      s(static_cast<long>(i) * d + j, static_cast<long>(j) * d + i) = 1.0;
    }
  }
  return s;
}

Matrix symmetric_projector(int d) {
  const long dim = static_cast<long>(d) * d;
  return 0.5 * (Matrix::Identity(dim, dim) + swap_operator(d));
}

Matrix antisymmetric_projector(int d) {
  const long dim = static_cast<long>(d) * d;
  return 0.5 * (Matrix::Identity(dim, dim) - swap_operator(d));
}

DensityOperator werner(const WernerParam& p, const std::string& la,
                       const std::string& lb) {
  if (p.d < 2) throw ArgumentError("local dimension must be at least 2");
  if (!(p.mu >= 0.0 && p.mu <= 1.0)) {
    throw ArgumentError("mu must lie in [0, 1]");
  }
  const double d = static_cast<double>(p.d);
  const Matrix pa = antisymmetric_projector(p.d);
  const Matrix ps = symmetric_projector(p.d);
  Matrix m = p.mu * (pa / (d * (d - 1.0) / 2.0)) +
             (1.0 - p.mu) * (ps / (d * (d + 1.0) / 2.0));
  return DensityOperator::trusted(std::move(m), {{la, p.d}, {lb, p.d}},
                                  /*normalized=*/true);
}

DensityOperator isotropic(double fidelity, int d, const std::string& la,
                          const std::string& lb) {
  if (d < 2) throw ArgumentError("local dimension must be at least 2");
  if (!(fidelity >= 0.0 && fidelity <= 1.0)) {
    throw ArgumentError("fidelity must lie in [0, 1]");
  }
  const long dim = static_cast<long>(d) * d;
  const Vector v = max_entangled_vector(d);
  const Matrix phi = v * v.adjoint();
  Matrix m = fidelity * phi + (1.0 - fidelity) / (dim - 1.0) *
                                  (Matrix::Identity(dim, dim) - phi);
  return DensityOperator::trusted(std::move(m), {{la, d}, {lb, d}},
                                  /*normalized=*/true);
}

namespace {

int twirl_local_dim(const DensityOperator& rho) {
  if (rho.factors.size() != 2 || rho.factors[0].dim != rho.factors[1].dim) {
    throw ArgumentError(
        "twirl requires a two-factor state with equal local dimensions");
  }
  return rho.factors[0].dim;
}

}  // namespace

DensityOperator twirl_werner(const DensityOperator& rho) {
  const int d = twirl_local_dim(rho);
  const double dd = static_cast<double>(d);
  const Matrix pa = antisymmetric_projector(d);
  const Matrix ps = symmetric_projector(d);
  const double wa = (rho.mat * pa).trace().real();
  const double ws = (rho.mat * ps).trace().real();
  Matrix m = wa * (pa / (dd * (dd - 1.0) / 2.0)) +
             ws * (ps / (dd * (dd + 1.0) / 2.0));
  return DensityOperator::trusted(std::move(m), rho.factors, rho.normalized);
}

DensityOperator twirl_isotropic(const DensityOperator& rho) {
  const int d = twirl_local_dim(rho);
  const long dim = static_cast<long>(d) * d;
  const Vector v = max_entangled_vector(d);
  const Matrix phi = v * v.adjoint();
  const double f = (rho.mat * phi).trace().real();
  const double rest = rho.mat.trace().real() - f;
  Matrix m =
      f * phi + rest / (dim - 1.0) * (Matrix::Identity(dim, dim) - phi);
  return DensityOperator::trusted(std::move(m), rho.factors, rho.normalized);
}

PptResult ppt_check(const DensityOperator& rho,
                    const std::vector<std::string>& cut) {
  if (cut.empty() || cut.size() >= rho.factors.size()) {
    throw ArgumentError("cut must be a proper nonempty subset of the factors");
  }
  const Matrix gamma = partial_transpose(rho.mat, rho.factors, cut);
  const Eigensystem es = hermitian_eigensystem(gamma);
  PptResult out;
  out.min_eigenvalue = es.values[es.values.size() - 1];
  out.is_ppt = out.min_eigenvalue >= -1e-9 * rho.trace_real();
  return out;
}

}  // namespace entangle
