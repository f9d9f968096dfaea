#include "entangle/types.hpp"

#include <cmath>
#include <set>
#include <utility>

#include <Eigen/Eigenvalues>

#include "entangle/errors.hpp"

namespace entangle {

long total_dimension(const Factorization& factors) {
  long p = 1;
  for (const auto& f : factors) p *= f.dim;
  return p;
}

bool labels_unique(const Factorization& factors) {
  std::set<std::string> seen;
  for (const auto& f : factors) {
    if (!seen.insert(f.label).second) return false;
  }
  return true;
}

int factor_index(const Factorization& factors, const std::string& label) {
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].label == label) return static_cast<int>(i);
  }
  return -1;
}

namespace {

double max_abs(const Matrix& m) {
  return m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0;
}

void check_factors(const Matrix& m, const Factorization& f) {
  for (const auto& fac : f) {
    if (fac.dim < 1) throw ArgumentError("factor dimensions must be positive");
    if (fac.label.empty()) throw ArgumentError("factor labels must be nonempty");
  }
  if (!labels_unique(f)) throw ArgumentError("factor labels must be unique");
  if (total_dimension(f) != m.rows()) {
    throw ArgumentError("factor dimensions do not match the matrix size");
  }
}

}  // namespace

DensityOperator DensityOperator::checked(Matrix m, Factorization f) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw ArgumentError("operator matrix must be square and nonempty");
  }
  if (!m.allFinite()) throw ArgumentError("operator matrix must be finite");
  check_factors(m, f);

  const double scale = std::max(1.0, max_abs(m));
  const Matrix adj = m.adjoint();
  if (max_abs(Matrix(m - adj)) > 1e-10 * scale) {
    throw ArgumentError("operator is not Hermitian within tolerance");
  }
  Matrix sym = 0.5 * (m + adj);

  const double tr = sym.trace().real();
  if (!(tr > 0.0)) throw ArgumentError("operator trace must be positive");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(sym),
                                                     Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigenvalue computation failed");
  }
  if (es.eigenvalues().minCoeff() < -1e-9 * tr) {
    throw ArgumentError("operator has a negative eigenvalue beyond tolerance");
  }

  DensityOperator out;
  out.mat = std::move(sym);
  out.factors = std::move(f);
  out.normalized = std::abs(tr - 1.0) <= 1e-10;
  return out;
}

DensityOperator DensityOperator::trusted(Matrix m, Factorization f,
                                         bool normalized) {
  DensityOperator out;
  out.mat = std::move(m);
  out.factors = std::move(f);
  out.normalized = normalized;
  return out;
}

}  // namespace entangle
