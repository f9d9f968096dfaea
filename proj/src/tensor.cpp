#include "entangle/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "entangle/errors.hpp"

namespace entangle {

namespace {

double max_abs(const Matrix& m) {
  return m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0;
}

void check_square(const Matrix& m) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw ArgumentError("matrix must be square and nonempty");
  }
}

void check_shape(const Matrix& m, const Factorization& f) {
  check_square(m);
  if (f.empty()) throw ArgumentError("factorization must be nonempty");
  if (!labels_unique(f)) throw ArgumentError("factor labels must be unique");
  for (const auto& fac : f) {
    if (fac.dim < 1) throw ArgumentError("factor dimensions must be positive");
  }
  if (total_dimension(f) != m.rows()) {
    throw ArgumentError("factor dimensions do not match the matrix size");
  }
}

// Full-space stride of each factor (row-major composite indices).
std::vector<long> factor_strides(const Factorization& f) {
  std::vector<long> s(f.size(), 1);
  for (int i = static_cast<int>(f.size()) - 2; i >= 0; --i) {
    s[i] = s[i + 1] * f[i + 1].dim;
  }
  return s;
}

// Offsets into the full index space for every combined index of the factor
// subset `positions` (digits enumerated row-major over the subset).
std::vector<long> subset_offsets(const Factorization& f,
                                 const std::vector<int>& positions) {
  const std::vector<long> strides = factor_strides(f);
  long count = 1;
  for (int p : positions) count *= f[p].dim;
  std::vector<long> offsets(count, 0);
  long repeat = count;
  for (int p : positions) {
    const int dim = f[p].dim;
    repeat /= dim;
    // digit of factor p cycles with period `repeat`, `dim` values
    long idx = 0;
    while (idx < count) {
      for (int digit = 0; digit < dim; ++digit) {
        for (long r = 0; r < repeat; ++r) {
          offsets[idx++] += digit * strides[p];
        }
      }
    }
  }
  return offsets;
}

void check_hermitian(const Matrix& m, const char* what) {
  const double scale = std::max(1.0, max_abs(m));
  const Matrix adj = m.adjoint();
  if (max_abs(Matrix(m - adj)) > 1e-10 * scale) {
    throw ArgumentError(std::string(what) + " must be Hermitian");
  }
}

Eigen::MatrixXcd symmetrized(const Matrix& m) {
  const Eigen::MatrixXcd c(m);
  return 0.5 * (c + c.adjoint());
}

}  // namespace

Matrix tensor_product(const Matrix& a, const Matrix& b, long max_dim) {
  if (a.size() < 1 || b.size() < 1) {
    throw ArgumentError("tensor factors must be nonempty");
  }
  const long rows = a.rows() * b.rows();
  const long cols = a.cols() * b.cols();
  if (std::max(rows, cols) > max_dim) {
    throw CapacityError("tensor product dimension " +
                        std::to_string(std::max(rows, cols)) +
                        " exceeds the configured limit " +
                        std::to_string(max_dim));
  }
  Matrix out(rows, cols);
  for (long r = 0; r < a.rows(); ++r) {
    for (long c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}

DensityOperator tensor_product(const DensityOperator& a,
                               const DensityOperator& b, long max_dim) {
  Factorization factors = a.factors;
  factors.insert(factors.end(), b.factors.begin(), b.factors.end());
  if (!labels_unique(factors)) {
    throw ArgumentError("tensor factors must have disjoint labels");
  }
  return DensityOperator::trusted(tensor_product(a.mat, b.mat, max_dim),
                                  std::move(factors),
                                  a.normalized && b.normalized);
}

Matrix partial_trace(const Matrix& m, const Factorization& f,
                     const std::vector<std::string>& keep,
                     Factorization* out_factors) {
  check_shape(m, f);
  std::set<std::string> keep_set;
  for (const auto& label : keep) {
    if (factor_index(f, label) < 0) {
      throw ArgumentError("unknown factor label '" + label + "'");
    }
    if (!keep_set.insert(label).second) {
      throw ArgumentError("duplicate factor label '" + label + "'");
    }
  }
  std::vector<int> kept, traced;
  for (int i = 0; i < static_cast<int>(f.size()); ++i) {
    (keep_set.count(f[i].label) ? kept : traced).push_back(i);
  }
  const std::vector<long> koff = subset_offsets(f, kept);
  const std::vector<long> toff = subset_offsets(f, traced);
  const long dk = static_cast<long>(koff.size());

  Matrix out(dk, dk);
  for (long r = 0; r < dk; ++r) {
    for (long c = 0; c < dk; ++c) {
      Complex acc(0.0, 0.0);
      for (long t : toff) acc += m(koff[r] + t, koff[c] + t);
      out(r, c) = acc;
    }
  }
  if (out_factors) {
    out_factors->clear();
    for (int p : kept) out_factors->push_back(f[p]);
    if (out_factors->empty()) out_factors->push_back({"scalar", 1});
  }
  return out;
}

DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<std::string>& keep) {
  Factorization out_factors;
  Matrix m = partial_trace(rho.mat, rho.factors, keep, &out_factors);
  return DensityOperator::trusted(std::move(m), std::move(out_factors),
                                  rho.normalized);
}

Matrix partial_transpose(const Matrix& m, const Factorization& f,
                         const std::vector<std::string>& party) {
  check_shape(m, f);
  if (party.empty()) throw ArgumentError("transpose cut must be nonempty");
  std::set<std::string> party_set;
  for (const auto& label : party) {
    if (factor_index(f, label) < 0) {
      throw ArgumentError("unknown factor label '" + label + "'");
    }
    if (!party_set.insert(label).second) {
      throw ArgumentError("duplicate factor label '" + label + "'");
    }
  }
  std::vector<int> flip, fixed;
  for (int i = 0; i < static_cast<int>(f.size()); ++i) {
    (party_set.count(f[i].label) ? flip : fixed).push_back(i);
  }
  const std::vector<long> poff = subset_offsets(f, flip);
  const std::vector<long> xoff = subset_offsets(f, fixed);

  const long dim = m.rows();
  Matrix out(dim, dim);
  for (long pr : poff) {
    for (long pc : poff) {
      for (long xr : xoff) {
        for (long xc : xoff) {
          // transposed factors swap their row/column digits
          out(pc + xr, pr + xc) = m(pr + xr, pc + xc);
        }
      }
    }
  }
  return out;
}

Matrix permute_factors(const Matrix& m, const Factorization& f,
                       const std::vector<std::string>& order,
                       Factorization* out_factors) {
  check_shape(m, f);
  if (order.size() != f.size()) {
    throw ArgumentError("factor order must list every label exactly once");
  }
  std::vector<int> source(order.size());
  std::set<std::string> seen;
  Factorization new_factors;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const int p = factor_index(f, order[j]);
    if (p < 0) throw ArgumentError("unknown factor label '" + order[j] + "'");
    if (!seen.insert(order[j]).second) {
      throw ArgumentError("duplicate factor label '" + order[j] + "'");
    }
    source[j] = p;
    new_factors.push_back(f[p]);
  }

  const std::vector<long> old_strides = factor_strides(f);
  const std::vector<long> new_strides = factor_strides(new_factors);
  const long dim = m.rows();

  // map[i] = index of old composite i in the permuted ordering
  std::vector<long> map(dim, 0);
  for (long i = 0; i < dim; ++i) {
    long rest = i;
    std::vector<long> digits(f.size());
    for (std::size_t p = 0; p < f.size(); ++p) {
      digits[p] = rest / old_strides[p];
      rest %= old_strides[p];
    }
    long ni = 0;
    for (std::size_t j = 0; j < order.size(); ++j) {
      ni += digits[source[j]] * new_strides[j];
    }
    map[i] = ni;
  }

  Matrix out(dim, dim);
  for (long r = 0; r < dim; ++r) {
    for (long c = 0; c < dim; ++c) out(map[r], map[c]) = m(r, c);
  }
  if (out_factors) *out_factors = std::move(new_factors);
  return out;
}

DensityOperator permute_factors(const DensityOperator& rho,
                                const std::vector<std::string>& order) {
  Factorization out_factors;
  Matrix m = permute_factors(rho.mat, rho.factors, order, &out_factors);
  return DensityOperator::trusted(std::move(m), std::move(out_factors),
                                  rho.normalized);
}

Eigensystem hermitian_eigensystem(const Matrix& m) {
  check_square(m);
  if (!m.allFinite()) throw ArgumentError("matrix must be finite");
  check_hermitian(m, "matrix");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(symmetrized(m));
  if (es.info() != Eigen::Success) {
    throw NumericError("eigenvalue computation failed");
  }
  Eigensystem out;
  out.values = es.eigenvalues().reverse();
  out.vectors = Matrix(es.eigenvectors().rowwise().reverse());
  return out;
}

RayleighResult rayleigh_max(const Matrix& n, const Matrix& d, double eps) {
  check_square(n);
  check_square(d);
  if (n.rows() != d.rows()) {
    throw ArgumentError("numerator and denominator dimensions differ");
  }
  if (!n.allFinite() || !d.allFinite()) {
    throw ArgumentError("matrices must be finite");
  }
  check_hermitian(n, "numerator matrix");
  check_hermitian(d, "denominator matrix");

  const Eigen::MatrixXcd dsym = symmetrized(d);
  const double trd = dsym.trace().real();
  if (!(trd > 0.0)) {
    throw ArgumentError("denominator matrix must have positive trace");
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> check(
        dsym, Eigen::EigenvaluesOnly);
    if (check.info() != Eigen::Success) {
      throw NumericError("eigenvalue computation failed");
    }
    if (check.eigenvalues().minCoeff() < -1e-9 * trd) {
      throw ArgumentError("denominator matrix must be positive semidefinite");
    }
  }
  if (eps < 0.0) eps = 1e-12 * trd;

  const Eigen::MatrixXcd nsym = symmetrized(n);
  const Eigen::MatrixXcd reg =
      dsym + eps * Eigen::MatrixXcd::Identity(d.rows(), d.cols());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(nsym, reg);
  if (ges.info() != Eigen::Success) {
    throw NumericError("generalized eigenvalue computation failed");
  }
  Vector x = ges.eigenvectors().col(d.rows() - 1);
  const double nx = x.norm();
  if (!(nx > 0.0)) throw NumericError("degenerate eigenvector");
  x /= nx;

  RayleighResult out;
  const Complex num = (x.adjoint() * nsym * x)(0, 0);
  const Complex den = (x.adjoint() * reg * x)(0, 0);
  out.value = num.real() / den.real();
  out.x = std::move(x);
  return out;
}

int schmidt_rank(const Vector& v, int dim_a, int dim_b) {
  if (dim_a < 1 || dim_b < 1) {
    throw ArgumentError("dimensions must be positive");
  }
  if (v.size() != static_cast<long>(dim_a) * dim_b) {
    throw ArgumentError("vector length does not match the dimensions");
  }
  if (std::abs(v.norm() - 1.0) > 1e-10) {
    throw ArgumentError("vector must be normalized");
  }
  Eigen::MatrixXcd m(dim_a, dim_b);
  for (int i = 0; i < dim_a; ++i) {
    for (int j = 0; j < dim_b; ++j) m(i, j) = v[static_cast<long>(i) * dim_b + j];
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  int rank = 0;
  for (long k = 0; k < svd.singularValues().size(); ++k) {
    if (svd.singularValues()[k] > 1e-9) ++rank;
  }
  return rank;
}

}  // namespace entangle
