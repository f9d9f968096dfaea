#include "entangle/rng.hpp"

#include <cmath>

#include <Eigen/QR>

#include "entangle/errors.hpp"

namespace entangle {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  // Mix (seed, stream) into one engine seed so distinct streams are
  // decorrelated and reproducible.
  std::uint64_t a = seed;
  std::uint64_t h = splitmix64(a);
  std::uint64_t b = stream ^ 0xd1b54a32d192ed03ULL;
  h ^= splitmix64(b) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  engine_.seed(h);
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * M_PI * u2;
  spare_ = r * std::sin(t);
  have_spare_ = true;
  return r * std::cos(t);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return Complex(re, im) / std::sqrt(2.0);
}

std::uint64_t Rng::integer(std::uint64_t n) {
  if (n == 0) throw ArgumentError("integer() requires n > 0");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = engine_();
  while (v >= limit) v = engine_();
  return v % n;
}

Vector haar_random_pure(int d, Rng& rng) {
  if (d < 1) throw ArgumentError("dimension must be at least 1");
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.complex_normal();
  const double n = v.norm();
  if (n < 1e-150) return haar_random_pure(d, rng);
  return v / n;
}

Vector haar_random_pure(int d, std::uint64_t seed) {
  Rng rng(seed, 0);
  return haar_random_pure(d, rng);
}

Matrix haar_random_unitary(int d, Rng& rng) {
  if (d < 1) throw ArgumentError("dimension must be at least 1");
  Eigen::MatrixXcd g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = rng.complex_normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase convention so the distribution is Haar.
  for (int j = 0; j < d; ++j) {
    const Complex rjj = r(j, j);
    const double a = std::abs(rjj);
    q.col(j) *= (a > 0.0) ? rjj / a : Complex(1.0, 0.0);
  }
  return Matrix(q);
}

Matrix random_density_matrix(int d, Rng& rng, int rank) {
  if (d < 1) throw ArgumentError("dimension must be at least 1");
  if (rank <= 0) rank = d;
  Matrix g(d, rank);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < rank; ++j) g(i, j) = rng.complex_normal();
  }
  Matrix m = g * g.adjoint();
  const double tr = m.trace().real();
  if (tr < 1e-150) return random_density_matrix(d, rng, rank);
  return m / tr;
}

}  // namespace entangle
