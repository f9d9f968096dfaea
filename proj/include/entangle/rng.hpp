#pragma once

#include <cstdint>
#include <random>

#include "entangle/types.hpp"

namespace entangle {

// Deterministic random stream addressed by (seed, stream).  Parallel callers
// draw from independent streams so results do not depend on thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller (cached spare for the second deviate).
  double normal();
  // Standard complex normal: (normal + i normal) / sqrt(2).
  Complex complex_normal();
  // Uniform integer in [0, n).
  std::uint64_t integer(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Unit vector with Haar-uniform direction in C^d.
Vector haar_random_pure(int d, Rng& rng);
Vector haar_random_pure(int d, std::uint64_t seed);

// Haar-uniform unitary: QR of a complex Ginibre matrix with phase fixing.
Matrix haar_random_unitary(int d, Rng& rng);

// Random mixed state G G' / tr(G G') with G a d x rank Ginibre matrix.
Matrix random_density_matrix(int d, Rng& rng, int rank = 0);

}  // namespace entangle
