#pragma once

// Seeded random operators for test inputs and invariant checks.

#include <cstdint>
#include <random>

#include "qqland/states.hpp"

namespace qqland {

using Rng = std::mt19937_64;

/// Independent standard complex normal entries, E|z|^2 = 1.
inline ComplexMatrix ginibre(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

inline ComplexMatrix random_hermitian(Index dim, Rng& rng) {
  return symmetrize(ginibre(dim, dim, rng));
}

/// Hilbert-Schmidt distributed state G G^dagger / Tr(G G^dagger).
inline DensityMatrix random_density(Index dim, Rng& rng) {
  if (dim < 1) throw DimensionError("random_density: dim must be >= 1");
  const ComplexMatrix g = ginibre(dim, dim, rng);
  ComplexMatrix rho = symmetrize(g * g.adjoint());
  rho /= rho.trace().real();
  return DensityMatrix(rho, "random density matrix");
}

inline DensityMatrix random_density(Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return random_density(dim, rng);
}

/// Haar-random unit vector.
inline ComplexVector random_pure_vector(Index dim, Rng& rng) {
  ComplexVector v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

}  // namespace qqland
