#pragma once

// The quantum-controlled landscape J[rho_B] = Tr[U (rho_A (x) rho_B) U^dagger (O_A (x) I_B)].
//
// J is linear in rho_B, so it equals Tr(rho_B O_B) for the landscape
// observable O_B = Tr_A[U^dagger (O_A (x) I_B) U (rho_A (x) I_B)], and its
// extrema over all density matrices are the extreme eigenvalues of O_B,
// attained on the matching eigenspaces.
//
// Convention: the joint initial state is rho_A (x) rho_B with A as the outer
// factor everywhere. The alternative rho_B (x) rho_A ordering is never used.

#include <sstream>
#include <string>

#include "qqland/hamiltonian.hpp"
#include "qqland/states.hpp"

namespace qqland {

enum class Sense { maximize, minimize };

inline constexpr double kDefaultDegeneracyTol = 1e-9;
/// Largest accepted max-abs asymmetry of O_B before symmetrization.
inline constexpr double kObservableAsymmetryTol = 1e-8;
/// Imaginary residue of J above which the inputs are considered corrupt.
inline constexpr double kImaginaryResidueTol = 1e-8;

struct LandscapeObservable {
  ComplexMatrix matrix;  // O_B, Hermitian dim_b x dim_b
  HermitianEig eig;
  double duration = 0.0;
  double asymmetry = 0.0;  // max |O_B - O_B^dagger| before symmetrization
  BipartiteHamiltonian hamiltonian;
  DensityMatrix rho_a;
  Observable o_a;
};

struct JqBounds {
  double min = 0.0;
  double max = 0.0;
};

struct OptimalSolution {
  double objective = 0.0;
  ComplexMatrix eigenspace;  // orthonormal columns spanning the optimal eigenspace
  DensityMatrix representative;
  Index degeneracy = 0;
  Sense sense = Sense::maximize;
};

namespace detail {

inline void check_dims(const BipartiteHamiltonian& h, const DensityMatrix& rho_a, const Observable& o_a) {
  if (rho_a.dim() != h.dim_a() || o_a.dim() != h.dim_a()) {
    throw DimensionError("system A has dimension " + std::to_string(h.dim_a()) + " but rho_A is " +
                         std::to_string(rho_a.dim()) + "-dimensional and O_A " +
                         std::to_string(o_a.dim()) + "-dimensional");
  }
}

inline double real_part_checked(Complex z, const char* what) {
  if (std::abs(z.imag()) > kImaginaryResidueTol) {
    std::ostringstream os;
    os << what << ": imaginary residue " << z.imag() << " indicates a non-Hermitian input";
    throw ValidationError(os.str());
  }
  return z.real();
}

}  // namespace detail

/// Direct evaluation of J for a product initial state rho_A (x) rho_B.
inline double evaluate_jq(const BipartiteHamiltonian& h, const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                          const Observable& o_a, double t, double hbar = 1.0) {
  detail::check_dims(h, rho_a, o_a);
  if (rho_b.dim() != h.dim_b()) {
    throw DimensionError("system B has dimension " + std::to_string(h.dim_b()) + " but rho_B is " +
                         std::to_string(rho_b.dim()) + "-dimensional");
  }
  const ComplexMatrix u = h.propagator(t, hbar);
  const ComplexMatrix evolved = u * kron(rho_a.matrix(), rho_b.matrix()) * u.adjoint();
  const ComplexMatrix reduced = partial_trace(evolved, h.dim_a(), h.dim_b(), Subsystem::B);
  return detail::real_part_checked((reduced * o_a.matrix()).trace(), "evaluate_jq");
}

inline LandscapeObservable landscape_observable(const BipartiteHamiltonian& h, const DensityMatrix& rho_a,
                                                const Observable& o_a, double t, double hbar = 1.0) {
  detail::check_dims(h, rho_a, o_a);
  const Index db = h.dim_b();
  const ComplexMatrix u = h.propagator(t, hbar);
  const ComplexMatrix heisenberg = u.adjoint() * kron(o_a.matrix(), identity(db)) * u;
  const ComplexMatrix raw =
      partial_trace(heisenberg * kron(rho_a.matrix(), identity(db)), h.dim_a(), db, Subsystem::A);
  const double asym = hermitian_deviation(raw);
  if (asym > kObservableAsymmetryTol) {
    std::ostringstream os;
    os << "landscape_observable: O_B asymmetry " << asym << " exceeds " << kObservableAsymmetryTol;
    throw ValidationError(os.str());
  }
  ComplexMatrix ob = symmetrize(raw);
  HermitianEig eig = eigh(ob);
  return LandscapeObservable{std::move(ob), std::move(eig), t, asym, h, rho_a, o_a};
}

/// J[rho_B] = Tr(rho_B O_B).
inline double expectation(const LandscapeObservable& ob, const DensityMatrix& rho_b) {
  if (rho_b.dim() != ob.matrix.rows()) throw DimensionError("expectation: rho_B dimension mismatch");
  return detail::real_part_checked((rho_b.matrix() * ob.matrix).trace(), "expectation");
}

inline JqBounds jq_bounds(const LandscapeObservable& ob) {
  const auto& ev = ob.eig.eigenvalues;
  return {ev(0), ev(ev.size() - 1)};
}

/// Extremal eigenspace of O_B. Eigenvalues within
/// degeneracy_tol * max(1, |lambda*|) of the extreme count as degenerate;
/// columns are ordered from the extreme inward and the first one is
/// returned as the pure representative.
inline OptimalSolution optimal_state(const LandscapeObservable& ob, Sense sense,
                                     double degeneracy_tol = kDefaultDegeneracyTol) {
  if (!(degeneracy_tol > 0.0)) throw ValidationError("optimal_state: degeneracy_tol must be positive");
  const auto& ev = ob.eig.eigenvalues;
  const auto& vecs = ob.eig.eigenvectors;
  const Index n = ev.size();
  const bool maximize = sense == Sense::maximize;
  const double best = maximize ? ev(n - 1) : ev(0);
  const double window = degeneracy_tol * std::max(1.0, std::abs(best));

  Index count = 0;
  while (count < n) {
    const Index idx = maximize ? n - 1 - count : count;
    if (std::abs(ev(idx) - best) > window) break;
    ++count;
  }
  ComplexMatrix space(n, count);
  for (Index c = 0; c < count; ++c) space.col(c) = vecs.col(maximize ? n - 1 - c : c);

  return OptimalSolution{best, space, DensityMatrix::pure(space.col(0)), count, sense};
}

}  // namespace qqland
