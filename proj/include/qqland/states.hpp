#pragma once

#include <span>
#include <sstream>
#include <string>
#include <utility>

#include "qqland/qmat.hpp"

namespace qqland {

inline constexpr double kTraceTol = 1e-9;
inline constexpr double kPositivityTol = 1e-9;

/// Hermitian operator on a single subsystem, e.g. the measured O_A.
class Observable {
 public:
  explicit Observable(const ComplexMatrix& m, const std::string& name = "observable")
      : matrix_(checked_hermitian(m, name)) {}

  /// |k><k| in a dim-dimensional space.
  static Observable projector(Index dim, Index k) {
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    m(k, k) = 1.0;
    return Observable(m);
  }

  Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  ComplexMatrix matrix_;
};

/// Hermitian, positive semidefinite, unit-trace operator.
class DensityMatrix {
 public:
  explicit DensityMatrix(const ComplexMatrix& m, const std::string& name = "density matrix") {
    ComplexMatrix h = checked_hermitian(m, name);
    const double tr = h.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol) {
      std::ostringstream os;
      os << name << ": trace is " << tr << ", expected 1";
      throw ValidationError(os.str());
    }
    const double min_eig = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(h, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    if (min_eig < -kPositivityTol) {
      std::ostringstream os;
      os << name << ": not positive semidefinite (min eigenvalue " << min_eig << ")";
      throw ValidationError(os.str());
    }
    matrix_ = std::move(h);
  }

  /// |psi><psi| / <psi|psi>.
  static DensityMatrix pure(const ComplexVector& psi) {
    const double norm2 = psi.squaredNorm();
    if (!(norm2 > 0.0)) throw ValidationError("pure state: zero vector");
    return DensityMatrix(psi * psi.adjoint() / norm2);
  }

  static DensityMatrix basis(Index dim, Index k) {
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    m(k, k) = 1.0;
    return DensityMatrix(m);
  }

  static DensityMatrix maximally_mixed(Index dim) {
    return DensityMatrix(identity(dim) / static_cast<double>(dim));
  }

  Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  ComplexMatrix matrix_;
};

/// Sum_k weights[k] * states[k]. Weights must be nonnegative and sum to one
/// within 1e-12.
inline DensityMatrix mix_states(std::span<const DensityMatrix> states, std::span<const double> weights) {
  if (states.empty() || states.size() != weights.size()) {
    throw DimensionError("mix_states: need one weight per state and at least one state");
  }
  const Index dim = states.front().dim();
  double total = 0.0;
  ComplexMatrix acc = ComplexMatrix::Zero(dim, dim);
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].dim() != dim) throw DimensionError("mix_states: states differ in dimension");
    if (!(weights[k] >= 0.0)) throw ValidationError("mix_states: negative weight");
    total += weights[k];
    acc += weights[k] * states[k].matrix();
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "mix_states: weights sum to " << total << ", expected 1";
    throw ValidationError(os.str());
  }
  return DensityMatrix(acc, "mixture");
}

}  // namespace qqland
