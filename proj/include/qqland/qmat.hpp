#pragma once

// Dense complex kernels: Kronecker products, partial traces, Hermitian
// eigendecomposition and spectral propagators.
//
// Tensor ordering is A (x) B throughout: in kron(a, b) the first factor is
// the slow/outer index, so basis state |i, k> sits at row i * dim(b) + k.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>

#include "qqland/error.hpp"

namespace qqland {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Max-abs deviation from Hermiticity accepted before a matrix is symmetrized.
inline constexpr double kHermitianTol = 1e-9;

enum class Subsystem { A, B };

struct HermitianEig {
  RealVector eigenvalues;     // ascending
  ComplexMatrix eigenvectors; // columns, same order as eigenvalues
};

namespace detail {

inline Index checked_product(Index x, Index y) {
  if (x != 0 && y > std::numeric_limits<Index>::max() / x) {
    throw DimensionError("kron: product dimension overflows");
  }
  return x * y;
}

inline std::string shape(const ComplexMatrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace detail

inline bool all_finite(const ComplexMatrix& m) {
  return m.real().allFinite() && m.imag().allFinite();
}

/// max |m - m^dagger| entrywise; +inf for non-square input.
inline double hermitian_deviation(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline ComplexMatrix symmetrize(const ComplexMatrix& m) {
  return (m + m.adjoint()) * 0.5;
}

/// Validates a non-empty square, finite, Hermitian-within-tolerance matrix
/// and returns it symmetrized. `name` prefixes the diagnostics.
inline ComplexMatrix checked_hermitian(const ComplexMatrix& m, const std::string& name) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw DimensionError(name + ": expected a non-empty square matrix, got " + detail::shape(m));
  }
  if (!all_finite(m)) throw ValidationError(name + ": non-finite entries");
  const double dev = hermitian_deviation(m);
  if (dev > kHermitianTol) {
    std::ostringstream os;
    os << name << ": not Hermitian (max |m - m^dagger| = " << dev << ")";
    throw ValidationError(os.str());
  }
  return symmetrize(m);
}

inline ComplexMatrix identity(Index n) { return ComplexMatrix::Identity(n, n); }

inline Complex trace(const ComplexMatrix& m) { return m.trace(); }

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Index rows = detail::checked_product(a.rows(), b.rows());
  const Index cols = detail::checked_product(a.cols(), b.cols());
  ComplexMatrix out(rows, cols);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Traces out `which`. Tracing A leaves a dimB x dimB operator, tracing B a
/// dimA x dimA one.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, Index dimA, Index dimB, Subsystem which) {
  if (dimA <= 0 || dimB <= 0 || m.rows() != m.cols() || m.rows() != dimA * dimB) {
    throw DimensionError("partial_trace: expected a square " + std::to_string(dimA * dimB) +
                         "-dimensional matrix, got " + detail::shape(m));
  }
  if (which == Subsystem::A) {
    ComplexMatrix out = ComplexMatrix::Zero(dimB, dimB);
    for (Index a = 0; a < dimA; ++a) out += m.block(a * dimB, a * dimB, dimB, dimB);
    return out;
  }
  ComplexMatrix out(dimA, dimA);
  for (Index i = 0; i < dimA; ++i) {
    for (Index j = 0; j < dimA; ++j) {
      out(i, j) = m.block(i * dimB, j * dimB, dimB, dimB).trace();
    }
  }
  return out;
}

/// Hermitian eigendecomposition with ascending eigenvalues. Inputs within
/// `tol` (max-abs of m - m^dagger) are symmetrized first.
inline HermitianEig eigh(const ComplexMatrix& m, double tol = kHermitianTol) {
  if (m.rows() != m.cols()) {
    throw DimensionError("eigh: matrix is not square (" + detail::shape(m) + ")");
  }
  if (!all_finite(m)) throw ValidationError("eigh: matrix has non-finite entries");
  const double dev = hermitian_deviation(m);
  if (dev > tol) {
    std::ostringstream os;
    os << "eigh: matrix is not Hermitian (max |m - m^dagger| = " << dev << ")";
    throw ValidationError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(symmetrize(m));
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("eigh: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// V f(Lambda) V^dagger for a real-valued spectral function f.
template <typename F>
ComplexMatrix spectral_apply(const HermitianEig& eig, F&& f) {
  const Index n = eig.eigenvalues.size();
  ComplexVector d(n);
  for (Index k = 0; k < n; ++k) d(k) = f(eig.eigenvalues(k));
  return eig.eigenvectors * d.asDiagonal() * eig.eigenvectors.adjoint();
}

/// exp(-i H t / hbar) from a precomputed decomposition of H.
inline ComplexMatrix propagator(const HermitianEig& eig, double t, double hbar = 1.0) {
  if (!std::isfinite(t) || !std::isfinite(hbar) || hbar == 0.0) {
    throw ValidationError("propagator: duration and hbar must be finite, hbar nonzero");
  }
  return spectral_apply(eig, [&](double e) { return std::polar(1.0, -e * t / hbar); });
}

inline ComplexMatrix propagator(const ComplexMatrix& h, double t, double hbar = 1.0) {
  return propagator(eigh(h), t, hbar);
}

/// Re Tr(a^dagger b).
inline double frobenius_dot(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a.conjugate().cwiseProduct(b).sum().real();
}

}  // namespace qqland
