#pragma once

// Optimization over correlated initial states with a fixed A marginal:
//
//   max/min Tr[U rho U^dagger (O_A (x) I_B)]  s.t.  Tr_B(rho) = rho_A, rho >= 0.
//
// The objective is linear with constant gradient G = U^dagger (O_A (x) I_B) U,
// so projected gradient steps rho <- P(rho +/- step G) climb monotonically,
// where P is the Frobenius projection onto the feasible spectrahedron,
// computed by Dykstra's alternating projections between the marginal affine
// set and the PSD cone.
//
// Any feasible rho is supported on range(rho_A) (x) H_B, so the projection is
// carried out in that subspace. There the reduced marginal is positive
// definite, the intersection has interior points and Dykstra converges
// linearly even for pure or rank-deficient rho_A.

#include <algorithm>
#include <sstream>
#include <utility>
#include <vector>

#include "qqland/landscape.hpp"

namespace qqland {

/// Eigenvalues above -kPsdClipTol are treated as zero, not as violations.
inline constexpr double kPsdClipTol = 1e-12;
/// Eigenvalues of rho_A at or below this are treated as an exact kernel.
inline constexpr double kMarginalRankTol = 1e-10;

struct EntangledProblem {
  BipartiteHamiltonian hamiltonian;
  DensityMatrix rho_a;
  Observable o_a;
  double duration = 0.0;
  Sense sense = Sense::maximize;
  double hbar = 1.0;
};

struct ProjectionResult {
  ComplexMatrix matrix;
  int iterations = 0;
  double marginal_residual = 0.0;  // ||Tr_B(matrix) - rho_A||_F
  double min_eigenvalue = 0.0;
  bool converged = false;
};

/// Dykstra correction terms in the reduced space. Passing the terms left by
/// a previous projection warm-starts the next one; an empty state is a cold
/// start.
struct DykstraState {
  ComplexMatrix marginal_corr;
  ComplexMatrix cone_corr;
};

struct SolverOptions {
  double step = 0.0;  // <= 0 selects 1 / ||G||_2
  int max_iters = 100000;
  double tol = 1e-8;
  int projection_max_iters = 10000;
  double projection_tol = 1e-12;
};

struct SolverReport {
  double objective = 0.0;
  DensityMatrix state;
  int iterations = 0;
  double constraint_residual = 0.0;
  double min_eigenvalue = 0.0;
  double step = 0.0;
  bool converged = false;
  std::vector<double> objective_history;
};

/// U^dagger (O_A (x) I_B) U; J[rho] = Tr(rho G) for every joint state rho.
inline ComplexMatrix gradient_operator(const EntangledProblem& p) {
  detail::check_dims(p.hamiltonian, p.rho_a, p.o_a);
  const ComplexMatrix u = p.hamiltonian.propagator(p.duration, p.hbar);
  return symmetrize(u.adjoint() * kron(p.o_a.matrix(), identity(p.hamiltonian.dim_b())) * u);
}

/// Frobenius-nearest Hermitian matrix with Tr_B = target:
/// rho + ((target - Tr_B rho) / dimB) (x) I_B.
inline ComplexMatrix project_marginal(const ComplexMatrix& rho, const ComplexMatrix& target, Index dimA,
                                      Index dimB) {
  if (target.rows() != dimA || target.cols() != dimA) {
    throw DimensionError("project_marginal: target marginal must be " + std::to_string(dimA) + "x" +
                         std::to_string(dimA));
  }
  const ComplexMatrix gap = target - partial_trace(rho, dimA, dimB, Subsystem::B);
  return rho + kron(gap / static_cast<double>(dimB), identity(dimB));
}

inline ComplexMatrix project_marginal(const ComplexMatrix& rho, const DensityMatrix& rho_a, Index dimA,
                                      Index dimB) {
  return project_marginal(rho, rho_a.matrix(), dimA, dimB);
}

/// Frobenius-nearest PSD matrix: negative eigenvalues clipped to zero.
inline ComplexMatrix project_psd(const ComplexMatrix& rho) {
  return spectral_apply(eigh(rho), [](double e) { return std::max(e, 0.0); });
}

inline double min_eigenvalue(const ComplexMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<ComplexMatrix>(symmetrize(m), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

/// Projection onto {rho : Tr_B rho = rho_A, rho >= 0}. Built once per
/// marginal; project() may then be called repeatedly and concurrently.
class SpectrahedronProjector {
 public:
  SpectrahedronProjector(const DensityMatrix& rho_a, Index dimB) : rho_a_(rho_a.matrix()), dim_b_(dimB) {
    if (dimB < 1) throw DimensionError("SpectrahedronProjector: dimB must be >= 1");
    const HermitianEig eig = eigh(rho_a_);
    std::vector<Index> keep;
    for (Index k = 0; k < eig.eigenvalues.size(); ++k) {
      if (eig.eigenvalues(k) > kMarginalRankTol) keep.push_back(k);
    }
    const Index rank = static_cast<Index>(keep.size());
    ComplexMatrix support(rho_a_.rows(), rank);
    reduced_target_ = ComplexMatrix::Zero(rank, rank);
    for (Index c = 0; c < rank; ++c) {
      support.col(c) = eig.eigenvectors.col(keep[c]);
      reduced_target_(c, c) = eig.eigenvalues(keep[c]);
    }
    embed_ = kron(support, identity(dimB));
  }

  Index dim_a() const { return rho_a_.rows(); }
  Index dim_b() const { return dim_b_; }
  Index support_rank() const { return reduced_target_.rows(); }

  ProjectionResult project(const ComplexMatrix& rho, int max_iters, double tol,
                           DykstraState* warm = nullptr) const {
    const Index n = dim_a() * dim_b_;
    if (rho.rows() != n || rho.cols() != n) {
      throw DimensionError("dykstra_project: expected a " + std::to_string(n) + "x" + std::to_string(n) +
                           " matrix, got " + detail::shape(rho));
    }
    const Index ra = support_rank();
    const ComplexMatrix start = embed_.adjoint() * symmetrize(rho) * embed_;

    const Index m = start.rows();
    ComplexMatrix marginal_corr = ComplexMatrix::Zero(m, m);
    ComplexMatrix cone_corr = ComplexMatrix::Zero(m, m);
    if (warm != nullptr && warm->marginal_corr.rows() == m && warm->cone_corr.rows() == m) {
      marginal_corr = warm->marginal_corr;
      cone_corr = warm->cone_corr;
    }
    // start = x + marginal_corr + cone_corr holds at every iteration.
    ComplexMatrix x = start - marginal_corr - cone_corr;
    ProjectionResult out;
    double reduced_residual = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
      const ComplexMatrix shifted = x + marginal_corr;
      const ComplexMatrix y = project_marginal(shifted, reduced_target_, ra, dim_b_);
      marginal_corr = shifted - y;
      const ComplexMatrix z = y + cone_corr;
      ComplexMatrix next = project_psd(z);
      cone_corr = z - next;

      const double change = (next - x).norm();
      x = std::move(next);
      reduced_residual = (partial_trace(x, ra, dim_b_, Subsystem::B) - reduced_target_).norm();
      out.iterations = it;
      if (reduced_residual <= tol && change <= tol) {
        out.converged = true;
        break;
      }
    }
    if (warm != nullptr) *warm = DykstraState{marginal_corr, cone_corr};
    out.matrix = symmetrize(embed_ * x * embed_.adjoint());
    out.marginal_residual = (partial_trace(out.matrix, dim_a(), dim_b_, Subsystem::B) - rho_a_).norm();
    out.min_eigenvalue = min_eigenvalue(out.matrix);
    return out;
  }

 private:
  ComplexMatrix rho_a_;
  Index dim_b_;
  ComplexMatrix reduced_target_;
  ComplexMatrix embed_;  // range(rho_A) (x) H_B -> H_A (x) H_B, orthonormal columns
};

/// Dykstra projection onto the feasible set; throws ConvergenceError with
/// the residuals when max_iters is exhausted.
inline ComplexMatrix dykstra_project(const ComplexMatrix& rho, const DensityMatrix& rho_a, Index dimA, Index dimB,
                                     int max_iters = 100000, double tol = 1e-12) {
  if (rho_a.dim() != dimA) throw DimensionError("dykstra_project: rho_A dimension mismatch");
  const ProjectionResult r = SpectrahedronProjector(rho_a, dimB).project(rho, max_iters, tol);
  if (!r.converged) {
    std::ostringstream os;
    os << "dykstra_project: no convergence after " << r.iterations << " iterations (marginal residual "
       << r.marginal_residual << ", min eigenvalue " << r.min_eigenvalue << ")";
    throw ConvergenceError(os.str());
  }
  return r.matrix;
}

inline SolverReport optimize_entangled(const EntangledProblem& p, const SolverOptions& opt = {}) {
  const ComplexMatrix grad = gradient_operator(p);
  const Index db = p.hamiltonian.dim_b();

  double step = opt.step;
  if (!(step > 0.0)) {
    const double norm = eigh(grad).eigenvalues.cwiseAbs().maxCoeff();
    step = norm > 0.0 ? 1.0 / norm : 1.0;
  }
  const double sign = p.sense == Sense::maximize ? 1.0 : -1.0;
  const SpectrahedronProjector projector(p.rho_a, db);

  ComplexMatrix rho = kron(p.rho_a.matrix(), identity(db) / static_cast<double>(db));
  double objective = frobenius_dot(rho, grad);
  ProjectionResult last;
  last.matrix = rho;
  DykstraState duals;

  SolverReport report{objective, DensityMatrix::maximally_mixed(1), 0, 0.0, 0.0, step, false, {}};
  for (int it = 1; it <= opt.max_iters; ++it) {
    last = projector.project(rho + (sign * step) * grad, opt.projection_max_iters, opt.projection_tol, &duals);
    rho = last.matrix;
    const double next = frobenius_dot(rho, grad);
    report.objective_history.push_back(next);
    report.iterations = it;
    const double change = std::abs(next - objective);
    objective = next;
    if (change <= opt.tol && last.marginal_residual <= opt.tol) {
      report.converged = true;
      break;
    }
  }
  report.objective = objective;
  report.constraint_residual = last.marginal_residual;
  report.min_eigenvalue = min_eigenvalue(rho);
  if (report.min_eigenvalue < -opt.tol || report.constraint_residual > opt.tol) report.converged = false;
  report.state = DensityMatrix(rho, "entangled solver state");
  return report;
}

}  // namespace qqland
