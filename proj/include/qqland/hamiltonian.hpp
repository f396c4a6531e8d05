#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "qqland/qmat.hpp"

namespace qqland {

/// One interaction term H_A^k (x) H_B^k.
struct CouplingTerm {
  ComplexMatrix on_a;
  ComplexMatrix on_b;
};

/// H_A^0 (x) I_B + I_A (x) H_B^0 + sum_k H_A^k (x) H_B^k, with A the outer
/// tensor factor.
inline ComplexMatrix assemble(const ComplexMatrix& local_a, const ComplexMatrix& local_b,
                              const std::vector<CouplingTerm>& couplings) {
  const Index da = local_a.rows();
  const Index db = local_b.rows();
  if (local_a.cols() != da || local_b.cols() != db) {
    throw DimensionError("assemble: uncoupled Hamiltonians must be square");
  }
  ComplexMatrix h = kron(local_a, identity(db)) + kron(identity(da), local_b);
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    const auto& c = couplings[k];
    if (c.on_a.rows() != da || c.on_a.cols() != da || c.on_b.rows() != db || c.on_b.cols() != db) {
      throw DimensionError("assemble: coupling term " + std::to_string(k) + " has shape " +
                           detail::shape(c.on_a) + " (x) " + detail::shape(c.on_b) + ", expected " +
                           std::to_string(da) + "x" + std::to_string(da) + " (x) " +
                           std::to_string(db) + "x" + std::to_string(db));
    }
    h += kron(c.on_a, c.on_b);
  }
  return h;
}

/// Time-independent Hamiltonian of a closed A/B composite.
///
/// Every block is validated Hermitian and stored symmetrized. The assembled
/// matrix is built eagerly; its eigendecomposition is computed on first use
/// and shared by all copies, so one decomposition serves every duration.
/// Concurrent first use is safe.
class BipartiteHamiltonian {
 public:
  BipartiteHamiltonian(const ComplexMatrix& local_a, const ComplexMatrix& local_b,
                       std::vector<CouplingTerm> couplings = {})
      : local_a_(checked_hermitian(local_a, "h_a0")),
        local_b_(checked_hermitian(local_b, "h_b0")),
        couplings_(std::move(couplings)),
        cache_(std::make_shared<Cache>()) {
    for (std::size_t k = 0; k < couplings_.size(); ++k) {
      const std::string tag = "couplings[" + std::to_string(k) + "]";
      couplings_[k].on_a = checked_hermitian(couplings_[k].on_a, tag + ".h_a");
      couplings_[k].on_b = checked_hermitian(couplings_[k].on_b, tag + ".h_b");
    }
    matrix_ = assemble(local_a_, local_b_, couplings_);
  }

  Index dim_a() const { return local_a_.rows(); }
  Index dim_b() const { return local_b_.rows(); }
  Index dim() const { return matrix_.rows(); }

  const ComplexMatrix& local_a() const { return local_a_; }
  const ComplexMatrix& local_b() const { return local_b_; }
  const std::vector<CouplingTerm>& couplings() const { return couplings_; }

  const ComplexMatrix& matrix() const { return matrix_; }

  const HermitianEig& spectrum() const {
    std::call_once(cache_->once, [this] { cache_->eig = eigh(matrix_); });
    return cache_->eig;
  }

  ComplexMatrix propagator(double t, double hbar = 1.0) const {
    return qqland::propagator(spectrum(), t, hbar);
  }

 private:
  struct Cache {
    std::once_flag once;
    HermitianEig eig;
  };

  ComplexMatrix local_a_;
  ComplexMatrix local_b_;
  std::vector<CouplingTerm> couplings_;
  ComplexMatrix matrix_;
  std::shared_ptr<Cache> cache_;
};

inline ComplexMatrix assemble(const BipartiteHamiltonian& h) { return h.matrix(); }

}  // namespace qqland
