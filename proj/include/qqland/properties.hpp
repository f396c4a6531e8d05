#pragma once

// Randomized invariant checks over one landscape instance. Used by the
// `verify` task; every check is deterministic for a fixed seed.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "qqland/jcmodel.hpp"
#include "qqland/landscape.hpp"
#include "qqland/random.hpp"

namespace qqland {

struct PropertyResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest observed violation measure
  double threshold = 0.0;  // pass iff worst <= threshold
};

struct LandscapeInstance {
  BipartiteHamiltonian hamiltonian;
  DensityMatrix rho_a;
  Observable o_a;
  double duration = 0.0;
};

namespace detail {

inline PropertyResult make_result(std::string name, double worst, double threshold) {
  return {std::move(name), worst <= threshold, worst, threshold};
}

/// Convex combination of two states chosen so the mixture has objective
/// `target`, given J[a] and J[b] bracketing it.
inline DensityMatrix mix_to_level(const DensityMatrix& a, double ja, const DensityMatrix& b, double jb,
                                  double target) {
  const double w = ja == jb ? 1.0 : std::clamp((target - jb) / (ja - jb), 0.0, 1.0);
  const std::vector<DensityMatrix> s{a, b};
  const std::vector<double> ws{w, 1.0 - w};
  return mix_states(s, ws);
}

}  // namespace detail

/// J[lambda r1 + (1 - lambda) r2] against lambda J[r1] + (1 - lambda) J[r2].
inline PropertyResult check_linearity(const LandscapeInstance& inst, Rng& rng, int trials = 20) {
  const Index db = inst.hamiltonian.dim_b();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const DensityMatrix r1 = random_density(db, rng);
    const DensityMatrix r2 = random_density(db, rng);
    const double lambda = unit(rng);
    const std::vector<DensityMatrix> s{r1, r2};
    const std::vector<double> w{lambda, 1.0 - lambda};
    const auto j = [&](const DensityMatrix& r) {
      return evaluate_jq(inst.hamiltonian, inst.rho_a, r, inst.o_a, inst.duration);
    };
    worst = std::max(worst, std::abs(j(mix_states(s, w)) - (lambda * j(r1) + (1.0 - lambda) * j(r2))));
  }
  return detail::make_result("linearity", worst, 1e-12);
}

/// Two states on a common level set; every convex combination stays on it.
inline PropertyResult check_level_set(const LandscapeInstance& inst, Rng& rng, int trials = 10) {
  const Index db = inst.hamiltonian.dim_b();
  const LandscapeObservable ob = landscape_observable(inst.hamiltonian, inst.rho_a, inst.o_a, inst.duration);
  const OptimalSolution hi = optimal_state(ob, Sense::maximize);
  const OptimalSolution lo = optimal_state(ob, Sense::minimize);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const double level = lo.objective + unit(rng) * (hi.objective - lo.objective);
    DensityMatrix pair[2] = {random_density(db, rng), random_density(db, rng)};
    for (auto& r : pair) {
      const double jr = expectation(ob, r);
      r = jr >= level ? detail::mix_to_level(r, jr, lo.representative, lo.objective, level)
                      : detail::mix_to_level(r, jr, hi.representative, hi.objective, level);
    }
    const double j1 = evaluate_jq(inst.hamiltonian, inst.rho_a, pair[0], inst.o_a, inst.duration);
    const double j2 = evaluate_jq(inst.hamiltonian, inst.rho_a, pair[1], inst.o_a, inst.duration);
    if (std::abs(j1 - j2) > 1e-12) continue;  // the premise of the property does not hold
    for (double lambda : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      const std::vector<DensityMatrix> s{pair[0], pair[1]};
      const std::vector<double> w{lambda, 1.0 - lambda};
      const double jm = evaluate_jq(inst.hamiltonian, inst.rho_a, mix_states(s, w), inst.o_a, inst.duration);
      worst = std::max(worst, std::abs(jm - j1));
    }
  }
  return detail::make_result("level_set_closure", worst, 1e-12);
}

/// Tr(rho_B O_B) against direct evaluation of the joint dynamics.
inline PropertyResult check_observable_consistency(const LandscapeInstance& inst, Rng& rng, int trials = 20) {
  const LandscapeObservable ob = landscape_observable(inst.hamiltonian, inst.rho_a, inst.o_a, inst.duration);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const DensityMatrix r = random_density(inst.hamiltonian.dim_b(), rng);
    worst = std::max(worst, std::abs(expectation(ob, r) -
                                     evaluate_jq(inst.hamiltonian, inst.rho_a, r, inst.o_a, inst.duration)));
  }
  return detail::make_result("observable_consistency", worst, 1e-11);
}

/// The eigen-solution is never beaten by a sampled state, in either sense,
/// and evaluates to the extreme eigenvalue.
inline std::vector<PropertyResult> check_global_optimality(const LandscapeInstance& inst, Rng& rng,
                                                           int samples = 1000) {
  const LandscapeObservable ob = landscape_observable(inst.hamiltonian, inst.rho_a, inst.o_a, inst.duration);
  const OptimalSolution hi = optimal_state(ob, Sense::maximize);
  const OptimalSolution lo = optimal_state(ob, Sense::minimize);
  const auto j = [&](const DensityMatrix& r) {
    return evaluate_jq(inst.hamiltonian, inst.rho_a, r, inst.o_a, inst.duration);
  };
  const double j_hi = j(hi.representative);
  const double j_lo = j(lo.representative);
  const JqBounds b = jq_bounds(ob);
  double beat_max = 0.0;
  double beat_min = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double v = expectation(ob, random_density(inst.hamiltonian.dim_b(), rng));
    beat_max = std::max(beat_max, v - j_hi);
    beat_min = std::max(beat_min, j_lo - v);
  }
  return {detail::make_result("global_maximum", beat_max, 1e-10),
          detail::make_result("global_minimum", beat_min, 1e-10),
          detail::make_result("optimum_matches_spectrum",
                              std::max(std::abs(j_hi - b.max), std::abs(j_lo - b.min)), 1e-10)};
}

/// lambda_min(O_B) <= J <= lambda_max(O_B) on sampled states, and the
/// spectrum of O_B inside that of O_A.
inline std::vector<PropertyResult> check_spectral_containment(const LandscapeInstance& inst, Rng& rng,
                                                              int samples = 1000) {
  const LandscapeObservable ob = landscape_observable(inst.hamiltonian, inst.rho_a, inst.o_a, inst.duration);
  const JqBounds b = jq_bounds(ob);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double v = expectation(ob, random_density(inst.hamiltonian.dim_b(), rng));
    worst = std::max({worst, b.min - v, v - b.max});
  }
  const RealVector oa = eigh(inst.o_a.matrix()).eigenvalues;
  const double spill = std::max({0.0, oa(0) - b.min, b.max - oa(oa.size() - 1)});
  return {detail::make_result("spectral_containment", worst, 1e-10),
          detail::make_result("observable_spectrum_within_o_a", spill, 1e-8)};
}

/// With no couplings B cannot act on A: O_B = Tr(rho_A O_A(T)) I_B.
inline PropertyResult check_zero_coupling(const LandscapeInstance& inst) {
  const LandscapeObservable ob = landscape_observable(inst.hamiltonian, inst.rho_a, inst.o_a, inst.duration);
  const double value = ob.matrix.trace().real() / static_cast<double>(ob.matrix.rows());
  double worst = (ob.matrix - value * identity(ob.matrix.rows())).cwiseAbs().maxCoeff();
  const OptimalSolution s = optimal_state(ob, Sense::maximize);
  if (s.degeneracy != inst.hamiltonian.dim_b()) worst = std::max(worst, 1.0);
  return detail::make_result("zero_coupling_degeneracy", worst, 1e-10);
}

inline PropertyResult check_jc_closed_form(const jc::JCParams& p, Rng& rng, int samples = 20) {
  std::uniform_real_distribution<double> times(0.0, 100.0);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) worst = std::max(worst, jc::verify_against_numeric(p, times(rng)));
  return detail::make_result("jc_closed_form_agreement", worst, 1e-8);
}

inline std::vector<PropertyResult> verify_landscape(const LandscapeInstance& inst, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PropertyResult> out;
  out.push_back(check_linearity(inst, rng));
  out.push_back(check_level_set(inst, rng));
  out.push_back(check_observable_consistency(inst, rng));
  for (auto& r : check_global_optimality(inst, rng)) out.push_back(std::move(r));
  for (auto& r : check_spectral_containment(inst, rng)) out.push_back(std::move(r));
  if (inst.hamiltonian.couplings().empty()) out.push_back(check_zero_coupling(inst));
  return out;
}

}  // namespace qqland
