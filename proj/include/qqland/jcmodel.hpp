#pragma once

// Jaynes-Cummings case study: a two-level atom (A, basis |g>, |e>) driven by
// the initial state of a single field mode truncated to levels |0>..|nB-1>
// (B), in the rotating-wave approximation with hbar = 1:
//
//   H = (omega/2) sigma_z + nu a^dagger a + (Omega/2)(sigma_+ a + sigma_- a^dagger).
//
// For rho_A = |g><g| and O_A = |e><e| the landscape observable is diagonal in
// the number basis: <0|O_B|0> = 0 and, for n >= 1,
//
//   <n|O_B|n> = Omega^2 n / (Delta^2 + Omega^2 n) * sin^2[(T/2) sqrt(Delta^2 + Omega^2 n)],
//
// with Delta = nu - omega. |g,n> only mixes with |e,n-1>, so truncating the
// field loses nothing for this configuration.

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "qqland/landscape.hpp"

namespace qqland::jc {

inline constexpr Index kGround = 0;
inline constexpr Index kExcited = 1;

struct JCParams {
  double omega = 1.0;     // atomic frequency
  double nu = 1.0;        // field frequency
  double coupling = 0.2;  // Omega
  Index levels = 4;       // nB

  double detuning() const { return nu - omega; }

  void validate() const {
    if (levels < 1) throw ValidationError("jc: levels must be >= 1");
    if (!std::isfinite(omega) || !std::isfinite(nu) || !std::isfinite(coupling)) {
      throw ValidationError("jc: omega, nu and coupling must be finite");
    }
  }

  static JCParams with_detuning(double delta, Index levels, double coupling = 0.2, double omega = 1.0) {
    return {omega, omega + delta, coupling, levels};
  }
};

struct SweepResult {
  std::vector<double> times;
  std::vector<double> j_max;
  std::vector<double> j_min;
  std::vector<Index> argmax_level;
  JCParams params;
  double max_spot_check_deviation = 0.0;
};

/// Numeric spot-check runs at every grid index divisible by this.
inline constexpr std::size_t kSpotCheckStride = 50;
inline constexpr double kSpotCheckTol = 1e-8;

// Atomic operators in the (|g>, |e>) basis.
inline ComplexMatrix sigma_z() { return ComplexMatrix{{-1.0, 0.0}, {0.0, 1.0}}; }
inline ComplexMatrix sigma_plus() { return ComplexMatrix{{0.0, 0.0}, {1.0, 0.0}}; }  // |e><g|
inline ComplexMatrix sigma_x() { return sigma_plus() + sigma_plus().adjoint(); }
/// -i (sigma_+ - sigma_-), so sigma_+ = (sigma_x + i sigma_y) / 2.
inline ComplexMatrix sigma_y() {
  const Complex i(0.0, 1.0);
  return -i * (sigma_plus() - sigma_plus().adjoint());
}

inline ComplexMatrix annihilation(Index levels) {
  ComplexMatrix a = ComplexMatrix::Zero(levels, levels);
  for (Index n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline ComplexMatrix number_operator(Index levels) {
  ComplexMatrix m = ComplexMatrix::Zero(levels, levels);
  for (Index n = 0; n < levels; ++n) m(n, n) = static_cast<double>(n);
  return m;
}

/// The RWA coupling sigma_+ a + sigma_- a^dagger is split into Hermitian
/// products sigma_x (x) x + sigma_y (x) y with x = (a + a^dagger)/2 and
/// y = i (a - a^dagger)/2.
inline BipartiteHamiltonian build_jc(const JCParams& p) {
  p.validate();
  const Complex i(0.0, 1.0);
  const ComplexMatrix a = annihilation(p.levels);
  const ComplexMatrix x = (a + a.adjoint()) * 0.5;
  const ComplexMatrix y = (a - a.adjoint()) * (0.5 * i);
  const double half = 0.5 * p.coupling;
  return BipartiteHamiltonian(0.5 * p.omega * sigma_z(), p.nu * number_operator(p.levels),
                              {CouplingTerm{half * sigma_x(), x}, CouplingTerm{half * sigma_y(), y}});
}

inline DensityMatrix ground_state() { return DensityMatrix::basis(2, kGround); }
inline Observable excited_population() { return Observable::projector(2, kExcited); }

/// <n|O_B|n> for the |g> -> |e> transfer landscape.
inline double analytic_ob_diag(const JCParams& p, double t, Index n) {
  if (n < 0) throw ValidationError("analytic_ob_diag: n must be >= 0");
  const double drive = p.coupling * p.coupling * static_cast<double>(n);
  if (n == 0 || drive == 0.0) return 0.0;
  const double delta = p.detuning();
  const double rabi = std::sqrt(delta * delta + drive);
  const double s = std::sin(0.5 * t * rabi);
  return drive / (delta * delta + drive) * s * s;
}

/// Largest gap between the numerically assembled O_B and the closed form:
/// diagonal deviations and all off-diagonal magnitudes.
inline double verify_against_numeric(const JCParams& p, double t) {
  const LandscapeObservable ob = landscape_observable(build_jc(p), ground_state(), excited_population(), t);
  double dev = 0.0;
  for (Index r = 0; r < p.levels; ++r) {
    for (Index c = 0; c < p.levels; ++c) {
      const double expected = r == c ? analytic_ob_diag(p, t, r) : 0.0;
      dev = std::max(dev, std::abs(ob.matrix(r, c) - expected));
    }
  }
  return dev;
}

struct LevelExtrema {
  double max = 0.0;
  double min = 0.0;
  Index argmax = 0;  // smallest n attaining max
};

inline LevelExtrema analytic_extrema(const JCParams& p, double t) {
  LevelExtrema out{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0};
  for (Index n = 0; n < p.levels; ++n) {
    const double v = analytic_ob_diag(p, t, n);
    if (v > out.max) {
      out.max = v;
      out.argmax = n;
    }
    out.min = std::min(out.min, v);
  }
  return out;
}

inline std::vector<double> uniform_grid(double t_start, double t_end, std::size_t steps) {
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || t_start > t_end) {
    throw ValidationError("sweep: need finite t_start <= t_end");
  }
  if (steps < 1) throw ValidationError("sweep: steps must be >= 1");
  std::vector<double> grid(steps);
  if (steps == 1) {
    grid[0] = t_start;
    return grid;
  }
  const double h = (t_end - t_start) / static_cast<double>(steps - 1);
  for (std::size_t k = 0; k < steps; ++k) grid[k] = t_start + h * static_cast<double>(k);
  grid.back() = t_end;
  return grid;
}

/// Landscape bounds over a uniform grid of durations, endpoints included.
/// Values come from the closed form; every kSpotCheckStride-th point is
/// recomputed numerically and a disagreement above kSpotCheckTol throws.
inline SweepResult sweep(const JCParams& p, double t_start, double t_end, std::size_t steps) {
  p.validate();
  SweepResult out;
  out.params = p;
  out.times = uniform_grid(t_start, t_end, steps);
  out.j_max.reserve(steps);
  out.j_min.reserve(steps);
  out.argmax_level.reserve(steps);
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    const double t = out.times[k];
    const LevelExtrema e = analytic_extrema(p, t);
    out.j_max.push_back(e.max);
    out.j_min.push_back(e.min);
    out.argmax_level.push_back(e.argmax);
    if (k % kSpotCheckStride == 0) {
      const double dev = verify_against_numeric(p, t);
      out.max_spot_check_deviation = std::max(out.max_spot_check_deviation, dev);
      if (dev > kSpotCheckTol) {
        std::ostringstream os;
        os << "sweep: numeric O_B deviates from the closed form by " << dev << " at T = " << t;
        throw Error(os.str());
      }
    }
  }
  return out;
}

}  // namespace qqland::jc
