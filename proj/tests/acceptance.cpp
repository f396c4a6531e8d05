// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "qqland/entangled.hpp"
#include "qqland/io/run.hpp"
#include "qqland/jcmodel.hpp"
#include "qqland/random.hpp"

namespace {

using namespace qqland;
namespace fs = std::filesystem;

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

// Closed form of the |g> -> |e> landscape observable diagonal, written out.
double closed_form(double delta, double coupling, Index n, double t) {
  if (n == 0) return 0.0;
  const double d = coupling * coupling * static_cast<double>(n);
  const double s = std::sin(0.5 * t * std::sqrt(delta * delta + d));
  return d / (delta * delta + d) * s * s;
}

BipartiteHamiltonian random_system(Index da, Index db, Rng& rng) {
  std::vector<CouplingTerm> c;
  const int terms = 1 + static_cast<int>(rng() % 3);
  for (int k = 0; k < terms; ++k) c.push_back({random_hermitian(da, rng), random_hermitian(db, rng)});
  return BipartiteHamiltonian(random_hermitian(da, rng), random_hermitian(db, rng), c);
}

Index dim_upto(Rng& rng, Index hi) { return 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(hi)); }

struct System {
  BipartiteHamiltonian h;
  DensityMatrix rho_a;
  Observable o_a;
  double t;
};

System random_instance(Rng& rng, Index max_dim) {
  const Index da = dim_upto(rng, max_dim), db = dim_upto(rng, max_dim);
  std::uniform_real_distribution<double> dur(0.0, 5.0);
  return {random_system(da, db, rng), random_density(da, rng), Observable(random_hermitian(da, rng)), dur(rng)};
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  Rng rng(101);
  std::uniform_real_distribution<double> times(0.0, 100.0);
  double worst_diag = 0.0, worst_off = 0.0;
  for (double delta : {0.0, 0.1})
    for (Index nb : {4, 8, 16}) {
      const auto h = jc::build_jc(jc::JCParams::with_detuning(delta, nb, 0.2));
      for (int k = 0; k < 20; ++k) {
        const double t = times(rng);
        const auto ob = landscape_observable(h, jc::ground_state(), jc::excited_population(), t);
        for (Index r = 0; r < nb; ++r)
          for (Index c = 0; c < nb; ++c) {
            if (r == c) {
              worst_diag = std::max(worst_diag, std::abs(ob.matrix(r, r) - closed_form(delta, 0.2, r, t)));
            } else {
              worst_off = std::max(worst_off, std::abs(ob.matrix(r, c)));
            }
          }
      }
    }
  o.require(worst_off <= 1e-10, "off-diagonal");
  o.require(worst_diag <= 1e-8, "diagonal");
  o.detail << "max off-diagonal " << worst_off << ", max diagonal deviation " << worst_diag;
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto run = [](double delta, Index nb) {
    return jc::sweep(jc::JCParams::with_detuning(delta, nb, 0.2), 0.0, 100.0, 1001);
  };
  // (a)
  const auto on16 = run(0.0, 16);
  const double peak = *std::max_element(on16.j_max.begin(), on16.j_max.end());
  o.require(peak >= 0.99, "(a) resonant peak");
  // (b)
  const auto off16 = run(0.1, 16);
  const double top = *std::max_element(off16.j_max.begin(), off16.j_max.end());
  o.require(top <= 0.983607 + 1e-9 && top <= 0.6 / 0.61 + 1e-9, "(b) detuned cap");
  // (c), (d), (e)
  double worst_order = 0.0, worst_min = -1.0;
  int fewest_jumps = 1 << 30;
  for (double delta : {0.0, 0.1}) {
    const auto s4 = run(delta, 4), s8 = run(delta, 8), s16 = run(delta, 16);
    for (std::size_t k = 0; k < s4.times.size(); ++k) {
      worst_order = std::max({worst_order, s4.j_max[k] - s8.j_max[k], s8.j_max[k] - s16.j_max[k]});
    }
    for (const auto* s : {&s4, &s8, &s16}) {
      worst_min = std::max(worst_min, *std::max_element(s->j_min.begin(), s->j_min.end()));
      if (delta != 0.0) {
        int jumps = 0;
        for (std::size_t k = 1; k < s->argmax_level.size(); ++k) jumps += s->argmax_level[k] != s->argmax_level[k - 1];
        fewest_jumps = std::min(fewest_jumps, jumps);
      }
    }
  }
  o.require(worst_order <= 0.0, "(c) nested truncations");
  o.require(worst_min <= 1e-10, "(d) zero lower bound");
  o.require(fewest_jumps >= 1, "(e) argmax jumps");
  o.detail << "(a) peak " << peak << "; (b) max " << top << "; (c) worst decrease " << worst_order
           << "; (d) max jMin " << worst_min << "; (e) fewest jumps " << fewest_jumps;
  return o;
}

Outcome criterion3() {
  Outcome o;
  Rng rng(303);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_lin = 0.0, worst_level = 0.0;
  int level_pairs = 0;
  for (int sys = 0; sys < 100; ++sys) {
    const System s = random_instance(rng, 6);
    const Index db = s.h.dim_b();
    const auto j = [&](const DensityMatrix& r) { return evaluate_jq(s.h, s.rho_a, r, s.o_a, s.t); };
    for (int k = 0; k < 5; ++k) {
      const std::vector<DensityMatrix> pair{random_density(db, rng), random_density(db, rng)};
      const double lambda = unit(rng);
      const std::vector<double> w{lambda, 1.0 - lambda};
      worst_lin = std::max(worst_lin, std::abs(j(mix_states(pair, w)) - (lambda * j(pair[0]) + (1 - lambda) * j(pair[1]))));
    }
    // Two states on one level set: each random state is mixed with an
    // extremal eigenstate until it reaches the common level.
    const auto ob = landscape_observable(s.h, s.rho_a, s.o_a, s.t);
    const auto hi = optimal_state(ob, Sense::maximize), lo = optimal_state(ob, Sense::minimize);
    const double level = lo.objective + unit(rng) * (hi.objective - lo.objective);
    std::vector<DensityMatrix> on_level;
    for (int k = 0; k < 2; ++k) {
      const DensityMatrix r = random_density(db, rng);
      const double jr = j(r);
      const OptimalSolution& other = jr >= level ? lo : hi;
      const double denom = jr - other.objective;
      const double w = denom == 0.0 ? 1.0 : std::clamp((level - other.objective) / denom, 0.0, 1.0);
      const std::vector<DensityMatrix> mix{r, other.representative};
      on_level.push_back(mix_states(mix, std::vector<double>{w, 1.0 - w}));
    }
    const double j1 = j(on_level[0]), j2 = j(on_level[1]);
    if (std::abs(j1 - j2) > 1e-12) continue;
    ++level_pairs;
    for (double lambda : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      worst_level =
          std::max(worst_level, std::abs(j(mix_states(on_level, std::vector<double>{lambda, 1.0 - lambda})) - j1));
    }
  }
  o.require(worst_lin <= 1e-12, "linearity");
  o.require(worst_level <= 1e-12, "level-set closure");
  o.require(level_pairs >= 50, "enough level-set pairs");
  o.detail << "linearity residual " << worst_lin << ", level-set residual " << worst_level << " over " << level_pairs
           << " pairs";
  return o;
}

Outcome criterion4() {
  Outcome o;
  Rng rng(404);
  double beat_max = 0.0, beat_min = 0.0, spec_gap = 0.0;
  for (int sys = 0; sys < 100; ++sys) {
    const System s = random_instance(rng, 6);
    const Index db = s.h.dim_b();
    const auto ob = landscape_observable(s.h, s.rho_a, s.o_a, s.t);
    const auto hi = optimal_state(ob, Sense::maximize), lo = optimal_state(ob, Sense::minimize);
    const double j_hi = evaluate_jq(s.h, s.rho_a, hi.representative, s.o_a, s.t);
    const double j_lo = evaluate_jq(s.h, s.rho_a, lo.representative, s.o_a, s.t);
    const JqBounds b = jq_bounds(ob);
    spec_gap = std::max({spec_gap, std::abs(j_hi - b.max), std::abs(j_lo - b.min)});
    // Samples use the joint-state route Tr[(rho_A (x) rho_B) U^dagger (O_A (x) I) U].
    const ComplexMatrix u = s.h.propagator(s.t);
    const ComplexMatrix g = u.adjoint() * kron(s.o_a.matrix(), identity(db)) * u;
    for (int k = 0; k < 1000; ++k) {
      const double v = frobenius_dot(kron(s.rho_a.matrix(), random_density(db, rng).matrix()), g);
      beat_max = std::max(beat_max, v - j_hi);
      beat_min = std::max(beat_min, j_lo - v);
    }
  }
  o.require(beat_max <= 1e-10, "maximizer beaten");
  o.require(beat_min <= 1e-10, "minimizer beaten");
  o.require(spec_gap <= 1e-10, "optimum vs spectrum");
  o.detail << "max excess over maximizer " << beat_max << ", below minimizer " << beat_min
           << ", |J(rho*) - lambda| " << spec_gap;
  return o;
}

Outcome criterion5() {
  Outcome o;
  Rng rng(505);
  double worst = 0.0;
  int pairs = 0;
  for (int sys = 0; sys < 100; ++sys) {
    const System s = random_instance(rng, 6);
    const JqBounds b = jq_bounds(landscape_observable(s.h, s.rho_a, s.o_a, s.t));
    for (int k = 0; k < 100; ++k, ++pairs) {
      const double v = evaluate_jq(s.h, s.rho_a, random_density(s.h.dim_b(), rng), s.o_a, s.t);
      worst = std::max({worst, b.min - v, v - b.max});
    }
  }
  o.require(pairs == 10000, "pair count");
  o.require(worst <= 1e-10, "containment");
  o.detail << pairs << " pairs, worst excursion " << worst;
  return o;
}

Outcome criterion6() {
  Outcome o;
  Rng rng(606);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_pure = 0.0, worst_mixed = 0.0, worst_res = 0.0, worst_neg = 0.0, worst_qp = 0.0;
  bool all_converged = true;
  const auto solve = [&](const EntangledProblem& p) {
    const SolverReport r = optimize_entangled(p);
    all_converged = all_converged && r.converged;
    worst_res = std::max(worst_res, r.constraint_residual);
    worst_neg = std::max(worst_neg, -r.min_eigenvalue);
    worst_res = std::max(worst_res, std::abs(r.state.matrix().trace().real() - 1.0));
    return r.objective;
  };
  const auto separable = [](const EntangledProblem& p) {
    return jq_bounds(landscape_observable(p.hamiltonian, p.rho_a, p.o_a, p.duration)).max;
  };
  // (a) pure marginals: 10 JC and 10 random instances.
  for (int k = 0; k < 10; ++k) {
    const double delta = k % 2 == 0 ? 0.0 : 0.1;
    const Index nb = 2 + static_cast<Index>(k % 5);
    const EntangledProblem p{jc::build_jc(jc::JCParams::with_detuning(delta, nb)), jc::ground_state(),
                             jc::excited_population(), 100.0 * unit(rng)};
    worst_pure = std::max(worst_pure, std::abs(solve(p) - separable(p)));
  }
  for (int k = 0; k < 10; ++k) {
    const Index da = 1 + static_cast<Index>(k % 3), db = 1 + static_cast<Index>((k / 3) % 3);
    const EntangledProblem p{random_system(da, db, rng), DensityMatrix::pure(random_pure_vector(da, rng)),
                             Observable(random_hermitian(da, rng)), 3.0 * unit(rng)};
    worst_pure = std::max(worst_pure, std::abs(solve(p) - separable(p)));
  }
  // (b) maximally mixed marginal I/2.
  const auto mixed = [&](const BipartiteHamiltonian& h, const Observable& o_a, double t) {
    const EntangledProblem p{h, DensityMatrix::maximally_mixed(2), o_a, t};
    worst_mixed = std::max(worst_mixed, separable(p) - solve(p));
  };
  mixed(jc::build_jc(jc::JCParams::with_detuning(0.0, 4)), jc::excited_population(), 5 * kPi);
  mixed(jc::build_jc(jc::JCParams::with_detuning(0.1, 3)), jc::excited_population(), 30.0);
  for (int k = 0; k < 4; ++k) mixed(random_system(2, 2 + k % 2, rng), Observable(random_hermitian(2, rng)), 2.0 * unit(rng));
  // (d) Dykstra against a barrier QP oracle on 2x2 (x) 2x2.
  for (int k = 0; k < 5; ++k) {
    const ComplexMatrix r = random_hermitian(4, rng) * 2.0;
    const DensityMatrix ra = random_density(2, rng);
    worst_qp = std::max(worst_qp, (dykstra_project(r, ra, 2, 2) - oracle::barrier_qp(r, ra.matrix(), 2, 2)).norm());
  }
  o.require(all_converged, "solver converged");
  o.require(worst_pure <= 1e-6, "(a) pure collapse");
  o.require(worst_mixed <= 1e-8, "(b) mixed dominance");
  o.require(worst_res <= 1e-8 && worst_neg <= 1e-8, "(c) feasibility");
  o.require(worst_qp <= 1e-6, "(d) QP oracle");
  o.detail << "(a) " << worst_pure << "; (b) separable excess " << worst_mixed << "; (c) residual " << worst_res
           << ", negativity " << worst_neg << "; (d) distance " << worst_qp;
  return o;
}

Outcome criterion7() {
  Outcome o;
  Rng rng(707);
  double unitarity = 0.0, recon = 0.0, identities = 0.0;
  for (Index n = 1; n <= 64; n += (n < 8 ? 1 : 7)) {
    const ComplexMatrix h = random_hermitian(n, rng);
    const ComplexMatrix u = propagator(h, 3.7);
    unitarity = std::max(unitarity, (u.adjoint() * u - identity(n)).norm());
    const HermitianEig e = eigh(h);
    recon = std::max(recon, (e.eigenvectors * e.eigenvalues.cast<Complex>().asDiagonal() * e.eigenvectors.adjoint() - h)
                                    .norm() /
                                h.norm());
  }
  for (int k = 0; k < 20; ++k) {
    const Index da = dim_upto(rng, 4), db = dim_upto(rng, 4), dc = dim_upto(rng, 3);
    const ComplexMatrix a = ginibre(da, da, rng), b = ginibre(db, db, rng), c = ginibre(dc, dc, rng);
    const ComplexMatrix m = ginibre(da * db, da * db, rng), m2 = ginibre(da * db, da * db, rng);
    const ComplexMatrix xa = kron(ginibre(da, da, rng), identity(db));
    const double lam = 0.3;
    identities = std::max({
        identities,
        std::abs(kron(a, b).trace() - a.trace() * b.trace()),
        (kron(kron(a, b), c) - kron(a, kron(b, c))).cwiseAbs().maxCoeff(),
        (partial_trace(kron(a, b), da, db, Subsystem::B) - b.trace() * a).cwiseAbs().maxCoeff(),
        (partial_trace(kron(a, b), da, db, Subsystem::A) - a.trace() * b).cwiseAbs().maxCoeff(),
        std::abs(partial_trace(m, da, db, Subsystem::A).trace() - m.trace()),
        std::abs(partial_trace(m, da, db, Subsystem::B).trace() - m.trace()),
        (partial_trace(lam * m + m2, da, db, Subsystem::A) - lam * partial_trace(m, da, db, Subsystem::A) -
         partial_trace(m2, da, db, Subsystem::A))
            .cwiseAbs()
            .maxCoeff(),
        (partial_trace(xa * m, da, db, Subsystem::A) - partial_trace(m * xa, da, db, Subsystem::A)).cwiseAbs().maxCoeff(),
    });
  }
  o.require(unitarity <= 1e-10, "unitarity");
  o.require(recon <= 1e-10, "eigh reconstruction");
  o.require(identities <= 1e-12, "trace/kron identities");
  o.detail << "unitarity " << unitarity << ", reconstruction " << recon << ", identities " << identities;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + QQLAND_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion8() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "qqland_acceptance";
  fs::create_directories(dir);
  const std::string specs = QQLAND_SPEC_DIR;
  int identical = 0, runs = 0;
  const std::vector<std::pair<std::string, std::string>> jobs{
      {"bounds", "jc.yaml"},        {"optimal", "generic.yaml"},  {"verify", "generic.yaml"},
      {"verify", "jc.yaml"},        {"entangled", "generic.yaml"}, {"sweep", "jc.yaml"},
      {"plotdata", "jc_sweep.yaml"}};
  for (const auto& [task, spec] : jobs) {
    const fs::path a = dir / (task + "_a.out"), b = dir / (task + "_b.out");
    const std::string args = task + " --spec " + specs + "/" + spec + " --seed 9 --out ";
    const int ra = cli(args + a.string()), rb = cli(args + b.string());
    ++runs;
    o.require(ra == 0 && rb == 0, task + " exit code");
    if (ra == 0 && rb == 0 && slurp(a) == slurp(b) && !slurp(a).empty()) ++identical;
  }
  o.require(identical == runs, "byte-identical outputs");

  int round_trips = 0;
  std::vector<std::string> texts;
  for (const char* f : {"jc.yaml", "jc_sweep.yaml", "generic.yaml"}) texts.push_back(slurp(specs + "/" + f));
  Rng rng(808);
  for (int k = 0; k < 10; ++k) {
    io::ProblemSpec s;
    s.kind = io::Kind::generic;
    s.task = io::Task::optimal;
    s.duration = std::uniform_real_distribution<double>(0.0, 10.0)(rng);
    s.seed = rng();
    s.h_a0 = random_hermitian(2, rng);
    s.h_b0 = random_hermitian(2, rng);
    s.couplings = {{random_hermitian(2, rng), random_hermitian(2, rng)}};
    s.rho_a = random_density(2, rng).matrix();
    s.o_a = random_hermitian(2, rng);
    texts.push_back(io::serialize_spec(s));
  }
  for (const auto& t : texts) {
    const io::ProblemSpec a = io::parse_spec_text(t);
    const std::string once = io::serialize_spec(a);
    const io::ProblemSpec b = io::parse_spec_text(once);
    if (a == b && io::serialize_spec(b) == once) ++round_trips;
  }
  o.require(round_trips == static_cast<int>(texts.size()), "round trip");
  o.detail << identical << "/" << runs << " task outputs byte-identical, " << round_trips << "/" << texts.size()
           << " specs round-trip exactly";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 analytic-oracle equivalence", criterion1}, {"2 sweep structure", criterion2},
      {"3 linearity and level sets", criterion3},    {"4 global optimality", criterion4},
      {"5 spectral containment", criterion5},        {"6 entangled solver", criterion6},
      {"7 kernel correctness", criterion7},          {"8 CLI determinism and round-trip", criterion8}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %-36s %s  (%.1fs) %s\n", name, o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
