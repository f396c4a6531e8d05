#pragma once

// Task dispatch and result emission for the qqland command line.

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qqland/io/spec.hpp"

namespace qqland::io {

/// Process exit codes; values are stable.
enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kParseError = 2,
  kValidationError = 3,
  kConvergenceFailure = 4,
  kVerifyFailed = 5,
};

struct Overrides {
  std::optional<Task> task;
  std::optional<std::uint64_t> seed;
  std::optional<Grid> grid;
  std::optional<Sense> sense;
};

inline void apply(const Overrides& ov, ProblemSpec& spec) {
  if (ov.task) spec.task = ov.task;
  if (ov.seed) spec.seed = *ov.seed;
  if (ov.grid) spec.grid = ov.grid;
  if (ov.sense) spec.sense = *ov.sense;
}

/// "tStart:tEnd:steps".
inline Grid parse_grid(const std::string& text) {
  const auto first = text.find(':');
  const auto second = first == std::string::npos ? first : text.find(':', first + 1);
  if (second == std::string::npos || text.find(':', second + 1) != std::string::npos) {
    throw SpecParseError("--grid expects tStart:tEnd:steps, got '" + text + "'");
  }
  const auto number = [&](std::string_view s, auto& value) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw SpecParseError("--grid: cannot parse '" + std::string(s) + "'");
    }
  };
  const std::string_view v(text);
  Grid g;
  unsigned long long steps = 0;
  number(v.substr(0, first), g.t_start);
  number(v.substr(first + 1, second - first - 1), g.t_end);
  number(v.substr(second + 1), steps);
  g.steps = static_cast<std::size_t>(steps);
  return g;
}

/// 12 significant digits, '.' decimal point, independent of the locale.
inline std::string format_number(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

inline nlohmann::json matrix_json(const ComplexMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline constexpr const char* kSweepHeader = "T,j_max,j_min,argmax_level";
inline constexpr const char* kPlotHeader = "T,j_max,j_min,argmax_level,n_levels,delta";

inline std::string sweep_csv(std::span<const double> times, std::span<const double> j_max,
                             std::span<const double> j_min, std::span<const Index> argmax) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    out += format_number(times[k]) + "," + format_number(j_max[k]) + "," + format_number(j_min[k]) + "," +
           std::to_string(argmax[k]) + "\n";
  }
  return out;
}

inline std::string sweep_csv(const jc::SweepResult& s) {
  return sweep_csv(s.times, s.j_max, s.j_min, s.argmax_level);
}

/// Long-form table of several sweeps over one common grid.
inline std::string emit_plotdata(std::span<const jc::SweepResult> sweeps) {
  if (sweeps.empty()) throw ValidationError("emit_plotdata: no sweeps");
  const auto& grid = sweeps.front().times;
  std::string out = std::string(kPlotHeader) + "\n";
  for (const auto& s : sweeps) {
    if (s.times != grid) throw DimensionError("emit_plotdata: sweeps do not share a grid");
    const std::string tail =
        "," + std::to_string(s.params.levels) + "," + format_number(s.params.detuning()) + "\n";
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      out += format_number(s.times[k]) + "," + format_number(s.j_max[k]) + "," + format_number(s.j_min[k]) + "," +
             std::to_string(s.argmax_level[k]) + tail;
    }
  }
  return out;
}

struct OutputFile {
  std::string path;
  std::string content;
};

struct RunResult {
  int exit_code = kSuccess;
  std::vector<OutputFile> files;
  std::string message;
};

namespace detail {

inline std::string with_suffix(const std::string& path, const std::string& suffix) {
  const std::filesystem::path p(path);
  std::filesystem::path out = p.parent_path() / (p.stem().string() + suffix + p.extension().string());
  return out.string();
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline jc::JCParams jc_params(const ProblemSpec& spec, std::size_t nu, std::size_t levels) {
  return {spec.omega, spec.nu.at(nu), spec.coupling, spec.levels.at(levels)};
}

/// The field-configuration closed form only applies to |g> -> |e>.
inline bool jc_closed_form_applies(const ProblemSpec& spec) {
  return spec.kind == Kind::jc && !spec.rho_a && !spec.o_a;
}

inline RunResult run_bounds(const ProblemSpec& spec, const std::string& out) {
  const LandscapeInstance inst = load_instance(spec);
  const JqBounds b = jq_bounds(landscape_observable(inst.hamiltonian, inst.rho_a, inst.o_a, inst.duration));
  nlohmann::json j = {{"T", inst.duration}, {"jMin", b.min}, {"jMax", b.max}};
  return {kSuccess, {{out, dump(j)}}, ""};
}

inline RunResult run_optimal(const ProblemSpec& spec, const std::string& out) {
  const LandscapeInstance inst = load_instance(spec);
  const LandscapeObservable ob = landscape_observable(inst.hamiltonian, inst.rho_a, inst.o_a, inst.duration);
  const OptimalSolution s = optimal_state(ob, spec.sense, spec.tolerances.degeneracy);
  nlohmann::json j = {{"T", inst.duration},
                      {"sense", to_string(s.sense)},
                      {"objective", s.objective},
                      {"degeneracy", s.degeneracy},
                      {"representative", matrix_json(s.representative.matrix())},
                      {"eigenspace", matrix_json(s.eigenspace)}};
  return {kSuccess, {{out, dump(j)}}, ""};
}

inline RunResult run_sweep(const ProblemSpec& spec, const std::string& out) {
  const Grid g = *spec.grid;
  RunResult result;
  if (spec.kind == Kind::generic) {
    const LandscapeInstance inst = load_instance(spec);
    const std::vector<double> times = jc::uniform_grid(g.t_start, g.t_end, g.steps);
    std::vector<double> hi, lo;
    std::vector<Index> arg;
    for (double t : times) {
      const LandscapeObservable ob = landscape_observable(inst.hamiltonian, inst.rho_a, inst.o_a, t);
      const JqBounds b = jq_bounds(ob);
      hi.push_back(b.max);
      lo.push_back(b.min);
      // Basis level carrying the largest weight of the maximizer.
      Index level = 0;
      optimal_state(ob, Sense::maximize, spec.tolerances.degeneracy).eigenspace.col(0).cwiseAbs2().maxCoeff(&level);
      arg.push_back(level);
    }
    result.files.push_back({out, sweep_csv(times, hi, lo, arg)});
    return result;
  }
  if (!jc_closed_form_applies(spec)) {
    throw SpecValidationError("jc sweep uses the closed form and requires the default rho_a and o_a");
  }
  const bool many = spec.nu.size() * spec.levels.size() > 1;
  for (std::size_t i = 0; i < spec.nu.size(); ++i) {
    for (std::size_t k = 0; k < spec.levels.size(); ++k) {
      const jc::JCParams p = jc_params(spec, i, k);
      const jc::SweepResult s = jc::sweep(p, g.t_start, g.t_end, g.steps);
      std::string path = out;
      if (many) {
        std::string suffix = "_nB" + std::to_string(p.levels);
        if (spec.nu.size() > 1) suffix += "_delta" + format_number(p.detuning());
        path = with_suffix(out, suffix);
      }
      result.files.push_back({path, sweep_csv(s)});
    }
  }
  return result;
}

inline RunResult run_plotdata(const ProblemSpec& spec, const std::string& out) {
  if (!jc_closed_form_applies(spec)) {
    throw SpecValidationError("plotdata uses the closed form and requires the default rho_a and o_a");
  }
  const Grid g = *spec.grid;
  std::vector<jc::SweepResult> sweeps;
  for (std::size_t i = 0; i < spec.nu.size(); ++i) {
    for (std::size_t k = 0; k < spec.levels.size(); ++k) {
      sweeps.push_back(jc::sweep(jc_params(spec, i, k), g.t_start, g.t_end, g.steps));
    }
  }
  return {kSuccess, {{out, emit_plotdata(sweeps)}}, ""};
}

inline RunResult run_entangled(const ProblemSpec& spec, const std::string& out) {
  const LandscapeInstance inst = load_instance(spec);
  const EntangledProblem problem{inst.hamiltonian, inst.rho_a, inst.o_a, inst.duration, spec.sense};
  SolverOptions opt;
  opt.step = spec.tolerances.step;
  opt.tol = spec.tolerances.solver;
  opt.max_iters = spec.tolerances.max_iters;
  opt.projection_tol = spec.tolerances.projection;
  opt.projection_max_iters = spec.tolerances.projection_max_iters;
  const SolverReport r = optimize_entangled(problem, opt);
  const JqBounds sep = jq_bounds(landscape_observable(inst.hamiltonian, inst.rho_a, inst.o_a, inst.duration));
  nlohmann::json j = {{"T", inst.duration},
                      {"sense", to_string(spec.sense)},
                      {"objective", r.objective},
                      {"separable_optimum", spec.sense == Sense::maximize ? sep.max : sep.min},
                      {"converged", r.converged},
                      {"iterations", r.iterations},
                      {"constraint_residual", r.constraint_residual},
                      {"min_eigenvalue", r.min_eigenvalue},
                      {"step", r.step},
                      {"state", matrix_json(r.state.matrix())},
                      {"objective_history", r.objective_history}};
  RunResult result{r.converged ? kSuccess : kConvergenceFailure, {{out, dump(j)}}, ""};
  if (!r.converged) result.message = "entangled solver did not converge; report written";
  return result;
}

inline RunResult run_verify(const ProblemSpec& spec, const std::string& out) {
  const LandscapeInstance inst = load_instance(spec);
  std::vector<PropertyResult> props = verify_landscape(inst, spec.seed);
  if (jc_closed_form_applies(spec)) {
    Rng rng(spec.seed + 1);
    props.push_back(check_jc_closed_form(jc_params(spec, 0, 0), rng));
    const double lower = jq_bounds(landscape_observable(inst.hamiltonian, inst.rho_a, inst.o_a, inst.duration)).min;
    props.push_back({"jc_zero_lower_bound", std::abs(lower) <= 1e-10, std::abs(lower), 1e-10});
  }
  bool all = true;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& p : props) {
    all = all && p.passed;
    list.push_back({{"name", p.name}, {"passed", p.passed}, {"worst", p.worst}, {"threshold", p.threshold}});
  }
  nlohmann::json j = {{"seed", spec.seed}, {"T", inst.duration}, {"passed", all}, {"properties", list}};
  RunResult result{all ? kSuccess : kVerifyFailed, {{out, dump(j)}}, ""};
  if (!all) result.message = "one or more properties failed";
  return result;
}

}  // namespace detail

/// Computes every output of a task in memory. Library errors propagate.
inline RunResult run_task(const ProblemSpec& spec, const std::string& out) {
  validate_for_task(spec);
  switch (*spec.task) {
    case Task::bounds: return detail::run_bounds(spec, out);
    case Task::optimal: return detail::run_optimal(spec, out);
    case Task::sweep: return detail::run_sweep(spec, out);
    case Task::plotdata: return detail::run_plotdata(spec, out);
    case Task::entangled: return detail::run_entangled(spec, out);
    case Task::verify: return detail::run_verify(spec, out);
  }
  throw SpecValidationError("unknown task");
}

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SpecParseError*>(&e)) return kParseError;
  if (dynamic_cast<const ConvergenceError*>(&e)) return kConvergenceFailure;
  if (dynamic_cast<const Error*>(&e)) return kValidationError;
  return kUsageError;
}

/// Runs a task and writes its files once everything has been computed.
inline int run(const ProblemSpec& spec, const std::string& out, std::ostream& err = std::cerr) {
  RunResult result;
  try {
    result = run_task(spec, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  for (const auto& f : result.files) {
    std::ofstream os(f.path, std::ios::binary | std::ios::trunc);
    os << f.content;
    if (!os) {
      err << "error: cannot write " << f.path << "\n";
      return kUsageError;
    }
  }
  if (!result.message.empty()) err << result.message << "\n";
  return result.exit_code;
}

}  // namespace qqland::io
