#pragma once

// Problem specification files (YAML).
//
//   kind: jc | generic
//   task: bounds | optimal | sweep | entangled | verify | plotdata   (optional;
//         the command line task takes precedence)
//   sense: maximize | minimize            (default maximize)
//   seed: <unsigned>                      (default 0)
//   duration: <T>                         (bounds, optimal, entangled, verify)
//   grid: {t_start: .., t_end: .., steps: ..}   (sweep, plotdata)
//   jc: {omega: .., nu: <x | [x, ..]>, coupling: .., levels: <n | [n, ..]>}
//   generic:
//     h_a0: <matrix>
//     h_b0: <matrix>
//     couplings: [{h_a: <matrix>, h_b: <matrix>}, ..]
//   rho_a: <matrix>   (required for generic; jc defaults to |g><g|)
//   o_a: <matrix>     (required for generic; jc defaults to |e><e|)
//   tolerances: {degeneracy, solver, max_iters, step, projection, projection_max_iters}
//
// A <matrix> is a list of rows, each row a list of [re, im] pairs.
// Diagnostics carry the line and column of the offending node.

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qqland/entangled.hpp"
#include "qqland/jcmodel.hpp"
#include "qqland/properties.hpp"

namespace qqland::io {

/// Malformed file: bad YAML, wrong node types, unknown keys or enum values.
class SpecParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed file whose content breaks an invariant.
class SpecValidationError : public Error {
 public:
  using Error::Error;
};

enum class Kind { generic, jc };
enum class Task { bounds, optimal, sweep, entangled, verify, plotdata };

struct Grid {
  double t_start = 0.0;
  double t_end = 100.0;
  std::size_t steps = 1001;
  bool operator==(const Grid&) const = default;
};

struct Tolerances {
  double degeneracy = kDefaultDegeneracyTol;
  double solver = 1e-8;
  int max_iters = 100000;
  double step = 0.0;  // 0 selects the default step
  double projection = 1e-12;
  int projection_max_iters = 10000;
  bool operator==(const Tolerances&) const = default;
};

struct ProblemSpec {
  Kind kind = Kind::jc;
  std::optional<Task> task;
  Sense sense = Sense::maximize;
  std::uint64_t seed = 0;
  std::optional<double> duration;
  std::optional<Grid> grid;

  // kind == jc
  double omega = 1.0;
  std::vector<double> nu{1.0};
  double coupling = 0.2;
  std::vector<Index> levels{4};

  // kind == generic
  ComplexMatrix h_a0;
  ComplexMatrix h_b0;
  std::vector<CouplingTerm> couplings;

  std::optional<ComplexMatrix> rho_a;
  std::optional<ComplexMatrix> o_a;
  Tolerances tolerances;
};

inline bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
  const auto same = [](const ComplexMatrix& x, const ComplexMatrix& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && (x.size() == 0 || x == y);
  };
  const auto same_opt = [&](const std::optional<ComplexMatrix>& x, const std::optional<ComplexMatrix>& y) {
    return x.has_value() == y.has_value() && (!x || same(*x, *y));
  };
  if (a.couplings.size() != b.couplings.size()) return false;
  for (std::size_t k = 0; k < a.couplings.size(); ++k) {
    if (!same(a.couplings[k].on_a, b.couplings[k].on_a) || !same(a.couplings[k].on_b, b.couplings[k].on_b)) {
      return false;
    }
  }
  return a.kind == b.kind && a.task == b.task && a.sense == b.sense && a.seed == b.seed &&
         a.duration == b.duration && a.grid == b.grid && a.omega == b.omega && a.nu == b.nu &&
         a.coupling == b.coupling && a.levels == b.levels && same(a.h_a0, b.h_a0) && same(a.h_b0, b.h_b0) &&
         same_opt(a.rho_a, b.rho_a) && same_opt(a.o_a, b.o_a) && a.tolerances == b.tolerances;
}

inline const char* to_string(Task t) {
  switch (t) {
    case Task::bounds: return "bounds";
    case Task::optimal: return "optimal";
    case Task::sweep: return "sweep";
    case Task::entangled: return "entangled";
    case Task::verify: return "verify";
    case Task::plotdata: return "plotdata";
  }
  return "?";
}

inline const char* to_string(Sense s) { return s == Sense::maximize ? "maximize" : "minimize"; }
inline const char* to_string(Kind k) { return k == Kind::jc ? "jc" : "generic"; }

inline std::optional<Task> task_from_string(const std::string& s) {
  for (Task t : {Task::bounds, Task::optimal, Task::sweep, Task::entangled, Task::verify, Task::plotdata}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

inline std::optional<Sense> sense_from_string(const std::string& s) {
  if (s == "maximize" || s == "max") return Sense::maximize;
  if (s == "minimize" || s == "min") return Sense::minimize;
  return std::nullopt;
}

namespace detail {

inline std::string where(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  if (m.is_null()) return "";
  std::ostringstream os;
  os << "line " << m.line + 1 << ", column " << m.column + 1 << ": ";
  return os.str();
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void parse_fail(const YAML::Node& n, const std::string& msg) const {
    throw SpecParseError(source_ + ": " + where(n) + msg);
  }
  [[noreturn]] void invalid(const YAML::Node& n, const std::string& msg) const {
    throw SpecValidationError(source_ + ": " + where(n) + msg);
  }

  void expect_keys(const YAML::Node& map, const std::string& path, std::initializer_list<const char*> allowed) const {
    if (!map.IsMap()) parse_fail(map, path + " must be a mapping");
    for (const auto& kv : map) {
      const std::string key = kv.first.Scalar();
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) parse_fail(kv.first, "unknown key '" + key + "' in " + path);
    }
  }

  template <typename T>
  T scalar(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) parse_fail(n, path + " must be a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      parse_fail(n, path + " has an invalid value '" + n.Scalar() + "'");
    }
  }

  double real(const YAML::Node& n, const std::string& path) const {
    const double v = scalar<double>(n, path);
    if (!std::isfinite(v)) invalid(n, path + " must be finite");
    return v;
  }

  ComplexMatrix matrix(const YAML::Node& n, const std::string& path) const {
    if (!n.IsSequence() || n.size() == 0) parse_fail(n, path + " must be a non-empty list of rows");
    const auto rows = static_cast<Index>(n.size());
    Index cols = -1;
    ComplexMatrix m;
    for (Index r = 0; r < rows; ++r) {
      const YAML::Node row = n[static_cast<std::size_t>(r)];
      const std::string rpath = path + "[" + std::to_string(r) + "]";
      if (!row.IsSequence()) parse_fail(row, rpath + " must be a list of [re, im] pairs");
      if (cols < 0) {
        cols = static_cast<Index>(row.size());
        m.resize(rows, cols);
      } else if (static_cast<Index>(row.size()) != cols) {
        parse_fail(row, rpath + " has " + std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
      }
      for (Index c = 0; c < cols; ++c) {
        const YAML::Node z = row[static_cast<std::size_t>(c)];
        const std::string zpath = rpath + "[" + std::to_string(c) + "]";
        if (!z.IsSequence() || z.size() != 2) parse_fail(z, zpath + " must be an [re, im] pair");
        m(r, c) = Complex(real(z[0], zpath), real(z[1], zpath));
      }
    }
    return m;
  }

 private:
  std::string source_;
};

template <typename T, typename F>
std::vector<T> one_or_many(const Reader& rd, const YAML::Node& n, const std::string& path, F&& item) {
  std::vector<T> out;
  if (n.IsSequence()) {
    if (n.size() == 0) rd.invalid(n, path + " must not be empty");
    for (std::size_t k = 0; k < n.size(); ++k) out.push_back(item(n[k], path + "[" + std::to_string(k) + "]"));
  } else {
    out.push_back(item(n, path));
  }
  return out;
}

}  // namespace detail

/// Task-dependent requirements; the task must be known by now.
inline void validate_for_task(const ProblemSpec& spec) {
  if (!spec.task) throw SpecValidationError("no task given (neither in the spec nor on the command line)");
  const Task t = *spec.task;
  const bool needs_duration = t == Task::bounds || t == Task::optimal || t == Task::entangled || t == Task::verify;
  if (needs_duration && !spec.duration) {
    throw SpecValidationError(std::string("task ") + to_string(t) + " requires 'duration'");
  }
  if ((t == Task::sweep || t == Task::plotdata) && !spec.grid) {
    throw SpecValidationError(std::string("task ") + to_string(t) + " requires 'grid'");
  }
  if (spec.grid) {
    if (!(spec.grid->t_start <= spec.grid->t_end) || spec.grid->steps < 1) {
      throw SpecValidationError("grid requires t_start <= t_end and steps >= 1");
    }
  }
  if (t == Task::plotdata && spec.kind != Kind::jc) {
    throw SpecValidationError("task plotdata is only defined for kind jc");
  }
  const bool single_jc = t != Task::sweep && t != Task::plotdata;
  if (spec.kind == Kind::jc && single_jc && (spec.nu.size() != 1 || spec.levels.size() != 1)) {
    throw SpecValidationError(std::string("task ") + to_string(t) + " needs a single jc.nu and jc.levels");
  }
}

/// Builds the validated system a spec describes. For jc with several nu or
/// levels, `which_nu` / `which_levels` pick one combination.
inline LandscapeInstance load_instance(const ProblemSpec& spec, std::size_t which_nu = 0,
                                       std::size_t which_levels = 0) {
  const double t = spec.duration.value_or(0.0);
  if (spec.kind == Kind::jc) {
    const jc::JCParams p{spec.omega, spec.nu.at(which_nu), spec.coupling, spec.levels.at(which_levels)};
    return {jc::build_jc(p), spec.rho_a ? DensityMatrix(*spec.rho_a, "rho_a") : jc::ground_state(),
            spec.o_a ? Observable(*spec.o_a, "o_a") : jc::excited_population(), t};
  }
  return {BipartiteHamiltonian(spec.h_a0, spec.h_b0, spec.couplings), DensityMatrix(*spec.rho_a, "rho_a"),
          Observable(*spec.o_a, "o_a"), t};
}

/// Parses YAML text. `source` names the origin in diagnostics.
inline ProblemSpec parse_spec_text(const std::string& text, const std::string& source = "<spec>") {
  detail::Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << source << ": line " << e.mark.line + 1 << ", column " << e.mark.column + 1 << ": " << e.msg;
    throw SpecParseError(os.str());
  }
  if (!root.IsMap()) throw SpecParseError(source + ": top level must be a mapping");
  rd.expect_keys(root, "spec",
                 {"kind", "task", "sense", "seed", "duration", "grid", "jc", "generic", "rho_a", "o_a", "tolerances"});

  ProblemSpec spec;
  if (!root["kind"]) rd.invalid(root, "missing required key 'kind'");
  const std::string kind = rd.scalar<std::string>(root["kind"], "kind");
  if (kind == "jc") {
    spec.kind = Kind::jc;
  } else if (kind == "generic") {
    spec.kind = Kind::generic;
  } else {
    rd.parse_fail(root["kind"], "kind must be 'jc' or 'generic', got '" + kind + "'");
  }

  if (const auto n = root["task"]) {
    const auto t = task_from_string(rd.scalar<std::string>(n, "task"));
    if (!t) rd.parse_fail(n, "unknown task '" + n.Scalar() + "'");
    spec.task = t;
  }
  if (const auto n = root["sense"]) {
    const auto s = sense_from_string(rd.scalar<std::string>(n, "sense"));
    if (!s) rd.parse_fail(n, "sense must be maximize or minimize");
    spec.sense = *s;
  }
  if (const auto n = root["seed"]) spec.seed = rd.scalar<std::uint64_t>(n, "seed");
  if (const auto n = root["duration"]) spec.duration = rd.real(n, "duration");
  if (const auto n = root["grid"]) {
    rd.expect_keys(n, "grid", {"t_start", "t_end", "steps"});
    Grid g;
    if (n["t_start"]) g.t_start = rd.real(n["t_start"], "grid.t_start");
    if (n["t_end"]) g.t_end = rd.real(n["t_end"], "grid.t_end");
    if (n["steps"]) {
      const auto steps = rd.scalar<long long>(n["steps"], "grid.steps");
      if (steps < 1) rd.invalid(n["steps"], "grid.steps must be >= 1");
      g.steps = static_cast<std::size_t>(steps);
    }
    if (!(g.t_start <= g.t_end)) rd.invalid(n, "grid requires t_start <= t_end");
    spec.grid = g;
  }

  if (const auto n = root["tolerances"]) {
    rd.expect_keys(n, "tolerances",
                   {"degeneracy", "solver", "max_iters", "step", "projection", "projection_max_iters"});
    auto& tl = spec.tolerances;
    const auto positive = [&](const char* key, double& slot) {
      if (!n[key]) return;
      slot = rd.real(n[key], std::string("tolerances.") + key);
      if (!(slot > 0.0)) rd.invalid(n[key], std::string("tolerances.") + key + " must be positive");
    };
    positive("degeneracy", tl.degeneracy);
    positive("solver", tl.solver);
    positive("projection", tl.projection);
    if (n["step"]) {
      tl.step = rd.real(n["step"], "tolerances.step");
      if (tl.step < 0.0) rd.invalid(n["step"], "tolerances.step must be >= 0 (0 selects the default)");
    }
    const auto count = [&](const char* key, int& slot) {
      if (!n[key]) return;
      slot = rd.scalar<int>(n[key], std::string("tolerances.") + key);
      if (slot < 1) rd.invalid(n[key], std::string("tolerances.") + key + " must be >= 1");
    };
    count("max_iters", tl.max_iters);
    count("projection_max_iters", tl.projection_max_iters);
  }

  if (spec.kind == Kind::jc) {
    if (root["generic"]) rd.parse_fail(root["generic"], "'generic' block given for kind jc");
    if (const auto n = root["jc"]) {
      rd.expect_keys(n, "jc", {"omega", "nu", "coupling", "levels"});
      if (n["omega"]) spec.omega = rd.real(n["omega"], "jc.omega");
      if (n["coupling"]) spec.coupling = rd.real(n["coupling"], "jc.coupling");
      if (n["nu"]) {
        spec.nu = detail::one_or_many<double>(rd, n["nu"], "jc.nu",
                                              [&](const YAML::Node& x, const std::string& p) { return rd.real(x, p); });
      }
      if (n["levels"]) {
        spec.levels = detail::one_or_many<Index>(rd, n["levels"], "jc.levels", [&](const YAML::Node& x,
                                                                                  const std::string& p) {
          const auto v = rd.scalar<long long>(x, p);
          if (v < 1) rd.invalid(x, p + " must be >= 1");
          return static_cast<Index>(v);
        });
      }
    }
  } else {
    if (root["jc"]) rd.parse_fail(root["jc"], "'jc' block given for kind generic");
    const auto g = root["generic"];
    if (!g) rd.invalid(root, "kind generic requires a 'generic' block");
    rd.expect_keys(g, "generic", {"h_a0", "h_b0", "couplings"});
    if (!g["h_a0"] || !g["h_b0"]) rd.invalid(g, "generic requires h_a0 and h_b0");
    spec.h_a0 = rd.matrix(g["h_a0"], "generic.h_a0");
    spec.h_b0 = rd.matrix(g["h_b0"], "generic.h_b0");
    if (const auto cs = g["couplings"]) {
      if (!cs.IsSequence()) rd.parse_fail(cs, "generic.couplings must be a list");
      for (std::size_t k = 0; k < cs.size(); ++k) {
        const std::string path = "generic.couplings[" + std::to_string(k) + "]";
        rd.expect_keys(cs[k], path, {"h_a", "h_b"});
        if (!cs[k]["h_a"] || !cs[k]["h_b"]) rd.invalid(cs[k], path + " requires h_a and h_b");
        spec.couplings.push_back({rd.matrix(cs[k]["h_a"], path + ".h_a"), rd.matrix(cs[k]["h_b"], path + ".h_b")});
      }
    }
    if (!root["rho_a"] || !root["o_a"]) rd.invalid(root, "kind generic requires rho_a and o_a");
  }
  if (const auto n = root["rho_a"]) spec.rho_a = rd.matrix(n, "rho_a");
  if (const auto n = root["o_a"]) spec.o_a = rd.matrix(n, "o_a");

  // Invariants of every block, reported at the block's position.
  const auto guard = [&](const YAML::Node& n, auto&& build) {
    try {
      build();
    } catch (const Error& e) {
      rd.invalid(n, e.what());
    }
  };
  if (spec.kind == Kind::generic) {
    const auto g = root["generic"];
    guard(g["h_a0"], [&] { checked_hermitian(spec.h_a0, "generic.h_a0"); });
    guard(g["h_b0"], [&] { checked_hermitian(spec.h_b0, "generic.h_b0"); });
    for (std::size_t k = 0; k < spec.couplings.size(); ++k) {
      const std::string path = "generic.couplings[" + std::to_string(k) + "]";
      guard(g["couplings"][k]["h_a"], [&] { checked_hermitian(spec.couplings[k].on_a, path + ".h_a"); });
      guard(g["couplings"][k]["h_b"], [&] { checked_hermitian(spec.couplings[k].on_b, path + ".h_b"); });
    }
    guard(g, [&] { BipartiteHamiltonian(spec.h_a0, spec.h_b0, spec.couplings); });
  }
  if (spec.rho_a) guard(root["rho_a"], [&] { DensityMatrix(*spec.rho_a, "rho_a"); });
  if (spec.o_a) guard(root["o_a"], [&] { Observable(*spec.o_a, "o_a"); });
  guard(root, [&] {
    for (std::size_t i = 0; i < spec.nu.size(); ++i) {
      for (std::size_t j = 0; j < spec.levels.size(); ++j) {
        const LandscapeInstance inst = load_instance(spec, i, j);
        qqland::detail::check_dims(inst.hamiltonian, inst.rho_a, inst.o_a);
      }
    }
  });
  if (spec.task) guard(root, [&] { validate_for_task(spec); });
  return spec;
}

inline ProblemSpec parse_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str(), path);
}

namespace detail {

inline void emit_matrix(YAML::Emitter& out, const ComplexMatrix& m) {
  out << YAML::BeginSeq;
  for (Index r = 0; r < m.rows(); ++r) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Index c = 0; c < m.cols(); ++c) {
      out << YAML::Flow << YAML::BeginSeq << m(r, c).real() << m(r, c).imag() << YAML::EndSeq;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

}  // namespace detail

/// YAML text that parses back to an identical spec (17 significant digits).
inline std::string serialize_spec(const ProblemSpec& spec) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(spec.kind);
  if (spec.task) out << YAML::Key << "task" << YAML::Value << to_string(*spec.task);
  out << YAML::Key << "sense" << YAML::Value << to_string(spec.sense);
  out << YAML::Key << "seed" << YAML::Value << spec.seed;
  if (spec.duration) out << YAML::Key << "duration" << YAML::Value << *spec.duration;
  if (spec.grid) {
    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "t_start" << YAML::Value << spec.grid->t_start;
    out << YAML::Key << "t_end" << YAML::Value << spec.grid->t_end;
    out << YAML::Key << "steps" << YAML::Value << static_cast<unsigned long long>(spec.grid->steps);
    out << YAML::EndMap;
  }
  if (spec.kind == Kind::jc) {
    out << YAML::Key << "jc" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "omega" << YAML::Value << spec.omega;
    out << YAML::Key << "nu" << YAML::Value;
    if (spec.nu.size() == 1) {
      out << spec.nu.front();
    } else {
      out << YAML::Flow << spec.nu;
    }
    out << YAML::Key << "coupling" << YAML::Value << spec.coupling;
    out << YAML::Key << "levels" << YAML::Value;
    if (spec.levels.size() == 1) {
      out << static_cast<long long>(spec.levels.front());
    } else {
      out << YAML::Flow << YAML::BeginSeq;
      for (Index l : spec.levels) out << static_cast<long long>(l);
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  } else {
    out << YAML::Key << "generic" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "h_a0" << YAML::Value;
    detail::emit_matrix(out, spec.h_a0);
    out << YAML::Key << "h_b0" << YAML::Value;
    detail::emit_matrix(out, spec.h_b0);
    out << YAML::Key << "couplings" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : spec.couplings) {
      out << YAML::BeginMap << YAML::Key << "h_a" << YAML::Value;
      detail::emit_matrix(out, c.on_a);
      out << YAML::Key << "h_b" << YAML::Value;
      detail::emit_matrix(out, c.on_b);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }
  if (spec.rho_a) {
    out << YAML::Key << "rho_a" << YAML::Value;
    detail::emit_matrix(out, *spec.rho_a);
  }
  if (spec.o_a) {
    out << YAML::Key << "o_a" << YAML::Value;
    detail::emit_matrix(out, *spec.o_a);
  }
  const auto& tl = spec.tolerances;
  out << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "degeneracy" << YAML::Value << tl.degeneracy;
  out << YAML::Key << "solver" << YAML::Value << tl.solver;
  out << YAML::Key << "max_iters" << YAML::Value << tl.max_iters;
  out << YAML::Key << "step" << YAML::Value << tl.step;
  out << YAML::Key << "projection" << YAML::Value << tl.projection;
  out << YAML::Key << "projection_max_iters" << YAML::Value << tl.projection_max_iters;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace qqland::io
