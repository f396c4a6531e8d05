// qqland <task> --spec <file> --out <path> [--seed N] [--grid tStart:tEnd:steps] [--sense max|min]

#include <CLI11.hpp>

#include <iostream>

#include "qqland/io/run.hpp"

int main(int argc, char** argv) {
  using namespace qqland::io;

  CLI::App app{"Quantum-controlled landscape bounds, optima and sweeps"};
  std::string task_name;
  std::string spec_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::string grid_text;
  std::string sense_text;

  app.add_option("task", task_name, "bounds | optimal | sweep | entangled | verify | plotdata")
      ->required()
      ->check(CLI::IsMember({"bounds", "optimal", "sweep", "entangled", "verify", "plotdata"}));
  app.add_option("--spec", spec_path, "problem specification (YAML)")->required();
  app.add_option("--out", out_path, "output file (JSON or CSV depending on the task)")->required();
  app.add_option("--seed", seed, "seed for randomized checks");
  app.add_option("--grid", grid_text, "duration grid tStart:tEnd:steps");
  app.add_option("--sense", sense_text, "max | min")->check(CLI::IsMember({"max", "min", "maximize", "minimize"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kSuccess : kUsageError;
  }

  Overrides ov;
  ov.task = task_from_string(task_name);
  ov.seed = seed;
  if (!sense_text.empty()) ov.sense = sense_from_string(sense_text);

  ProblemSpec spec;
  try {
    if (!grid_text.empty()) ov.grid = parse_grid(grid_text);
    spec = parse_spec(spec_path);
    apply(ov, spec);
    validate_for_task(spec);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return run(spec, out_path);
}
