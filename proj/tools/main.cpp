#include <CLI11.hpp>

#include <iostream>

#include "runner.hpp"

int main(int argc, char** argv) {
  using namespace torusflow::cli;
  CLI::App app{"Flows and evolutions of time-dependent analytic vector fields on the torus"};
  app.require_subcommand(1);

  RunOptions opts;
  std::uint64_t seed = 0;
  for (const char* name : {"solve", "verify", "sweep", "trotter", "limits", "pullback"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run a ") + name + " scenario");
    sub->add_option("scenario", opts.scenario, "scenario JSON file")->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--workers", opts.workers, "worker threads for sampling loops")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "override the scenario seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  CLI::App* sub = app.get_subcommands().front();
  opts.command = sub->get_name();
  if (sub->count("--seed") > 0) opts.seed = seed;

  const RunResult r = run_scenario(opts);
  (r.exit_code == kExitOk ? std::cout : std::cerr) << opts.command << ": " << r.message << "\n";
  return r.exit_code;
}
