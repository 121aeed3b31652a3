#include <iostream>

#include <CLI11.hpp>

#include "ftsdn/cli.h"

int main(int argc, char** argv) {
  CLI::App app{"Replicated SDN controller simulator and trace checker"};
  app.require_subcommand(1);

  ftsdn::CliOptions opts;
  std::string path;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Override the scenario seed");
    cmd->add_option("--jobs", opts.jobs, "Parallel runs")->check(CLI::PositiveNumber);
    cmd->add_option("--crash", opts.crash, "Sweep target: leader | replica:<id>");
  };

  auto* run = app.add_subcommand("run", "Run one scenario and check its trace");
  run->add_option("scenario", path, "Scenario file")->required();
  run->add_option("--trace", opts.trace_out, "Write the trace here (JSON lines)");
  run->add_option("--metrics", opts.metrics_out, "Write message metrics here (JSON)");
  run->add_option("--seed", seed, "Override the scenario seed");

  auto* sweep = app.add_subcommand("sweep", "Crash one controller at every send/deliver point");
  sweep->add_option("scenario", path, "Scenario file")->required();
  add_common(sweep);

  auto* compare = app.add_subcommand("compare", "Run all three variants side by side");
  compare->add_option("scenario", path, "Scenario file")->required();
  add_common(compare);

  auto* check = app.add_subcommand("check", "Check a stored trace");
  check->add_option("trace", path, "Trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ftsdn::kExitError;
  }

  for (auto* cmd : {run, sweep, compare}) {
    if (cmd->count("--seed")) opts.seed = seed;
  }
  if (*run) return ftsdn::cmd_run(path, opts, std::cout, std::cerr);
  if (*sweep) return ftsdn::cmd_sweep(path, opts, std::cout, std::cerr);
  if (*compare) return ftsdn::cmd_compare(path, opts, std::cout, std::cerr);
  return ftsdn::cmd_check(path, std::cout, std::cerr);
}
