#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

using namespace dergame;

int main(int argc, char** argv) {
  CLI::App app{"DER compensation games"};
  app.require_subcommand(1);

  cli::RunOptions ro;
  std::string scenario, base = "manhattan7", carbon = "both";
  std::vector<std::string> policies;
  auto* run = app.add_subcommand("run", "solve one scenario or a case matrix");
  auto* sc = run->add_option("--scenario", scenario, "scenario id, e.g. case1_nem_nocarbon");
  auto* mx = run->add_option("--matrix", ro.base, "base scenario name or file for the case matrix");
  sc->excludes(mx);
  auto* bs = run->add_option("--base", base, "base scenario for --scenario (default manhattan7)");
  bs->excludes(mx);
  run->add_option("--carbon", carbon, "on, off or both")->check(CLI::IsMember({"on", "off", "both"}));
  run->add_option("--policy", policies, "nem, vs, dlmp (repeatable)");
  run->add_option("--out", ro.out, std::string("output directory (default $") + cli::kOutEnv + " or results)");
  run->add_option("--jobs", ro.jobs, "worker threads")->default_val(1);
  run->add_flag("--trace", ro.trace, "store relaxation stage traces");

  std::string in, out, file;
  auto* rep = app.add_subcommand("report", "comparison tables from a results directory");
  rep->add_option("--in", in, "results directory")->required();
  rep->add_option("--out", out, "table directory")->required();

  auto* val = app.add_subcommand("validate", "check a scenario file");
  val->add_option("file", file, "scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kOk : cli::kInvalid;
  }

  if (*run) {
    if (!*sc && !*mx) {
      std::cerr << "invalid input: run needs --scenario or --matrix\n";
      return cli::kInvalid;
    }
    try {
      if (*sc) ro.ids = {scenario}, ro.base = base;
      if (!policies.empty()) {
        ro.filter.policies.clear();
        for (const auto& p : policies) ro.filter.policies.push_back(parse_policy(p));
      }
      if (carbon != "both") ro.filter.carbon = {carbon == "on"};
    } catch (const std::exception& e) {
      std::cerr << "invalid input: " << e.what() << '\n';
      return cli::kInvalid;
    }
    return cli::cmd_run(ro, std::cout, std::cerr);
  }
  if (*rep) return cli::cmd_report(in, out, std::cout, std::cerr);
  return cli::cmd_validate(file, std::cout, std::cerr);
}
