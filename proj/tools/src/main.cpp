#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "comcheck/cli/reproduce.hpp"
#include "comcheck/cli/runner.hpp"

using namespace comcheck::cli;

int main(int argc, char** argv) {
  CLI::App app{"comcheck: MCTDHB convergence checks against exact center-of-mass dynamics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());

  std::string config;
  auto* run = app.add_subcommand("run", "Run one configuration file");
  run->add_option("config", config, "INI configuration")->required();

  std::string case_name;
  ReproduceOptions ropts;
  std::string out_root = ropts.output_root.string();
  auto* reproduce = app.add_subcommand("reproduce", "Run an embedded paper case and check reference values");
  reproduce->add_option("case", case_name, "Case name")->required()->check(CLI::IsMember(case_names()));
  reproduce->add_flag("--extended", ropts.extended, "Include hours-long runs (fig1 M=3, fig2 M=9 restart, fig4 M=3 beyond ratio 0.5)");
  reproduce->add_option("--out", out_root, "Output root directory")->capture_default_str();

  std::string a, b, report;
  double tol = 0.05;
  auto* compare = app.add_subcommand("compare", "COM convergence test between two runs");
  compare->add_option("a", a, "Artifact directory or time-series CSV")->required();
  compare->add_option("b", b, "Reference artifact directory or time-series CSV")->required();
  compare->add_option("--tol", tol, "Tolerance on max |sigma_R2(a)/sigma_R2(b) - 1|")->capture_default_str();
  compare->add_option("--report", report, "Write the report JSON here");

  std::string pattern;
  auto* scan = app.add_subcommand("scan", "Run every configuration matching a glob");
  scan->add_option("config-glob", pattern, "Glob pattern, quoted")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return run_command(config, std::cerr);
    if (*reproduce) {
      ropts.output_root = out_root;
      return reproduce_command(case_name, ropts, std::cerr);
    }
    if (*compare) return compare_command(a, b, tol, report, std::cerr);
    if (*scan) return scan_command(pattern, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "schema error: " << e.what() << std::endl;
    return kExitSchema;
  } catch (const comcheck::ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << std::endl;
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitPhysicsAbort;
  }
  return kExitUsage;
}
