// hypercurv: batch front end (solve, validate, oracle-compare, report).

#include <CLI11.hpp>

#include <iostream>

#include "hypercurv/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite-difference solver for graphs of constant curvature quotient in hyperbolic space"};
  app.require_subcommand(1);
  hcurv::cli::Options opt;
  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config, "Run configuration (INI)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory (overrides [output] directory)");
    sub->add_flag("--quiet", opt.quiet, "Only print errors");
  };
  auto* solve = app.add_subcommand("solve", "Run the epsilon ladder and write solutions, report and plots");
  common(solve, true);
  auto* validate = app.add_subcommand("validate", "Run the property suite (no PDE solve)");
  common(validate, false);
  validate->add_option("--seed", opt.seed, "Seed for random sampling");
  auto* oracle = app.add_subcommand("oracle-compare", "Compare 2D solutions with the radial shooting oracle");
  common(oracle, true);
  auto* report = app.add_subcommand("report", "Summarize an existing report.json");
  common(report, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hcurv::cli::kConfig;
  }
  try {
    if (*solve) return hcurv::cli::run_solve(opt, std::cout, std::cerr);
    if (*validate) return hcurv::cli::run_validate(opt, std::cout, std::cerr);
    if (*oracle) return hcurv::cli::run_oracle_compare(opt, std::cout, std::cerr);
    return hcurv::cli::run_report(opt, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hcurv::cli::kNumerical;
  }
}
