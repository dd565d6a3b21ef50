// Command-line runner for the constrained variational optimizers.
//
//   cvi run          --config cfg.json [--out DIR]
//   cvi compare      --config cfg.json [--out DIR] [--no-plot]
//   cvi order-check  --config cfg.json [--out DIR]

#include <iostream>

#include "CLI11.hpp"
#include "cvi/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Constrained Hamiltonian variational integrators for optimization on manifolds"};
  app.require_subcommand(1);

  cvi::cli::CommandOptions opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON config file")->required();
    sub->add_option("--out", opts.out_dir, "output directory (overrides output_dir)");
    sub->add_flag("--no-plot", opts.no_plot, "skip the SVG plot");
  };
  auto* run = app.add_subcommand("run", "run each method block and write one CSV trace per method");
  auto* compare = app.add_subcommand("compare", "run all methods from one initial point, write CSV and SVG");
  auto* order = app.add_subcommand("order-check", "fit the empirical order of accuracy");
  add_common(run);
  add_common(compare);
  add_common(order);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cvi::cli::config_error;
  }

  if (*run) return cvi::cli::cmd_run(opts, std::cout, std::cerr);
  if (*compare) return cvi::cli::cmd_compare(opts, std::cout, std::cerr);
  return cvi::cli::cmd_order_check(opts, std::cout, std::cerr);
}
