#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ergopt/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ergodic optimization toolkit: orbit enumeration, discretized oracles, "
               "sub-actions, locking certificates, scans, and hyperbolic extensions"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long long seed = 0, n_cells = 0;
  int threads = 1;
  bool emit_cycle = false;

  app.add_option("--config", config_path, "config file (key = value lines)");
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed override");
  app.add_option("--threads", threads, "worker threads (outputs are order-independent)");

  // fallthrough lets --config/--out appear after the subcommand name
  app.add_subcommand("orbits", "enumerate periodic orbits and their Birkhoff averages")
      ->fallthrough();
  auto* oracle = app.add_subcommand("oracle", "discretized maximum-ergodic-average oracle");
  oracle->fallthrough();
  auto* n_opt = oracle->add_option("--n", n_cells, "discretization cells");
  oracle->add_flag("--emit-cycle", emit_cycle, "list the arg-max cycle cells");
  app.add_subcommand("subaction", "iterate the one-step improvement operator to a sub-action")
      ->fallthrough();
  app.add_subcommand("certify", "evaluate the locking certificate and perturbation budget")
      ->fallthrough();
  app.add_subcommand("scan", "two-parameter scan of maximizing orbits with locking flags")
      ->fallthrough();
  app.add_subcommand("extend", "extend an interval map to a hyperbolic one on a larger interval")
      ->fallthrough();
  app.add_subcommand("lock-test", "random-perturbation stress test of an arg-max orbit")
      ->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    ergopt::RunConfig cfg =
        config_path.empty() ? ergopt::parse_config("") : ergopt::parse_config_file(config_path);
    const std::string sub = app.get_subcommands().front()->get_name();
    if (cfg.command.empty())
      cfg.command = sub;
    else if (cfg.command != sub)
      throw ergopt::SchemaError("command: config says '" + cfg.command +
                                "' but the subcommand is '" + sub + "'");
    if (seed_opt->count() > 0) cfg.set_int("numeric.seed", seed);
    if (n_opt->count() > 0) {
      if (n_cells <= 0) throw ergopt::SchemaError("numeric.n must be positive");
      cfg.set_int("numeric.n", n_cells);
    }
    if (threads < 1) throw ergopt::SchemaError("--threads must be at least 1");
    ergopt::RunOptions opt;
    opt.out_dir = out_dir;
    opt.emit_cycle = emit_cycle;
    return ergopt::run(cfg, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ergopt::exit_code_for(e);
  }
}
