#include "msmwc/cli_support.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"expert-advice and linear-loss learner benchmark harness"};
  app.require_subcommand(1);
  app.footer("MSMWC_THREADS caps run parallelism (default: hardware concurrency).");

  std::string config, out_override, seed_arg, only;
  bool resume = false;

  CLI::App* run = app.add_subcommand("run", "execute one experiment config");
  run->add_option("--config", config, "experiment JSON")->required();
  run->add_option("--out", out_override, "output directory (overrides the config)");
  run->add_option("--seed", seed_arg, "seed n or range lo..hi (overrides the config)");

  CLI::App* sweep = app.add_subcommand("sweep", "expand parameter grids and run each point");
  sweep->add_option("--config", config, "experiment JSON with {\"grid\": [...]} nodes")
      ->required();
  sweep->add_flag("--resume", resume, "skip points whose summaries already exist");

  CLI::App* verify = app.add_subcommand("verify", "run the property and acceptance suites");
  verify->add_option("--only", only, "restrict to one check group");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return msmwc::cli_run(config, out_override, seed_arg);
  if (sweep->parsed()) return msmwc::cli_sweep(config, resume);
  return msmwc::cli_verify(only);
}
