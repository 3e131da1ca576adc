#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "opinion/experiment.hpp"

// opiniond: opinion-dynamics simulator and analytic toolkit.
//
// Subcommands map onto the experiment modes; --config loads a key=value file
// and explicit flags override it.

namespace {

struct CliFlags {
  std::string config_path;
  bool has_seed = false;
  std::uint64_t seed = 1;
  std::string out_dir;
  int threads = 0;
  std::size_t replicas = 0;
  double epsilon = 0.0;
};

void add_common(CLI::App* cmd, CliFlags& flags) {
  cmd->add_option("--config", flags.config_path, "key=value configuration file");
  cmd->add_option("--seed", flags.seed, "master seed")->each([&](const std::string&) {
    flags.has_seed = true;
  });
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--threads", flags.threads, "worker threads (affects speed only)");
  cmd->add_option("--replicas", flags.replicas, "independent replicas");
  cmd->add_option("--epsilon", flags.epsilon, "stationarity tolerance");
}

opinion::ExperimentConfig assemble(const CliFlags& flags, const std::string& mode,
                                   const std::string& figure = "") {
  opinion::ExperimentConfig cfg;
  if (!flags.config_path.empty()) opinion::load_config_file(cfg, flags.config_path);
  cfg.mode = mode;
  if (!figure.empty()) cfg.figure = figure;
  if (flags.has_seed) cfg.seed = flags.seed;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.threads > 0) cfg.threads = flags.threads;
  if (flags.replicas > 0) cfg.replicas = flags.replicas;
  if (flags.epsilon > 0.0) cfg.epsilon = flags.epsilon;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opinion-dynamics simulator and analytic toolkit"};
  app.require_subcommand(1);

  CliFlags flags;
  std::string figure;

  CLI::App* simulate = app.add_subcommand("simulate", "run the graph dynamics to stationarity");
  CLI::App* tree_sample =
      app.add_subcommand("tree-sample", "sample the limiting root opinion via its series");
  CLI::App* tree_analytic =
      app.add_subcommand("tree-analytic", "closed-form moments of the limiting opinions");
  CLI::App* finite_horizon =
      app.add_subcommand("finite-horizon", "exact moments after k updates from zero");
  CLI::App* memory_compare =
      app.add_subcommand("memory-compare", "variance with and without self-memory");
  CLI::App* reproduce = app.add_subcommand("reproduce", "run a named preset (fig1..fig7)");
  reproduce->add_option("figure", figure, "preset name, fig1..fig7")->required();
  CLI::App* validate = app.add_subcommand("validate", "check a configuration file");

  for (CLI::App* cmd :
       {simulate, tree_sample, tree_analytic, finite_horizon, memory_compare, reproduce, validate})
    add_common(cmd, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      opinion::ExperimentConfig cfg;
      if (!flags.config_path.empty()) opinion::load_config_file(cfg, flags.config_path);
      if (flags.has_seed) cfg.seed = flags.seed;
      std::vector<std::string> errors = opinion::validate_config(cfg);
      if (errors.empty()) {
        std::cout << "configuration valid\n";
        return 0;
      }
      for (const std::string& e : errors) std::cerr << "invalid: " << e << "\n";
      return 1;
    }
    std::string mode;
    if (simulate->parsed()) mode = "simulate";
    else if (tree_sample->parsed()) mode = "tree-sample";
    else if (tree_analytic->parsed()) mode = "tree-analytic";
    else if (finite_horizon->parsed()) mode = "finite-horizon";
    else if (memory_compare->parsed()) mode = "memory-compare";
    else if (reproduce->parsed()) mode = "reproduce";
    opinion::ExperimentConfig cfg = assemble(flags, mode, figure);
    opinion::run_experiment(cfg);
    std::cout << "wrote results to " << cfg.out_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
