// Command-line front end: infer, select, analyze, simulate, generate-data.
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "abcsmc/cli.hpp"

namespace {

struct TaskArgs {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  long long seed = -1;
  long long workers = -1;
};

void add_common(CLI::App *sub, TaskArgs &args, bool config_required) {
  auto *opt = sub->add_option("-c,--config", args.config, "run configuration file");
  if (config_required)
    opt->required();
  sub->add_option("-o,--out", args.out, "output directory");
  sub->add_option("-s,--seed", args.seed, "master seed")->check(CLI::NonNegativeNumber);
  sub->add_option("-w,--workers", args.workers, "worker threads (default: $ABCSMC_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--set", args.sets, "override a config field, key=value");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"ABC-SMC parameter inference and model selection"};
  app.set_version_flag("--version", std::string(abcsmc::cli::version));
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> tasks = {
      {"infer", "posterior inference for one model (smc, rejection, prc or mcmc)"},
      {"select", "joint model and parameter inference over several models"},
      {"analyze", "quantiles, interquantile trajectories, PCA and Bayes factors"},
      {"simulate", "simulate a model at given parameters"},
      {"generate-data", "synthetic dataset from a model recipe"},
  };
  std::vector<TaskArgs> args(tasks.size());
  std::vector<CLI::App *> subs;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    subs.push_back(app.add_subcommand(tasks[i].first, tasks[i].second));
    add_common(subs.back(), args[i], false);
  }
  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!subs[i]->parsed())
      continue;
    const auto &a = args[i];
    abcsmc::RunConfig cfg;
    try {
      if (!a.config.empty())
        cfg = abcsmc::RunConfig::load(a.config);
      if (!cfg.has("workers"))
        if (const char *env = std::getenv("ABCSMC_WORKERS"))
          cfg.set(std::string("workers=") + env);
      for (const auto &kv : a.sets) cfg.set(kv);
      if (a.seed >= 0) cfg.set("seed=" + std::to_string(a.seed));
      if (a.workers > 0) cfg.set("workers=" + std::to_string(a.workers));
      if (!a.out.empty()) cfg.set("output=" + a.out);
    } catch (const std::exception &e) {
      std::cerr << "error: " << e.what() << '\n';
      return abcsmc::cli::ConfigFailure;
    }
    return abcsmc::cli::run(tasks[i].first, cfg, std::cout, std::cerr);
  }
  return abcsmc::cli::ConfigFailure;
}
