#ifndef ABCSMC_CLI_HPP
#define ABCSMC_CLI_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "abcsmc/analysis.hpp"
#include "abcsmc/io.hpp"
#include "abcsmc/models.hpp"
#include "abcsmc/samplers.hpp"

namespace abcsmc::cli {

inline constexpr const char *version = "1.0.0";

enum ExitCode : int {
  Ok = 0,
  ConfigFailure = 1,
  RuntimeFailure = 2,
  BudgetAbort = 3, // partial outputs were written
};

inline Dataset resolve_dataset(const RunConfig &cfg) {
  const std::string ref = cfg.resolve_path(cfg.get("dataset"));
  if (ref == "builtin:tristan")
    return tristan_dataset();
  if (ref == "builtin:mixture")
    return normal_mixture_dataset();
  if (ref.starts_with("builtin:"))
    throw ConfigError(cfg.where("dataset") + ": unknown builtin dataset '" + ref + "'");
  return load_dataset(ref);
}

/// Zoo model plus per-model overrides from the config:
///   prior.<model>.<param>, kernel.<model>.<param>, replicates[.<model>],
///   rk4_step[.<model>], dde_tol[.<model>].
/// With a single model, prior.<param> / kernel.<param> are accepted too.
inline ModelEntry configured_model(const RunConfig &cfg, const std::string &name, bool single) {
  ModelEntry entry(model_by_name(name));
  auto &model = entry.model;
  auto lookup = [&](const std::string &prefix, const std::string &param) -> const std::string * {
    const std::string full = prefix + "." + name + "." + param;
    if (cfg.has(full))
      return &cfg.get(full);
    if (single && cfg.has(prefix + "." + param))
      return &cfg.get(prefix + "." + param);
    return nullptr;
  };
  auto prior = entry.prior.coordinates();
  auto kernel = entry.kernel.coordinates();
  for (std::size_t i = 0; i < model.parameter_count(); ++i) {
    const auto &param = model.parameter_names[i];
    if (const auto *v = lookup("prior", param))
      prior[i] = parse_prior_coordinate(*v, cfg.where("prior." + name + "." + param));
    if (const auto *v = lookup("kernel", param))
      kernel[i] = parse_kernel_coordinate(*v, cfg.where("kernel." + name + "." + param));
  }
  entry.prior = PriorSpec(std::move(prior));
  entry.kernel = KernelSpec(std::move(kernel));

  auto scoped = [&](const std::string &key) -> std::string {
    if (cfg.has(key + "." + name)) return key + "." + name;
    if (cfg.has(key)) return key;
    return {};
  };
  if (auto k = scoped("replicates"); !k.empty()) {
    model.replicates = cfg.count(k);
    if (model.replicates == 0)
      throw ConfigError(cfg.where(k) + ": replicates must be >= 1");
  }
  if (auto k = scoped("rk4_step"); !k.empty())
    model.rk4_step = cfg.number(k);
  if (auto k = scoped("dde_tol"); !k.empty())
    model.dde_tol = cfg.number(k);
  model.prior = entry.prior;
  model.kernel = entry.kernel;
  return entry;
}

inline std::vector<std::string> model_list(const RunConfig &cfg) {
  if (cfg.has("models"))
    return cfg.strings("models");
  return {cfg.get("model")};
}

inline InferenceConfig build_inference(const RunConfig &cfg, bool selection) {
  InferenceConfig ic;
  const auto names = model_list(cfg);
  if (selection && names.size() < 2)
    throw ConfigError(cfg.where(cfg.has("models") ? "models" : "model") +
                      ": select needs at least two models");
  if (!selection && names.size() != 1)
    throw ConfigError(cfg.where("models") + ": infer takes exactly one model");
  for (const auto &n : names) ic.models.push_back(configured_model(cfg, n, names.size() == 1));
  try {
    ic.schedule = ToleranceSchedule(cfg.numbers("epsilons"));
  } catch (const ParseError &) {
    throw;
  } catch (const ConfigError &e) {
    throw ConfigError(cfg.where("epsilons") + ": " + e.what());
  }
  ic.particles = cfg.count_or("particles", 1000);
  ic.datasets_per_proposal = cfg.count_or("bt", 1);
  ic.distance = parse_distance(cfg.get_or("distance", "sse"));
  ic.data = resolve_dataset(cfg);
  ic.seed = cfg.count_or("seed", 1);
  ic.workers = cfg.count_or("workers", 1);
  ic.proposal_budget = cfg.count_or("budget", 0);
  ic.min_acceptance_rate = cfg.number_or("min_acceptance_rate", 1e-7);
  ic.validate();
  return ic;
}

namespace detail {

inline void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write '" + path.string() + "'");
  out << text;
}

template <class F> void write_with(const std::filesystem::path &path, F &&fill) {
  std::ostringstream ss;
  fill(ss);
  write_text(path, ss.str());
}

inline std::string stamp_text(const RunConfig &cfg, const std::string &task, bool complete) {
  std::ostringstream ss;
  ss << "task=" << task << '\n'
     << "config_hash=" << std::hex << std::setw(16) << std::setfill('0')
     << io::fnv1a64(cfg.canonical()) << std::dec << '\n'
     << "seed=" << cfg.get_or("seed", "1") << '\n'
     << "workers=" << cfg.get_or("workers", "1") << '\n'
     << "version=" << version << '\n'
     << "status=" << (complete ? "complete" : "partial") << '\n';
  return ss.str();
}

/// Writes stamp.txt; warns when the directory holds a stamp from another run.
inline void write_stamp(const std::filesystem::path &dir, const RunConfig &cfg,
                        const std::string &task, bool complete, std::ostream &err) {
  const auto path = dir / "stamp.txt";
  const std::string stamp = stamp_text(cfg, task, complete);
  if (std::filesystem::exists(path)) {
    const auto old = io::read_file(path.string());
    auto key_lines = [](const std::string &s) {
      std::string out;
      for (const auto &l : io::lines_of(s))
        if (l.starts_with("config_hash=") || l.starts_with("seed=") || l.starts_with("task="))
          out += l + "\n";
      return out;
    };
    if (key_lines(old) != key_lines(stamp))
      err << "warning: " << dir.string()
          << " holds outputs of a different run (stamp mismatch); overwriting\n";
  }
  write_text(path, stamp);
}

inline std::filesystem::path output_dir(const RunConfig &cfg) {
  std::filesystem::path dir = cfg.get_or("output", "abcsmc_out");
  std::filesystem::create_directories(dir);
  return dir;
}

inline void check_unused(const RunConfig &cfg) {
  const auto unused = cfg.unused_keys();
  if (unused.empty())
    return;
  std::string msg = "unrecognised or unused config field(s):";
  bool any = false;
  for (const auto &k : unused) {
    if (k == "workers" || k == "seed")
      continue; // accepted by every task
    msg += " " + cfg.where(k);
    any = true;
  }
  if (!any)
    return;
  throw ConfigError(msg);
}

inline void write_smc_outputs(const std::filesystem::path &dir, const SmcResult &result,
                              const InferenceConfig &ic, bool with_model) {
  for (const auto &pop : result.populations)
    write_with(dir / ("population_" + std::to_string(pop.index + 1) + ".csv"),
               [&](std::ostream &os) { write_population(os, pop, ic.models, with_model); });
  write_with(dir / "ledger.csv", [&](std::ostream &os) { write_ledger(os, result); });
}

} // namespace detail

inline int run_infer(const RunConfig &cfg, std::ostream &log, std::ostream &err) {
  const auto ic = build_inference(cfg, false);
  const std::string algorithm = cfg.get_or("algorithm", "smc");
  if (algorithm == "mcmc") {
    McmcOptions opt;
    opt.chain_length = cfg.count_or("chain_length", 1000);
    opt.burn_in = cfg.count_or("burn_in", 0);
    opt.adapt = cfg.flag_or("adapt", false);
    opt.initial = cfg.numbers("initial");
    const auto &entry = ic.models.front();
    std::vector<KernelCoordinate> q = entry.kernel.coordinates();
    if (cfg.has("proposal_sd")) {
      const auto sd = cfg.numbers("proposal_sd");
      if (sd.size() != q.size())
        throw ConfigError(cfg.where("proposal_sd") + ": one value per parameter");
      for (std::size_t i = 0; i < q.size(); ++i)
        if (!q[i].discrete)
          q[i] = KernelCoordinate::gaussian(sd[i]);
    }
    opt.proposal = KernelSpec(std::move(q));
    const auto dir = detail::output_dir(cfg);
    detail::check_unused(cfg);
    const auto res = abc_mcmc(ic, opt);
    detail::write_with(dir / "chain.csv", [&](std::ostream &os) {
      for (const auto &n : entry.model.parameter_names) os << n << (&n == &entry.model.parameter_names.back() ? "\n" : ",");
      for (const auto &th : res.chain) {
        for (std::size_t i = 0; i < th.size(); ++i)
          os << io::format_double(th[i]) << (i + 1 == th.size() ? "\n" : ",");
      }
    });
    detail::write_with(dir / "mcmc_summary.csv", [&](std::ostream &os) {
      os << "simulations,accepted,steps,final_scale\n"
         << res.simulations << ',' << res.accepted << ',' << opt.burn_in + opt.chain_length << ','
         << io::format_double(res.final_scale) << '\n';
    });
    detail::write_stamp(dir, cfg, "infer", true, err);
    log << "mcmc: " << res.chain.size() << " states, " << res.simulations << " simulations\n";
    return Ok;
  }

  SmcResult result;
  if (algorithm == "smc") result = abc_smc(ic);
  else if (algorithm == "rejection") result = abc_rejection(ic);
  else if (algorithm == "prc") result = abc_prc_baseline(ic);
  else throw ConfigError(cfg.where("algorithm") + ": expected smc, rejection, prc or mcmc");
  const auto dir = detail::output_dir(cfg);
  detail::check_unused(cfg);
  detail::write_smc_outputs(dir, result, ic, false);
  detail::write_stamp(dir, cfg, "infer", result.complete(), err);
  for (const auto &pop : result.populations)
    log << "population " << pop.index + 1 << ": epsilon=" << io::format_double(pop.epsilon)
        << " proposals=" << pop.proposals << " sim_count=" << pop.sim_count << '\n';
  if (!result.complete()) {
    err << "aborted: " << result.message << " (partial outputs written)\n";
    return BudgetAbort;
  }
  return Ok;
}

inline int run_select(const RunConfig &cfg, std::ostream &log, std::ostream &err) {
  const auto ic = build_inference(cfg, true);
  const auto dir = detail::output_dir(cfg);
  detail::check_unused(cfg);
  const auto result = abc_smc_model_selection(ic);
  detail::write_smc_outputs(dir, result.run, ic, true);
  detail::write_with(dir / "model_counts.csv",
                     [&](std::ostream &os) { write_model_counts(os, result, ic.models); });
  detail::write_stamp(dir, cfg, "select", result.run.complete(), err);
  for (std::size_t t = 0; t < result.model_counts.size(); ++t) {
    log << "population " << t + 1 << ":";
    for (auto c : result.model_counts[t]) log << ' ' << c;
    log << '\n';
  }
  if (!result.run.complete()) {
    err << "aborted: " << result.run.message << " (partial outputs written)\n";
    return BudgetAbort;
  }
  return Ok;
}

inline int run_analyze(const RunConfig &cfg, std::ostream &log, std::ostream &err) {
  std::vector<std::string> files;
  if (cfg.has("populations"))
    for (const auto &f : cfg.strings("populations")) files.push_back(cfg.resolve_path(f));
  else
    files.push_back(cfg.resolve_path(cfg.get("population")));
  const std::size_t model = cfg.count_or("model", 0);
  const bool correlation = cfg.flag_or("correlation", true);
  const double mass = cfg.number_or("mass", 0.95);
  std::string counts_path;
  if (cfg.has("model_counts"))
    counts_path = cfg.resolve_path(cfg.get("model_counts"));
  const auto dir = detail::output_dir(cfg);
  detail::check_unused(cfg);

  std::vector<PopulationTable> tables;
  for (const auto &f : files) tables.push_back(load_population(f, model));
  const auto &last = tables.back();
  const auto &names = last.parameter_names;

  const auto summary = posterior_summary(last.population);
  detail::write_with(dir / "summary.csv", [&](std::ostream &os) {
    os << "parameter,lower,median,upper\n";
    for (std::size_t j = 0; j < summary.size(); ++j)
      os << names[j] << ',' << io::format_double(summary[j].lower) << ','
         << io::format_double(summary[j].median) << ',' << io::format_double(summary[j].upper)
         << '\n';
  });

  if (last.population.size() > names.size()) {
    const auto pca = pca_sensitivity(last.population, correlation);
    detail::write_with(dir / "pca.csv", [&](std::ostream &os) {
      os << "component,eigenvalue,fraction";
      for (const auto &n : names) os << ",coef_" << n;
      for (const auto &n : names) os << ",share_" << n;
      os << '\n';
      for (std::size_t i = 0; i < pca.eigenvalues.size(); ++i) {
        os << i + 1 << ',' << io::format_double(pca.eigenvalues[i]) << ','
           << io::format_double(pca.fractions[i]);
        for (double a : pca.eigenvectors[i]) os << ',' << io::format_double(a);
        for (double s : pca.loadings[i]) os << ',' << io::format_double(s);
        os << '\n';
      }
    });
  } else {
    err << "warning: too few particles for PCA; pca.csv not written\n";
  }

  if (tables.size() > 1) {
    std::vector<Population> pops;
    for (const auto &t : tables) pops.push_back(t.population);
    const auto widths = interquantile_trajectory(pops, mass);
    detail::write_with(dir / "interquantile.csv", [&](std::ostream &os) {
      os << "population";
      for (const auto &n : names) os << ',' << n;
      os << '\n';
      for (std::size_t t = 0; t < pops.size(); ++t) {
        os << t + 1;
        for (const auto &series : widths) os << ',' << io::format_double(series[t]);
        os << '\n';
      }
    });
  }

  if (!counts_path.empty()) {
    const auto lines = io::lines_of(io::read_file(counts_path));
    if (lines.size() < 2)
      throw ParseError(counts_path + ": no model counts");
    const auto header = io::split(lines.front(), ',');
    std::string final_line;
    for (auto it = lines.rbegin(); it != lines.rend(); ++it)
      if (!io::trim(*it).empty()) { final_line = *it; break; }
    const auto cells = io::split(final_line, ',');
    if (cells.size() != header.size())
      throw ParseError(counts_path + ": ragged final row");
    std::vector<std::size_t> counts;
    for (std::size_t i = 1; i < cells.size(); ++i)
      counts.push_back(static_cast<std::size_t>(io::to_double(cells[i], counts_path)));
    detail::write_with(dir / "bayes_factors.csv", [&](std::ostream &os) {
      os << "model_i,model_j,bayes_factor,evidence\n";
      for (std::size_t i = 0; i < counts.size(); ++i)
        for (std::size_t j = 0; j < counts.size(); ++j) {
          if (i == j || counts[i] == 0) continue;
          const double b = bayes_factor(counts, i, j);
          os << header[i + 1] << ',' << header[j + 1] << ',' << io::format_double(b) << ','
             << (b >= 1.0 ? interpret_bayes_factor(b) : "favours " + header[j + 1]) << '\n';
        }
    });
  }
  detail::write_stamp(dir, cfg, "analyze", true, err);
  log << "analyze: " << last.population.size() << " particles, " << names.size()
      << " parameters\n";
  return Ok;
}

inline int run_simulate(const RunConfig &cfg, std::ostream &log, std::ostream &err) {
  const auto name = cfg.get("model");
  ModelEntry entry = configured_model(cfg, name, true);
  const auto theta = cfg.numbers("theta");
  const auto times = cfg.numbers("times");
  const auto seed = cfg.count_or("seed", 1);
  const auto dir = detail::output_dir(cfg);
  detail::check_unused(cfg);
  Rng rng = make_rng(seed, 7);
  const auto traj = simulate_replicates(entry.model, theta, entry.model.replicates, times, rng);
  detail::write_with(dir / "trajectory.csv", [&](std::ostream &os) {
    write_dataset(os, trajectory_dataset(traj, entry.model.species));
  });
  detail::write_stamp(dir, cfg, "simulate", true, err);
  log << "simulate: " << traj.rows() << " time points\n";
  return Ok;
}

inline int run_generate(const RunConfig &cfg, std::ostream &log, std::ostream &err) {
  const auto name = cfg.get("model");
  DataRecipe recipe;
  try {
    recipe = recipe_by_name(name);
  } catch (const ConfigError &) {
    recipe.model = model_by_name(name);
    recipe.noise_sd.assign(recipe.model.species.size(), 0.0);
  }
  recipe.model = configured_model(cfg, name, true).model;
  if (cfg.has("theta")) recipe.theta = cfg.numbers("theta");
  if (cfg.has("times")) recipe.times = cfg.numbers("times");
  if (cfg.has("replicates")) recipe.replicates = recipe.model.replicates;
  if (cfg.has("noise")) {
    auto sd = cfg.numbers("noise");
    if (sd.size() == 1) sd.assign(recipe.model.species.size(), sd[0]);
    if (sd.size() != recipe.model.species.size())
      throw ConfigError(cfg.where("noise") + ": give one sd or one per species");
    recipe.noise_sd = sd;
  }
  if (recipe.theta.empty() || recipe.times.empty())
    throw ConfigError(cfg.where("model") + ": model has no default recipe; set theta and times");
  recipe.seed = cfg.count_or("seed", recipe.seed);
  const auto dir = detail::output_dir(cfg);
  detail::check_unused(cfg);
  const auto data = generate_data(recipe);
  detail::write_with(dir / "dataset.csv", [&](std::ostream &os) { write_dataset(os, data); });
  detail::write_stamp(dir, cfg, "generate-data", true, err);
  log << "generate-data: " << data.rows() << " rows\n";
  return Ok;
}

/// Runs one task; maps errors onto exit codes and prints diagnostics to `err`.
inline int run(const std::string &task, const RunConfig &cfg, std::ostream &log,
               std::ostream &err) {
  try {
    if (cfg.has("task") && cfg.get("task") != task)
      throw ConfigError(cfg.where("task") + ": config is for task '" + cfg.get("task") +
                        "', not '" + task + "'");
    if (task == "infer") return run_infer(cfg, log, err);
    if (task == "select") return run_select(cfg, log, err);
    if (task == "analyze") return run_analyze(cfg, log, err);
    if (task == "simulate") return run_simulate(cfg, log, err);
    if (task == "generate-data") return run_generate(cfg, log, err);
    throw ConfigError("unknown task '" + task + "'");
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return RuntimeFailure;
  }
}

} // namespace abcsmc::cli

#endif // ABCSMC_CLI_HPP
