#ifndef ABCSMC_SAMPLERS_HPP
#define ABCSMC_SAMPLERS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "abcsmc/core.hpp"
#include "abcsmc/distance.hpp"
#include "abcsmc/models.hpp"

namespace abcsmc {

struct ModelEntry {
  ModelSpec model;
  PriorSpec prior;
  KernelSpec kernel;

  ModelEntry() = default;
  explicit ModelEntry(ModelSpec m) : model(std::move(m)), prior(model.prior), kernel(model.kernel) {}
  ModelEntry(ModelSpec m, PriorSpec p, KernelSpec k)
      : model(std::move(m)), prior(std::move(p)), kernel(std::move(k)) {}
};

struct InferenceConfig {
  std::vector<ModelEntry> models;
  ToleranceSchedule schedule;
  std::size_t particles = 1000;
  std::size_t datasets_per_proposal = 1; // B_t
  DistanceKind distance = DistanceKind::Sse;
  Dataset data;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::uint64_t proposal_budget = 0; // per population; 0 means 10^6 * particles
  double min_acceptance_rate = 1e-7; // rejection sampler abort floor

  std::uint64_t budget() const {
    return proposal_budget ? proposal_budget : 1'000'000ULL * particles;
  }

  void validate() const {
    if (models.empty())
      throw ConfigError("no model configured");
    if (particles == 0)
      throw ConfigError("particle count must be >= 1");
    if (datasets_per_proposal == 0)
      throw ConfigError("B_t (datasets per proposal) must be >= 1");
    if (workers == 0)
      throw ConfigError("worker count must be >= 1");
    if (schedule.size() == 0)
      throw ConfigError("tolerance schedule is empty");
    if (data.rows() == 0 || data.observed_count() == 0)
      throw ConfigError("dataset has no observed entries");
    for (const auto &e : models) {
      const auto k = e.model.parameter_count();
      if (e.prior.dimension() != k || e.kernel.dimension() != k)
        throw ConfigError("model '" + e.model.name + "': prior/kernel dimension differs from its " +
                          std::to_string(k) + " parameters");
      for (std::size_t i = 0; i < k; ++i)
        if (e.prior[i].discrete != e.kernel[i].discrete)
          throw ConfigError("model '" + e.model.name + "': parameter '" +
                            e.model.parameter_names[i] +
                            "' is discrete in only one of prior and kernel");
      for (std::size_t c = 0; c < data.cols(); ++c) {
        if (!data.observed[c])
          continue;
        if (std::find(e.model.species.begin(), e.model.species.end(), data.species[c]) ==
            e.model.species.end())
          throw ConfigError("model '" + e.model.name + "' has no species '" + data.species[c] +
                            "' observed in the dataset");
      }
    }
  }
};

/// b_t counting test: simulate B_t candidate datasets and count those within
/// epsilon of the data. A failed simulation never counts.
struct AcceptanceTest {
  const Dataset *data = nullptr;
  DistanceKind distance = DistanceKind::Sse;
  double epsilon = 0.0;
  std::size_t datasets = 1;

  struct Outcome {
    std::size_t hits = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    std::uint64_t simulations = 0;
  };

  Outcome evaluate(const ModelSpec &model, std::span<const double> theta, Rng &rng) const {
    Outcome out;
    for (std::size_t b = 0; b < datasets; ++b) {
      ++out.simulations;
      double d = std::numeric_limits<double>::infinity();
      try {
        const auto traj = simulate_replicates(model, theta, model.replicates, data->times, rng);
        d = abcsmc::distance(distance, *data, observe(traj, model.species, *data));
      } catch (const SimulationFailure &) {
      } catch (const Error &) {
        // e.g. cosine distance of an all-zero simulated column
      }
      if (std::isnan(d))
        d = std::numeric_limits<double>::infinity();
      out.best_distance = std::min(out.best_distance, d);
      if (d <= epsilon)
        ++out.hits;
    }
    return out;
  }
};

enum class RunStatus { Complete, BudgetExceeded, AcceptanceTooLow };

struct SmcResult {
  std::vector<Population> populations; // one per tolerance reached
  RunStatus status = RunStatus::Complete;
  std::string message;

  bool complete() const { return status == RunStatus::Complete; }
  const Population &last() const { return populations.back(); }
};

struct ModelSelectionResult {
  SmcResult run;
  std::vector<std::vector<std::size_t>> model_counts; // [population][model]

  const std::vector<std::size_t> &final_counts() const { return model_counts.back(); }

  /// Particles of one model in population `t`, weights as stored (normalized within the model).
  Population submodel(std::size_t t, std::size_t model) const {
    Population out = run.populations.at(t);
    std::erase_if(out.particles, [&](const Particle &p) { return p.model != model; });
    return out;
  }
};

enum class Weighting {
  Importance, // sequential importance sampling weights
  Equal,      // every accepted particle gets the same weight (PRC baseline)
};

/// Importance weight of a particle proposed from `previous`:
///   prior(theta) * hits / sum_j w_j K(theta_j, theta)
/// over the previous particles of the same model (weights normalized within
/// that model). With no previous population the weight is `hits`.
inline double compute_weight(std::span<const double> theta, std::size_t model,
                             const Population *previous, const PriorSpec &prior,
                             const KernelSpec &kernel, std::size_t hits) {
  if (previous == nullptr)
    return static_cast<double>(hits);
  double denom = 0.0;
  for (const auto &q : previous->particles)
    if (q.model == model && q.weight > 0.0)
      denom += q.weight * kernel_density(kernel, q.theta, theta);
  if (!(denom > 0.0))
    throw Error("internal: particle lies outside every previous kernel (zero weight denominator)");
  return prior_density(prior, theta) * static_cast<double>(hits) / denom;
}

/// Convenience ε helper: median of the accepted distances of a population.
/// Not part of the sampler itself; schedules are always user-supplied.
inline double suggest_next_epsilon(const Population &population) {
  std::vector<double> d;
  for (const auto &p : population.particles) d.push_back(p.distance);
  if (d.empty())
    throw Error("suggest_next_epsilon: empty population");
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

namespace detail {

/// Runs f(i) for i in [0, count) on `workers` threads; rethrows the first error.
template <class F> void parallel_for(std::size_t count, std::size_t workers, F &&f) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count)
        return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error)
          error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::min(workers, count);
  for (std::size_t w = 1; w < n; ++w) pool.emplace_back(body);
  body();
  for (auto &th : pool) th.join();
  if (error)
    std::rethrow_exception(error);
}

struct TaskOutcome {
  bool accepted = false;
  Particle particle;
  std::size_t hits = 0;
  std::uint64_t simulations = 0;
};

class PopulationBuilder {
public:
  PopulationBuilder(const InferenceConfig &config, std::size_t t, double epsilon,
                    const Population *previous, std::uint64_t stream_tag)
      : config_(config), t_(t), previous_(previous), stream_tag_(stream_tag) {
    test_.data = &config.data;
    test_.distance = config.distance;
    test_.epsilon = epsilon;
    test_.datasets = config.datasets_per_proposal;
    const std::size_t models = config.models.size();
    if (previous_) {
      for (std::size_t m = 0; m < models; ++m) {
        tables_.emplace_back(*previous_, m);
        if (!tables_.back().empty())
          alive_.push_back(m);
      }
      if (alive_.empty())
        throw Error("internal: previous population has no particles");
    } else {
      for (std::size_t m = 0; m < models; ++m) alive_.push_back(m);
    }
  }

  const std::vector<std::size_t> &alive() const { return alive_; }

  TaskOutcome run(std::uint64_t task) const {
    Rng rng = make_rng(config_.seed, stream_tag_ + t_, task);
    const std::size_t model =
        alive_.size() == 1
            ? alive_.front()
            : alive_[std::uniform_int_distribution<std::size_t>(0, alive_.size() - 1)(rng)];
    const auto &entry = config_.models[model];

    ParameterVector theta;
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt >= 10'000'000)
        throw Error("model '" + entry.model.name +
                    "': no proposal with positive prior density after 10^7 attempts");
      if (previous_ == nullptr) {
        theta = sample_prior(entry.prior, rng);
      } else {
        const auto &seed_particle = previous_->particles[tables_[model].draw(rng)];
        theta = perturb(entry.kernel, seed_particle.theta, rng);
      }
      if (prior_density(entry.prior, theta) > 0.0)
        break;
    }

    const auto outcome = test_.evaluate(entry.model, theta, rng);
    TaskOutcome out;
    out.simulations = outcome.simulations;
    out.hits = outcome.hits;
    out.accepted = outcome.hits > 0;
    out.particle.theta = std::move(theta);
    out.particle.model = model;
    out.particle.distance = outcome.best_distance;
    return out;
  }

private:
  const InferenceConfig &config_;
  std::size_t t_;
  const Population *previous_;
  std::uint64_t stream_tag_;
  AcceptanceTest test_;
  std::vector<WeightedIndex> tables_;
  std::vector<std::size_t> alive_;
};

struct PopulationDraft {
  Population population;
  std::vector<std::size_t> hits;
  RunStatus status = RunStatus::Complete;
  std::string message;
};

/// Draws tasks 0, 1, 2, ... and keeps accepted particles in task order until
/// N are collected. Task outcomes depend only on (seed, population, task), so
/// the result is independent of the worker count and batching.
inline PopulationDraft collect_population(const InferenceConfig &config, std::size_t t,
                                          double epsilon, const Population *previous,
                                          std::uint64_t prior_sims, std::uint64_t stream_tag,
                                          bool enforce_rate_floor) {
  PopulationBuilder builder(config, t, epsilon, previous, stream_tag);
  PopulationDraft draft;
  draft.population.epsilon = epsilon;
  draft.population.index = t;
  draft.population.sim_count = prior_sims;
  const std::size_t target = config.particles;
  const std::uint64_t budget = config.budget();
  const double floor_window =
      config.min_acceptance_rate > 0.0 ? 1.0 / config.min_acceptance_rate : 0.0;

  std::uint64_t next_task = 0;
  std::vector<TaskOutcome> batch;
  while (draft.population.particles.size() < target) {
    std::size_t batch_size = 1;
    if (config.workers > 1) {
      const auto have = draft.population.particles.size();
      const auto proposals = draft.population.proposals;
      const double rate =
          have > 0 ? static_cast<double>(have) / static_cast<double>(proposals) : 0.0;
      const double want = rate > 0.0 ? static_cast<double>(target - have) / rate : 4096.0;
      batch_size = static_cast<std::size_t>(
          std::clamp(want, 8.0 * static_cast<double>(config.workers), 65536.0));
    }
    batch.assign(batch_size, TaskOutcome{});
    parallel_for(batch_size, config.workers,
                 [&](std::size_t i) { batch[i] = builder.run(next_task + i); });
    next_task += batch_size;

    for (auto &outcome : batch) {
      auto &pop = draft.population;
      ++pop.proposals;
      pop.sim_count += outcome.simulations;
      if (outcome.accepted) {
        pop.particles.push_back(std::move(outcome.particle));
        draft.hits.push_back(outcome.hits);
        if (pop.particles.size() == target)
          break;
      }
      if (pop.proposals >= budget) {
        draft.status = RunStatus::BudgetExceeded;
        draft.message = "population " + std::to_string(t + 1) + ": proposal budget of " +
                        std::to_string(budget) + " exhausted with " +
                        std::to_string(pop.particles.size()) + " particles accepted";
        return draft;
      }
      if (enforce_rate_floor && floor_window > 0.0 &&
          static_cast<double>(pop.proposals) >= floor_window &&
          static_cast<double>(pop.particles.size()) <
              config.min_acceptance_rate * static_cast<double>(pop.proposals)) {
        draft.status = RunStatus::AcceptanceTooLow;
        draft.message = "acceptance rate below " + std::to_string(config.min_acceptance_rate) +
                        " after " + std::to_string(pop.proposals) + " proposals";
        return draft;
      }
    }
  }
  return draft;
}

inline void assign_weights(const InferenceConfig &config, PopulationDraft &draft,
                           const Population *previous, Weighting weighting) {
  auto &particles = draft.population.particles;
  parallel_for(particles.size(), config.workers, [&](std::size_t i) {
    auto &p = particles[i];
    if (weighting == Weighting::Equal) {
      p.weight = 1.0;
      return;
    }
    const auto &entry = config.models[p.model];
    p.weight = compute_weight(p.theta, p.model, previous, entry.prior, entry.kernel, draft.hits[i]);
  });
  normalize_weights(particles);
}

inline constexpr std::uint64_t smc_stream = 0;
inline constexpr std::uint64_t mcmc_stream = 1ULL << 40;

inline SmcResult run_sequence(const InferenceConfig &config, Weighting weighting,
                              bool enforce_rate_floor) {
  config.validate();
  SmcResult result;
  std::uint64_t sims = 0;
  for (std::size_t t = 0; t < config.schedule.size(); ++t) {
    const Population *previous = t == 0 ? nullptr : &result.populations.back();
    auto draft = collect_population(config, t, config.schedule[t], previous, sims, smc_stream,
                                    enforce_rate_floor);
    if (draft.status != RunStatus::Complete) {
      result.status = draft.status;
      result.message = std::move(draft.message);
      return result;
    }
    assign_weights(config, draft, previous, weighting);
    sims = draft.population.sim_count;
    result.populations.push_back(std::move(draft.population));
  }
  return result;
}

} // namespace detail

/// Rejection sampler at the final tolerance of the schedule. All weights equal.
inline SmcResult abc_rejection(const InferenceConfig &config) {
  InferenceConfig single = config;
  single.schedule = ToleranceSchedule({config.schedule.back()});
  return detail::run_sequence(single, Weighting::Importance, true);
}

/// Sequential Monte Carlo through the tolerance schedule, without resampling.
inline SmcResult abc_smc(const InferenceConfig &config) {
  return detail::run_sequence(config, Weighting::Importance, false);
}

/// Same proposal flow as abc_smc but every population is equally weighted.
inline SmcResult abc_prc_baseline(const InferenceConfig &config) {
  return detail::run_sequence(config, Weighting::Equal, false);
}

/// Joint sampling of model index and parameters. The model index is drawn
/// uniformly among the models still alive in the previous population.
inline ModelSelectionResult abc_smc_model_selection(const InferenceConfig &config) {
  if (config.models.size() < 2)
    throw ConfigError("model selection needs at least two models");
  ModelSelectionResult out;
  out.run = detail::run_sequence(config, Weighting::Importance, false);
  for (const auto &pop : out.run.populations) {
    std::vector<std::size_t> counts(config.models.size(), 0);
    for (const auto &p : pop.particles) ++counts[p.model];
    out.model_counts.push_back(std::move(counts));
  }
  return out;
}

// ---------------------------------------------------------------------------
// ABC-MCMC

struct McmcOptions {
  std::size_t chain_length = 1000; // states recorded after burn-in
  std::size_t burn_in = 0;
  KernelSpec proposal;
  bool adapt = false; // rescale the proposal during burn-in
  ParameterVector initial;
  std::size_t model = 0;
};

struct McmcResult {
  std::vector<ParameterVector> chain;
  std::uint64_t simulations = 0;
  std::uint64_t accepted = 0;
  std::uint64_t close_in_support = 0;          // proposals with prior > 0 and d <= eps
  std::uint64_t close_in_support_accepted = 0; // ... of which were accepted
  double final_scale = 1.0;
};

/// Marjoram-style ABC-MCMC at the final tolerance. When `adapt` is set the
/// proposal scale is multiplied by 1.1 after each acceptance and 0.99 after
/// each rejection during burn-in, then frozen.
inline McmcResult abc_mcmc(const InferenceConfig &config, const McmcOptions &options) {
  config.validate();
  const auto &entry = config.models.at(options.model);
  if (options.proposal.dimension() != entry.model.parameter_count())
    throw ConfigError("MCMC proposal dimension mismatch");
  if (prior_density(entry.prior, options.initial) <= 0.0)
    throw ConfigError("MCMC initial state has zero prior density");

  AcceptanceTest test{&config.data, config.distance, config.schedule.back(),
                      config.datasets_per_proposal};
  Rng rng = make_rng(config.seed, detail::mcmc_stream);
  McmcResult out;
  out.chain.reserve(options.chain_length);
  ParameterVector current = options.initial;
  double scale = 1.0;
  const std::size_t total = options.burn_in + options.chain_length;

  for (std::size_t i = 0; i < total; ++i) {
    const bool burning = i < options.burn_in;
    const KernelSpec q = options.proposal.scaled(scale);
    ParameterVector candidate = perturb(q, current, rng);
    bool accept = false;
    const double prior_new = prior_density(entry.prior, candidate);
    if (prior_new > 0.0) {
      const auto outcome = test.evaluate(entry.model, candidate, rng);
      out.simulations += outcome.simulations;
      if (outcome.hits > 0) {
        const double ratio = prior_new * kernel_density(q, candidate, current) /
                             (prior_density(entry.prior, current) * kernel_density(q, current, candidate));
        const double alpha = std::min(1.0, ratio);
        accept = alpha >= 1.0 || uniform01(rng) < alpha;
        ++out.close_in_support;
        out.close_in_support_accepted += accept;
      }
    }
    if (accept) {
      current = std::move(candidate);
      ++out.accepted;
    }
    if (burning && options.adapt)
      scale *= accept ? 1.1 : 0.99;
    if (!burning)
      out.chain.push_back(current);
  }
  out.final_scale = scale;
  return out;
}

} // namespace abcsmc

#endif // ABCSMC_SAMPLERS_HPP
