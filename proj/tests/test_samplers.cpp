#include <cmath>

#include <gtest/gtest.h>

#include "abcsmc/analysis.hpp"
#include "abcsmc/samplers.hpp"
#include "stat_oracles.hpp"

using namespace abcsmc;

namespace {

InferenceConfig lv_config(std::vector<double> eps, std::size_t n, std::uint64_t seed = 1) {
  InferenceConfig c;
  c.models = {ModelEntry(lv_ode())};
  c.schedule = ToleranceSchedule(std::move(eps));
  c.particles = n;
  c.data = generate_data(lv_ode_recipe());
  c.seed = seed;
  return c;
}

InferenceConfig mixture_config(std::vector<double> eps, std::size_t n, std::uint64_t seed = 1) {
  InferenceConfig c;
  c.models = {ModelEntry(normal_mixture_toy())};
  c.schedule = ToleranceSchedule(std::move(eps));
  c.particles = n;
  c.data = normal_mixture_dataset();
  c.seed = seed;
  return c;
}

std::vector<double> coordinate(const Population &pop, std::size_t j) {
  std::vector<double> v;
  for (const auto &p : pop.particles) v.push_back(p.theta[j]);
  return v;
}

std::vector<double> weights(const Population &pop) {
  std::vector<double> w;
  for (const auto &p : pop.particles) w.push_back(p.weight);
  return w;
}

void expect_same_particles(const Population &a, const Population &b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.particles[i].theta, b.particles[i].theta);
    EXPECT_EQ(a.particles[i].weight, b.particles[i].weight);
    EXPECT_EQ(a.particles[i].model, b.particles[i].model);
    EXPECT_EQ(a.particles[i].distance, b.particles[i].distance);
  }
  EXPECT_EQ(a.sim_count, b.sim_count);
  EXPECT_EQ(a.proposals, b.proposals);
}

} // namespace

TEST(Weight, FirstPopulationIsHitCount) {
  const PriorSpec prior({PriorCoordinate::uniform(-10, 10)});
  const KernelSpec k({KernelCoordinate::uniform(0.1)});
  const std::vector<double> th{0.3};
  EXPECT_EQ(compute_weight(th, 0, nullptr, prior, k, 1), 1.0);
  EXPECT_EQ(compute_weight(th, 0, nullptr, prior, k, 4), 4.0);
}

TEST(Weight, SinglePreviousParticle) {
  const PriorSpec prior({PriorCoordinate::uniform(-10, 10), PriorCoordinate::uniform(-10, 10)});
  const KernelSpec k({KernelCoordinate::uniform(0.1), KernelCoordinate::uniform(0.1)});
  Population prev;
  prev.particles.push_back({{1.0, 1.0}, 1.0, 0, 0.0});
  // prior 1/400 over kernel density 25
  EXPECT_NEAR(compute_weight(std::vector<double>{1.05, 0.95}, 0, &prev, prior, k, 1), 1e-4, 1e-15);
  EXPECT_THROW(compute_weight(std::vector<double>{1.2, 1.0}, 0, &prev, prior, k, 1), Error);
}

TEST(Weight, MatchesDirectSummation) {
  const PriorSpec prior({PriorCoordinate::uniform(0, 5), PriorCoordinate::uniform(0, 5)});
  const KernelSpec k({KernelCoordinate::gaussian(0.7), KernelCoordinate::uniform(1.0)});
  Population prev;
  const double w[] = {0.1, 0.3, 0.2, 0.25, 0.15};
  const double xs[][2] = {{1.0, 1.0}, {1.5, 2.0}, {2.0, 1.2}, {2.5, 2.5}, {1.2, 1.8}};
  for (int i = 0; i < 5; ++i) prev.particles.push_back({{xs[i][0], xs[i][1]}, w[i], 0, 0.0});
  // particles of another model must not enter the sum
  prev.particles.push_back({{1.6, 1.6}, 1.0, 1, 0.0});
  const std::vector<double> th{1.6, 1.6};
  double sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double g = std::exp(-0.5 * std::pow((th[0] - xs[i][0]) / 0.7, 2)) / (0.7 * std::sqrt(2 * M_PI));
    const double u = std::abs(th[1] - xs[i][1]) <= 1.0 ? 0.5 : 0.0;
    sum += w[i] * g * u;
  }
  EXPECT_NEAR(compute_weight(th, 0, &prev, prior, k, 1), (1.0 / 25) / sum, 1e-12);
  EXPECT_NEAR(compute_weight(th, 0, &prev, prior, k, 3), 3 * (1.0 / 25) / sum, 1e-12);
}

TEST(Rejection, InfiniteToleranceReturnsPrior) {
  auto c = lv_config({INFINITY}, 1000);
  const auto res = abc_rejection(c);
  ASSERT_TRUE(res.complete());
  for (std::size_t j = 0; j < 2; ++j) {
    const double p = oracle::ks_one_sample(coordinate(res.last(), j),
                                           [](double x) { return std::clamp((x + 10.0) / 20.0, 0.0, 1.0); });
    EXPECT_GT(p, 0.01) << "parameter " << j;
  }
  EXPECT_EQ(res.last().proposals, 1000u);
}

TEST(Rejection, AcceptedParticlesSatisfyTest) {
  auto c = lv_config({30.0}, 300);
  const auto res = abc_rejection(c);
  for (const auto &p : res.last().particles) {
    EXPECT_LE(p.distance, 30.0);
    EXPECT_GT(prior_density(c.models[0].prior, p.theta), 0.0);
    EXPECT_DOUBLE_EQ(p.weight, 1.0 / 300);
  }
  EXPECT_EQ(res.last().sim_count, res.last().proposals);
}

TEST(Rejection, AcceptanceFloorAborts) {
  auto c = lv_config({0.0}, 10);
  c.min_acceptance_rate = 1e-3;
  const auto res = abc_rejection(c);
  EXPECT_EQ(res.status, RunStatus::AcceptanceTooLow);
  EXPECT_TRUE(res.populations.empty());
  EXPECT_NE(res.message.find("acceptance rate"), std::string::npos);
}

TEST(Smc, SingleToleranceMatchesRejection) {
  auto c = lv_config({30.0}, 500, 3);
  const auto smc = abc_smc(c);
  // same stream: bit-identical
  expect_same_particles(smc.last(), abc_rejection(c).last());
  c.seed = 4;
  const auto rej = abc_rejection(c);
  for (std::size_t j = 0; j < 2; ++j)
    EXPECT_GT(oracle::ks_two_sample(coordinate(smc.last(), j), weights(smc.last()), coordinate(rej.last(), j),
                                    weights(rej.last())),
              0.01);
}

TEST(Smc, WeightsPositiveAndNormalized) {
  const auto res = abc_smc(lv_config({30, 16, 6}, 300));
  ASSERT_EQ(res.populations.size(), 3u);
  std::uint64_t prev_sims = 0;
  for (const auto &pop : res.populations) {
    double sum = 0.0;
    for (const auto &p : pop.particles) {
      EXPECT_GT(p.weight, 0.0);
      EXPECT_TRUE(std::isfinite(p.weight));
      EXPECT_LE(p.distance, pop.epsilon);
      sum += p.weight;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_GT(pop.sim_count, prev_sims);
    prev_sims = pop.sim_count;
  }
}

TEST(Smc, AgreesWithRejectionAtFinalTolerance) {
  // full-support walks, so agreement rests on the weights and not on where
  // the 0.1 boxes happen to reach
  auto c = lv_config({30, 16, 8}, 500, 5);
  c.models[0].kernel = KernelSpec({KernelCoordinate::gaussian(0.5), KernelCoordinate::gaussian(0.5)});
  const auto smc = abc_smc(c);
  const auto rej = abc_rejection(lv_config({8}, 500, 6));
  for (std::size_t j = 0; j < 2; ++j)
    EXPECT_GT(oracle::ks_two_sample(coordinate(smc.last(), j), weights(smc.last()), coordinate(rej.last(), j),
                                    weights(rej.last())),
              0.01)
        << "parameter " << j;
  EXPECT_LT(smc.last().sim_count, rej.last().sim_count);
}

TEST(Smc, InterquantileRangesShrink) {
  const auto res = abc_smc(lv_config({30, 16, 6, 5, 4.3}, 500, 7));
  const auto widths = interquantile_trajectory(res.populations);
  for (const auto &series : widths) {
    for (std::size_t t = 1; t < series.size(); ++t) EXPECT_LE(series[t], 1.1 * series[t - 1]);
    EXPECT_LT(series.back(), 0.5);
  }
}

TEST(Smc, WorkerCountDoesNotChangeOutput) {
  auto c = lv_config({30, 16, 6}, 200, 9);
  const auto one = abc_smc(c);
  c.workers = 3;
  const auto three = abc_smc(c);
  ASSERT_EQ(one.populations.size(), three.populations.size());
  for (std::size_t t = 0; t < one.populations.size(); ++t) expect_same_particles(one.populations[t], three.populations[t]);
}

TEST(Smc, BudgetAbortKeepsPartialResults) {
  auto c = lv_config({30, 1e-6}, 50);
  c.proposal_budget = 2000;
  const auto res = abc_smc(c);
  EXPECT_EQ(res.status, RunStatus::BudgetExceeded);
  ASSERT_EQ(res.populations.size(), 1u);
  EXPECT_NE(res.message.find("budget"), std::string::npos);
}

TEST(Smc, StochasticModelWithSeveralDatasets) {
  InferenceConfig c;
  c.models = {ModelEntry(normal_mixture_toy())};
  c.schedule = ToleranceSchedule({1.0, 0.3});
  c.particles = 200;
  c.datasets_per_proposal = 5;
  c.data = normal_mixture_dataset();
  const auto res = abc_smc(c);
  ASSERT_TRUE(res.complete());
  EXPECT_EQ(res.last().sim_count, 5 * (res.populations[0].proposals + res.last().proposals));
  double sum = 0.0;
  for (const auto &p : res.last().particles) sum += p.weight;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Smc, RejectsInvalidConfig) {
  auto c = lv_config({30}, 10);
  c.particles = 0;
  EXPECT_THROW(abc_smc(c), ConfigError);
  c = lv_config({30}, 10);
  c.models[0].kernel = KernelSpec({KernelCoordinate::uniform(0.1)});
  EXPECT_THROW(abc_smc(c), ConfigError);
  c = lv_config({30}, 10);
  c.datasets_per_proposal = 0;
  EXPECT_THROW(abc_smc(c), ConfigError);
  c = lv_config({30}, 10);
  c.data = Dataset(std::vector<double>{1.0}, {"z"});
  EXPECT_THROW(abc_smc(c), ConfigError);
}

TEST(Prc, SinglePopulationEqualsRejection) {
  const auto c = mixture_config({0.5}, 200, 11);
  expect_same_particles(abc_prc_baseline(c).last(), abc_rejection(c).last());
}

TEST(Prc, WideKernelMatchesSmc) {
  double prc = 0.0, smc = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto c = mixture_config(normal_mixture_schedule(), 100, 100 + s);
    c.models[0].kernel = KernelSpec({KernelCoordinate::uniform(20.0)});
    const auto a = abc_prc_baseline(c), b = abc_smc(c);
    prc += oracle::weighted_variance(coordinate(a.last(), 0), weights(a.last())) / 10;
    smc += oracle::weighted_variance(coordinate(b.last(), 0), weights(b.last())) / 10;
  }
  EXPECT_NEAR(prc, smc, 0.1);
  EXPECT_NEAR(smc, 0.505, 0.15);
}

TEST(Mcmc, AcceptsEveryCloseProposalUnderFlatPrior) {
  auto c = lv_config({6.0}, 1);
  McmcOptions o;
  o.chain_length = 2000;
  o.proposal = KernelSpec({KernelCoordinate::gaussian(0.1), KernelCoordinate::gaussian(0.1)});
  o.initial = {1.0, 1.0};
  const auto r = abc_mcmc(c, o);
  EXPECT_EQ(r.chain.size(), 2000u);
  EXPECT_GT(r.close_in_support, 100u);
  EXPECT_EQ(r.close_in_support_accepted, r.close_in_support);
  EXPECT_EQ(r.accepted, r.close_in_support);
}

TEST(Mcmc, OutOfSupportProposalRepeatsState) {
  InferenceConfig c = mixture_config({INFINITY}, 1);
  c.models[0].prior = PriorSpec({PriorCoordinate::uniform(0, 1)});
  McmcOptions o;
  o.chain_length = 2000;
  o.proposal = KernelSpec({KernelCoordinate::uniform(50.0)});
  o.initial = {0.5};
  const auto r = abc_mcmc(c, o);
  std::size_t moves = 0;
  ParameterVector prev = o.initial;
  for (const auto &x : r.chain) {
    EXPECT_GE(x[0], 0.0);
    EXPECT_LE(x[0], 1.0);
    moves += x != prev;
    prev = x;
  }
  EXPECT_EQ(moves, r.accepted);
  EXPECT_LT(r.accepted, 100u); // only about 1 in 100 proposals lands in [0, 1]
  EXPECT_EQ(r.simulations, r.accepted);
}

TEST(Mcmc, AdaptationChangesScaleOnlyDuringBurnIn) {
  auto c = lv_config({6.0}, 1);
  McmcOptions o;
  o.chain_length = 200;
  o.burn_in = 300;
  o.adapt = true;
  o.proposal = KernelSpec({KernelCoordinate::gaussian(1.0), KernelCoordinate::gaussian(1.0)});
  o.initial = {1.0, 1.0};
  const auto r = abc_mcmc(c, o);
  EXPECT_LT(r.final_scale, 1.0); // a wide start is mostly rejected
  o.adapt = false;
  EXPECT_EQ(abc_mcmc(c, o).final_scale, 1.0);
  o.initial = {20.0, 0.0};
  EXPECT_THROW(abc_mcmc(c, o), ConfigError);
}

TEST(Selection, IdenticalModelsShareMassEvenly) {
  InferenceConfig c;
  for (int i = 0; i < 3; ++i) c.models.emplace_back(normal_mixture_toy());
  c.schedule = ToleranceSchedule({2.0, 1.0});
  c.particles = 900;
  c.data = normal_mixture_dataset();
  c.seed = 13;
  const auto res = abc_smc_model_selection(c);
  ASSERT_TRUE(res.run.complete());
  for (const auto &counts : res.model_counts) {
    const std::vector<double> obs(counts.begin(), counts.end());
    EXPECT_GT(oracle::chi_square(obs, std::vector<double>(3, 1.0 / 3)), 0.001);
    EXPECT_EQ(std::accumulate(counts.begin(), counts.end(), std::size_t{0}), 900u);
  }
  for (std::size_t m = 0; m < 3; ++m) {
    double sum = 0.0;
    for (const auto &p : res.submodel(1, m).particles) {
      EXPECT_GT(p.weight, 0.0);
      sum += p.weight;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Selection, DeadModelStaysDead) {
  // the second model's prior sits far from the data and cannot reach the tolerance
  InferenceConfig c;
  c.models.emplace_back(normal_mixture_toy());
  auto far = normal_mixture_toy();
  far.prior = PriorSpec({PriorCoordinate::uniform(50, 60)});
  c.models.emplace_back(far, far.prior, far.kernel);
  c.schedule = ToleranceSchedule({1.0, 0.5});
  c.particles = 100;
  c.data = normal_mixture_dataset();
  const auto res = abc_smc_model_selection(c);
  ASSERT_TRUE(res.run.complete());
  for (const auto &counts : res.model_counts) {
    EXPECT_EQ(counts[1], 0u);
    EXPECT_EQ(counts[0], 100u);
  }
  EXPECT_THROW(abc_smc_model_selection(mixture_config({1.0}, 10)), ConfigError);
}

TEST(Epsilon, SuggestionIsMedianDistance) {
  Population pop;
  for (double d : {5.0, 1.0, 3.0}) pop.particles.push_back({{0}, 1.0, 0, d});
  EXPECT_EQ(suggest_next_epsilon(pop), 3.0);
  EXPECT_THROW(suggest_next_epsilon(Population{}), Error);
}
