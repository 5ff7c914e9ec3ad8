#include <cmath>

#include <gtest/gtest.h>

#include "abcsmc/analysis.hpp"

using namespace abcsmc;

namespace {

Population population_of(const std::vector<std::vector<double>> &thetas, const std::vector<double> &w) {
  Population pop;
  for (std::size_t i = 0; i < thetas.size(); ++i) pop.particles.push_back({thetas[i], w[i], 0, 0.0});
  return pop;
}

std::vector<ParameterVector> gaussian_cloud(Rng &rng, std::size_t n, std::size_t p) {
  std::normal_distribution<double> z;
  std::vector<ParameterVector> pts(n, ParameterVector(p));
  for (auto &x : pts)
    for (double &v : x) v = z(rng);
  return pts;
}

double orthonormality_error(const PcaReport &r) {
  double worst = 0.0;
  for (std::size_t i = 0; i < r.eigenvectors.size(); ++i)
    for (std::size_t j = 0; j < r.eigenvectors.size(); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < r.eigenvectors[i].size(); ++k) dot += r.eigenvectors[i][k] * r.eigenvectors[j][k];
      worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

} // namespace

TEST(Quantile, SmallExamples) {
  const std::vector<double> v{1, 2, 3}, w(3, 1.0 / 3);
  EXPECT_EQ(weighted_quantile(v, w, 0.5), 2.0);
  EXPECT_EQ(weighted_quantile(v, w, 0.0), 1.0);
  EXPECT_EQ(weighted_quantile(v, w, 1.0), 3.0);
  const std::vector<double> v2{5, 0, 10}, w2{0.999, 0.0005, 0.0005};
  EXPECT_EQ(weighted_quantile(v2, w2, 0.5), 5.0);
  // left-continuous: F(2) = 0.5 exactly, so the median is 2 not 3
  const std::vector<double> v3{1, 2, 3, 4}, w3(4, 0.25);
  EXPECT_EQ(weighted_quantile(v3, w3, 0.5), 2.0);
  EXPECT_THROW(weighted_quantile(v, w, 1.5), Error);
  EXPECT_THROW(weighted_quantile(v, std::vector<double>{1, 1}, 0.5), Error);
}

TEST(Summary, MedianAndRange) {
  const auto pop = population_of({{1, 10}, {2, 20}, {3, 30}}, {1, 1, 1});
  const auto s = posterior_summary(pop);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].median, 2.0);
  EXPECT_EQ(s[1].median, 20.0);
  EXPECT_EQ(s[0].lower, 1.0);
  EXPECT_EQ(s[1].upper, 30.0);
}

TEST(Summary, PermutationAndRescalingInvariant) {
  Rng rng = make_rng(1);
  std::vector<std::vector<double>> th;
  std::vector<double> w;
  std::exponential_distribution<double> e(1.0);
  for (const auto &x : gaussian_cloud(rng, 200, 3)) {
    th.push_back(x);
    w.push_back(e(rng));
  }
  const auto base = posterior_summary(population_of(th, w));
  auto w2 = w;
  for (double &x : w2) x *= 37.5;
  std::vector<std::size_t> perm(th.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<double>> th3;
  std::vector<double> w3;
  for (auto i : perm) {
    th3.push_back(th[i]);
    w3.push_back(w[i]);
  }
  for (const auto &other : {posterior_summary(population_of(th, w2)), posterior_summary(population_of(th3, w3))})
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(other[j].lower, base[j].lower);
      EXPECT_EQ(other[j].median, base[j].median);
      EXPECT_EQ(other[j].upper, base[j].upper);
    }
}

TEST(Summary, ModelFilter) {
  Population pop = population_of({{1}, {2}, {100}}, {0.5, 0.5, 1.0});
  pop.particles[2].model = 1;
  EXPECT_EQ(posterior_summary(pop, 1)[0].median, 100.0);
  EXPECT_THROW(posterior_summary(pop, 2), Error);
}

TEST(Interquantile, FirstIsOneAndShrinks) {
  Rng rng = make_rng(2);
  std::vector<Population> pops;
  for (double spread : {1.0, 0.5, 0.1}) {
    std::vector<std::vector<double>> th;
    for (auto x : gaussian_cloud(rng, 500, 2)) {
      for (double &v : x) v *= spread;
      th.push_back(x);
    }
    pops.push_back(population_of(th, std::vector<double>(th.size(), 1.0)));
  }
  const auto r = interquantile_trajectory(pops);
  ASSERT_EQ(r.size(), 2u);
  for (const auto &series : r) {
    EXPECT_EQ(series[0], 1.0);
    EXPECT_LT(series[2], series[1]);
    EXPECT_LT(series[2], 0.2);
  }
}

TEST(BayesFactor, ReferenceCounts) {
  const std::vector<std::size_t> c{664, 230, 0, 106};
  EXPECT_NEAR(bayes_factor(c, 0, 1), 2.887, 1e-3);
  EXPECT_NEAR(bayes_factor(c, 0, 3), 6.264, 1e-3);
  EXPECT_TRUE(std::isinf(bayes_factor(c, 0, 2)));
  const std::vector<std::size_t> eq{10, 10};
  EXPECT_EQ(bayes_factor(eq, 0, 1), 1.0);
  EXPECT_THROW(bayes_factor(c, 0, 4), Error);
}

TEST(BayesFactor, Reciprocity) {
  Rng rng = make_rng(3);
  std::uniform_int_distribution<std::size_t> n(1, 1000);
  for (int i = 0; i < 100; ++i) {
    const std::vector<std::size_t> c{n(rng), n(rng)};
    EXPECT_NEAR(bayes_factor(c, 0, 1) * bayes_factor(c, 1, 0), 1.0, 1e-12);
  }
}

TEST(BayesFactor, GeneralFormDividesPriorOdds) {
  const std::vector<double> post{0.6, 0.2}, prior{0.5, 0.5}, skewed{0.75, 0.25};
  EXPECT_NEAR(bayes_factor(post, prior, 0, 1), 3.0, 1e-12);
  EXPECT_NEAR(bayes_factor(post, skewed, 0, 1), 1.0, 1e-12);
}

TEST(BayesFactor, Categories) {
  EXPECT_EQ(interpret_bayes_factor(2.9), "very weak");
  EXPECT_EQ(interpret_bayes_factor(6.3), "positive");
  EXPECT_EQ(interpret_bayes_factor(1.0), "very weak");
  EXPECT_EQ(interpret_bayes_factor(3.0), "very weak");
  EXPECT_EQ(interpret_bayes_factor(20.0), "positive");
  EXPECT_EQ(interpret_bayes_factor(21.0), "strong");
  EXPECT_EQ(interpret_bayes_factor(151.0), "very strong");
  EXPECT_EQ(interpret_bayes_factor(1.0 / 6.3), "positive");
  EXPECT_THROW(interpret_bayes_factor(0.0), Error);
}

TEST(Pca, FractionsAndOrthonormality) {
  Rng rng = make_rng(4);
  auto pts = gaussian_cloud(rng, 300, 4);
  for (auto &x : pts) {
    x[1] += 0.8 * x[0];
    x[3] = 0.3 * x[3] - x[2];
  }
  std::vector<double> w(pts.size());
  std::exponential_distribution<double> e(1.0);
  for (double &x : w) x = e(rng);
  for (bool corr : {true, false}) {
    const auto r = pca_sensitivity(pts, w, corr);
    double sum = 0.0;
    for (double f : r.fractions) sum += f;
    EXPECT_NEAR(sum, 1.0, 1e-10);
    EXPECT_LT(orthonormality_error(r), 1e-8);
    for (std::size_t i = 0; i + 1 < r.eigenvalues.size(); ++i) EXPECT_GE(r.eigenvalues[i], r.eigenvalues[i + 1]);
    for (double l : r.eigenvalues) EXPECT_GE(l, 0.0);
    for (const auto &row : r.loadings) {
      double s = 0.0;
      for (double v : row) s += v;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Pca, CorrelationModeIsAffineInvariant) {
  Rng rng = make_rng(5);
  auto pts = gaussian_cloud(rng, 400, 3);
  for (auto &x : pts) x[2] += 0.5 * x[0] - 0.2 * x[1];
  const std::vector<double> w(pts.size(), 1.0);
  const auto base = pca_sensitivity(pts, w, true);
  auto moved = pts;
  for (auto &x : moved) {
    x[0] = 1000.0 * x[0] + 3.0;
    x[1] = 0.001 * x[1] - 7.0;
    x[2] = 42.0 * x[2];
  }
  const auto r = pca_sensitivity(moved, w, true);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r.eigenvalues[i], base.eigenvalues[i], 1e-8);
}

TEST(Pca, IsotropicSample) {
  Rng rng = make_rng(6);
  const auto pts = gaussian_cloud(rng, 1000, 4);
  const auto r = pca_sensitivity(pts, std::vector<double>(pts.size(), 1.0), true);
  for (double f : r.fractions) EXPECT_NEAR(f, 0.25, 0.05);
}

TEST(Pca, PerfectlyCorrelatedPair) {
  Rng rng = make_rng(7);
  std::vector<ParameterVector> pts;
  std::normal_distribution<double> z;
  for (int i = 0; i < 100; ++i) {
    const double x = z(rng);
    pts.push_back({x, 2.0 * x + 1.0});
  }
  const auto r = pca_sensitivity(pts, std::vector<double>(pts.size(), 1.0), true);
  EXPECT_NEAR(r.fractions[0], 1.0, 1e-9);
  EXPECT_NEAR(r.fractions[1], 0.0, 1e-9);
  EXPECT_NEAR(r.loadings[1][0], 0.5, 1e-9);
}

TEST(Pca, StiffDirectionHasSmallestEigenvalue) {
  Rng rng = make_rng(8);
  std::vector<ParameterVector> pts;
  std::normal_distribution<double> z;
  for (int i = 0; i < 2000; ++i) {
    const double u = z(rng), v = z(rng), s = 0.05 * z(rng);
    pts.push_back({u, v + s, v - s}); // x1 - x2 is tightly constrained
  }
  const auto r = pca_sensitivity(pts, std::vector<double>(pts.size(), 1.0), true);
  const auto &stiff = r.loadings.back();
  EXPECT_NEAR(stiff[1] + stiff[2], 1.0, 0.01);
}

TEST(Pca, RejectsTooFewParticles) {
  const std::vector<ParameterVector> pts{{1, 2}, {2, 3}};
  EXPECT_THROW(pca_sensitivity(pts, std::vector<double>{1, 1}), Error);
  const std::vector<ParameterVector> flat{{1, 2}, {1, 3}, {1, 5}};
  EXPECT_THROW(pca_sensitivity(flat, std::vector<double>{1, 1, 1}, true), Error);
}
