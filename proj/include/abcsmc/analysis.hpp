#ifndef ABCSMC_ANALYSIS_HPP
#define ABCSMC_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "abcsmc/core.hpp"

namespace abcsmc {

/// Left-continuous inverse of the weighted empirical CDF: the smallest value
/// x with F(x) >= q. Weights need not be normalized.
inline double weighted_quantile(std::span<const double> values, std::span<const double> weights,
                                double q) {
  if (values.empty() || values.size() != weights.size())
    throw Error("weighted_quantile: need equally many values and weights (and at least one)");
  if (!(q >= 0.0 && q <= 1.0))
    throw Error("weighted_quantile: q must lie in [0, 1]");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0))
    throw Error("weighted_quantile: weights sum to zero");
  const double target = q * total - 1e-12 * total;
  double cum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    cum += weights[order[k]];
    // all copies of a tied value share one CDF step
    if (k + 1 < order.size() && values[order[k + 1]] == values[order[k]])
      continue;
    if (cum >= target && weights[order[k]] >= 0.0 && cum > 0.0)
      return values[order[k]];
  }
  return values[order.back()];
}

struct ParameterSummary {
  double lower = 0.0;  // 2.5% quantile
  double median = 0.0;
  double upper = 0.0;  // 97.5% quantile
};

namespace detail {

inline std::vector<const Particle *> select_model(const Population &population,
                                                  std::optional<std::size_t> model) {
  std::vector<const Particle *> out;
  for (const auto &p : population.particles)
    if (!model || p.model == *model)
      out.push_back(&p);
  return out;
}

inline void column(const std::vector<const Particle *> &ps, std::size_t j,
                   std::vector<double> &values, std::vector<double> &weights) {
  values.clear();
  weights.clear();
  for (const auto *p : ps) {
    values.push_back(p->theta.at(j));
    weights.push_back(p->weight);
  }
}

} // namespace detail

inline std::vector<ParameterSummary> posterior_summary(const Population &population,
                                                       std::optional<std::size_t> model = {}) {
  const auto ps = detail::select_model(population, model);
  if (ps.empty())
    throw Error("posterior_summary: no particles");
  std::vector<ParameterSummary> out(ps.front()->theta.size());
  std::vector<double> v, w;
  for (std::size_t j = 0; j < out.size(); ++j) {
    detail::column(ps, j, v, w);
    out[j] = {weighted_quantile(v, w, 0.025), weighted_quantile(v, w, 0.5),
              weighted_quantile(v, w, 0.975)};
  }
  return out;
}

/// Width of the central `mass` interval of every parameter in every
/// population, divided by its width in the first population.
/// Result is indexed [parameter][population].
inline std::vector<std::vector<double>>
interquantile_trajectory(std::span<const Population> populations, double mass = 0.95,
                         std::optional<std::size_t> model = {}) {
  if (populations.empty())
    throw Error("interquantile_trajectory: no populations");
  const double lo = 0.5 * (1.0 - mass), hi = 1.0 - lo;
  std::vector<std::vector<double>> widths;
  std::vector<double> v, w;
  for (const auto &pop : populations) {
    const auto ps = detail::select_model(pop, model);
    if (ps.empty())
      throw Error("interquantile_trajectory: population without particles of the model");
    if (widths.empty())
      widths.resize(ps.front()->theta.size());
    for (std::size_t j = 0; j < widths.size(); ++j) {
      detail::column(ps, j, v, w);
      widths[j].push_back(weighted_quantile(v, w, hi) - weighted_quantile(v, w, lo));
    }
  }
  for (auto &series : widths) {
    const double base = series.front();
    for (double &x : series) x = base > 0.0 ? x / base : (x > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  }
  return widths;
}

/// Posterior odds of model i over model j from particle counts (uniform model
/// prior). Infinity when model j has no particles.
inline double bayes_factor(std::span<const std::size_t> counts, std::size_t i, std::size_t j) {
  if (i >= counts.size() || j >= counts.size())
    throw Error("bayes_factor: model index out of range");
  if (counts[j] == 0)
    return std::numeric_limits<double>::infinity();
  return static_cast<double>(counts[i]) / static_cast<double>(counts[j]);
}

/// General form: posterior odds divided by prior odds.
inline double bayes_factor(std::span<const double> posterior, std::span<const double> prior,
                           std::size_t i, std::size_t j) {
  if (posterior[j] == 0.0)
    return std::numeric_limits<double>::infinity();
  return (posterior[i] / posterior[j]) / (prior[i] / prior[j]);
}

/// Evidence category of a Bayes factor. Values below 1 are read as 1/B in
/// favour of the other model.
inline std::string interpret_bayes_factor(double b) {
  if (!(b > 0.0))
    throw Error("interpret_bayes_factor: Bayes factor must be positive");
  if (b < 1.0)
    b = 1.0 / b;
  if (b <= 3.0) return "very weak";
  if (b <= 20.0) return "positive";
  if (b <= 150.0) return "strong";
  return "very strong";
}

struct PcaReport {
  std::vector<double> eigenvalues;               // descending
  std::vector<std::vector<double>> eigenvectors; // row i: coefficients of eigen-parameter i
  std::vector<double> fractions;                 // eigenvalue / trace
  std::vector<std::vector<double>> loadings;     // row i: a_ij^2 / sum_j a_ij^2
};

/// PCA of a weighted sample. With `use_correlation` the eigendecomposition is
/// of the weighted correlation matrix, otherwise of the weighted covariance.
inline PcaReport pca_sensitivity(std::span<const ParameterVector> points,
                                 std::span<const double> weights, bool use_correlation = true) {
  const std::size_t n = points.size();
  if (n == 0 || weights.size() != n)
    throw Error("pca_sensitivity: need one weight per point");
  const std::size_t p = points.front().size();
  if (n <= p)
    throw Error("pca_sensitivity: need more particles than parameters");

  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  double w2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights[i] / wsum;
    w2 += w * w;
    for (std::size_t j = 0; j < p; ++j) mean(static_cast<Eigen::Index>(j)) += w * points[i][j];
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Eigen::VectorXd d(static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights[i] / wsum;
    for (std::size_t j = 0; j < p; ++j)
      d(static_cast<Eigen::Index>(j)) = points[i][j] - mean(static_cast<Eigen::Index>(j));
    cov.noalias() += w * d * d.transpose();
  }
  if (w2 < 1.0)
    cov /= (1.0 - w2);

  if (use_correlation) {
    Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    for (Eigen::Index j = 0; j < sd.size(); ++j)
      if (!(sd(j) > 0.0))
        throw Error("pca_sensitivity: parameter " + std::to_string(j) + " has zero variance");
    cov = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw Error("pca_sensitivity: eigendecomposition failed");
  const auto &values = solver.eigenvalues();
  const auto &vectors = solver.eigenvectors();
  const double trace = values.sum();

  PcaReport report;
  for (Eigen::Index k = values.size() - 1; k >= 0; --k) {
    Eigen::VectorXd a = vectors.col(k);
    Eigen::Index big = 0;
    a.cwiseAbs().maxCoeff(&big);
    if (a(big) < 0.0)
      a = -a; // fix the sign so output is reproducible
    const double lambda = std::max(values(k), 0.0);
    report.eigenvalues.push_back(lambda);
    report.fractions.push_back(lambda / trace);
    std::vector<double> row(a.data(), a.data() + a.size());
    const double norm2 = a.squaredNorm();
    std::vector<double> load(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) load[j] = row[j] * row[j] / norm2;
    report.eigenvectors.push_back(std::move(row));
    report.loadings.push_back(std::move(load));
  }
  return report;
}

inline PcaReport pca_sensitivity(const Population &population, bool use_correlation = true,
                                 std::optional<std::size_t> model = {}) {
  std::vector<ParameterVector> points;
  std::vector<double> weights;
  for (const auto &p : population.particles) {
    if (model && p.model != *model)
      continue;
    points.push_back(p.theta);
    weights.push_back(p.weight);
  }
  return pca_sensitivity(points, weights, use_correlation);
}

} // namespace abcsmc

#endif // ABCSMC_ANALYSIS_HPP
