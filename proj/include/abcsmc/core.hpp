#ifndef ABCSMC_CORE_HPP
#define ABCSMC_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace abcsmc {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input (configuration, priors, schedules, datasets).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A simulation that produced non-finite state, ran away, or otherwise could
/// not produce a dataset. Samplers treat it as "distance = infinity".
class SimulationFailure : public Error {
public:
  using Error::Error;
};

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t &state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent generator for (seed, stream, substream). Every simulation task
/// owns one of these, so results never depend on which worker ran the task.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0,
                    std::uint64_t substream = 0) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= stream * 0xd1b54a32d192ed03ULL;
  std::uint64_t b = splitmix64(s);
  s ^= substream * 0x8cb92ba72f3d8dd7ULL;
  std::uint64_t c = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return Rng(seq);
}

inline double uniform01(Rng &rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Parameter vectors are plain ordered reals. Discrete coordinates (an initial
// population size, say) are flagged on the prior and kernel that act on them.
using ParameterVector = std::vector<double>;

struct Particle {
  ParameterVector theta;
  double weight = 1.0;
  std::size_t model = 0; // zero-based model index
  double distance = 0.0;
};

struct Population {
  std::vector<Particle> particles;
  double epsilon = 0.0;
  std::size_t index = 0;
  std::uint64_t proposals = 0; // proposals drawn for this population
  std::uint64_t sim_count = 0; // cumulative data-generation steps

  std::size_t size() const { return particles.size(); }
  bool empty() const { return particles.empty(); }
};

// ---------------------------------------------------------------------------
// Priors

struct PriorCoordinate {
  double lo = 0.0;
  double hi = 1.0;
  bool discrete = false;

  static PriorCoordinate uniform(double lo, double hi) { return {lo, hi, false}; }
  static PriorCoordinate integer(long lo, long hi) {
    return {static_cast<double>(lo), static_cast<double>(hi), true};
  }
};

/// Independent per-coordinate uniform box (continuous or integer-valued).
class PriorSpec {
public:
  PriorSpec() = default;
  explicit PriorSpec(std::vector<PriorCoordinate> coords) : coords_(std::move(coords)) {
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      const auto &c = coords_[i];
      if (!(c.lo < c.hi) || !std::isfinite(c.lo) || !std::isfinite(c.hi))
        throw ConfigError("prior coordinate " + std::to_string(i) +
                          ": bounds must be finite with lo < hi");
      if (c.discrete && (c.lo != std::floor(c.lo) || c.hi != std::floor(c.hi)))
        throw ConfigError("prior coordinate " + std::to_string(i) +
                          ": discrete bounds must be integers");
    }
  }

  std::size_t dimension() const { return coords_.size(); }
  const std::vector<PriorCoordinate> &coordinates() const { return coords_; }
  const PriorCoordinate &operator[](std::size_t i) const { return coords_[i]; }

private:
  std::vector<PriorCoordinate> coords_;
};

inline ParameterVector sample_prior(const PriorSpec &prior, Rng &rng) {
  ParameterVector theta(prior.dimension());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const auto &c = prior[i];
    if (c.discrete) {
      std::uniform_int_distribution<long> dist(static_cast<long>(c.lo), static_cast<long>(c.hi));
      theta[i] = static_cast<double>(dist(rng));
    } else {
      theta[i] = std::uniform_real_distribution<double>(c.lo, c.hi)(rng);
    }
  }
  return theta;
}

inline double prior_density(const PriorSpec &prior, std::span<const double> theta) {
  if (theta.size() != prior.dimension())
    throw Error("prior_density: parameter vector has length " + std::to_string(theta.size()) +
                ", prior expects " + std::to_string(prior.dimension()));
  double density = 1.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const auto &c = prior[i];
    const double x = theta[i];
    if (!(x >= c.lo && x <= c.hi))
      return 0.0;
    if (c.discrete) {
      if (x != std::floor(x))
        return 0.0;
      density /= (c.hi - c.lo + 1.0);
    } else {
      density /= (c.hi - c.lo);
    }
  }
  return density;
}

// ---------------------------------------------------------------------------
// Perturbation kernels

enum class KernelShape { Uniform, Gaussian };

struct KernelCoordinate {
  KernelShape shape = KernelShape::Uniform;
  double sigma = 1.0;
  bool discrete = false; // integer walk on {-sigma, ..., sigma}

  static KernelCoordinate uniform(double sigma) { return {KernelShape::Uniform, sigma, false}; }
  static KernelCoordinate gaussian(double sigma) { return {KernelShape::Gaussian, sigma, false}; }
  static KernelCoordinate integer(long sigma) {
    return {KernelShape::Uniform, static_cast<double>(sigma), true};
  }
};

/// Symmetric random-walk kernel, one independent component per coordinate.
class KernelSpec {
public:
  KernelSpec() = default;
  explicit KernelSpec(std::vector<KernelCoordinate> coords) : coords_(std::move(coords)) {
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      const auto &c = coords_[i];
      if (!(c.sigma > 0.0) || !std::isfinite(c.sigma))
        throw ConfigError("kernel coordinate " + std::to_string(i) + ": sigma must be > 0");
      if (c.discrete && c.sigma != std::floor(c.sigma))
        throw ConfigError("kernel coordinate " + std::to_string(i) +
                          ": integer walk needs an integer sigma");
    }
  }

  std::size_t dimension() const { return coords_.size(); }
  const std::vector<KernelCoordinate> &coordinates() const { return coords_; }
  const KernelCoordinate &operator[](std::size_t i) const { return coords_[i]; }

  /// Same shapes with every continuous sigma multiplied by `factor`.
  KernelSpec scaled(double factor) const {
    auto coords = coords_;
    for (auto &c : coords)
      if (!c.discrete)
        c.sigma *= factor;
    return KernelSpec(std::move(coords));
  }

private:
  std::vector<KernelCoordinate> coords_;
};

inline ParameterVector perturb(const KernelSpec &kernel, std::span<const double> theta, Rng &rng) {
  if (theta.size() != kernel.dimension())
    throw Error("perturb: dimension mismatch");
  ParameterVector out(theta.begin(), theta.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto &c = kernel[i];
    if (c.discrete) {
      const long s = static_cast<long>(c.sigma);
      out[i] += static_cast<double>(std::uniform_int_distribution<long>(-s, s)(rng));
    } else if (c.shape == KernelShape::Uniform) {
      out[i] += c.sigma * std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    } else {
      out[i] += std::normal_distribution<double>(0.0, c.sigma)(rng);
    }
  }
  return out;
}

inline double kernel_density(const KernelSpec &kernel, std::span<const double> from,
                             std::span<const double> to) {
  if (from.size() != kernel.dimension() || to.size() != kernel.dimension())
    throw Error("kernel_density: dimension mismatch");
  double density = 1.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    const auto &c = kernel[i];
    const double delta = std::abs(to[i] - from[i]);
    if (c.discrete) {
      if (delta > c.sigma)
        return 0.0;
      density /= (2.0 * c.sigma + 1.0);
    } else if (c.shape == KernelShape::Uniform) {
      if (delta > c.sigma)
        return 0.0;
      density /= (2.0 * c.sigma);
    } else {
      const double z = delta / c.sigma;
      density *= std::exp(-0.5 * z * z) / (c.sigma * std::sqrt(2.0 * std::numbers::pi));
    }
  }
  return density;
}

// ---------------------------------------------------------------------------
// Tolerance schedule

class ToleranceSchedule {
public:
  ToleranceSchedule() = default;
  explicit ToleranceSchedule(std::vector<double> epsilons) : eps_(std::move(epsilons)) {
    if (eps_.empty())
      throw ConfigError("tolerance schedule is empty");
    for (std::size_t i = 0; i < eps_.size(); ++i) {
      if (std::isnan(eps_[i]))
        throw ConfigError("tolerance schedule contains NaN");
      if (i > 0 && !(eps_[i] < eps_[i - 1]))
        throw ConfigError("tolerance schedule must be strictly decreasing (epsilon " +
                          std::to_string(i + 1) + ")");
    }
    if (eps_.back() < 0.0)
      throw ConfigError("final tolerance must be >= 0");
  }

  std::size_t size() const { return eps_.size(); }
  double operator[](std::size_t t) const { return eps_[t]; }
  double back() const { return eps_.back(); }
  const std::vector<double> &values() const { return eps_; }

private:
  std::vector<double> eps_;
};

// ---------------------------------------------------------------------------
// Weights and weighted sampling

/// Normalizes weights to sum to one within each model's sub-population.
inline void normalize_weights(std::vector<Particle> &particles) {
  std::size_t models = 0;
  for (const auto &p : particles)
    models = std::max(models, p.model + 1);
  std::vector<double> totals(models, 0.0);
  for (const auto &p : particles)
    totals[p.model] += p.weight;
  for (auto &p : particles)
    if (totals[p.model] > 0.0)
      p.weight /= totals[p.model];
}

/// Cumulative-weight table over a (possibly model-filtered) set of particles.
class WeightedIndex {
public:
  WeightedIndex() = default;
  WeightedIndex(const Population &population, std::optional<std::size_t> model_filter) {
    double acc = 0.0;
    for (std::size_t i = 0; i < population.particles.size(); ++i) {
      const auto &p = population.particles[i];
      if (model_filter && p.model != *model_filter)
        continue;
      if (!(p.weight > 0.0))
        continue;
      acc += p.weight;
      index_.push_back(i);
      cumulative_.push_back(acc);
    }
  }

  bool empty() const { return index_.empty(); }
  std::size_t size() const { return index_.size(); }
  const std::vector<std::size_t> &members() const { return index_; }

  /// Population index of a draw; requires !empty().
  std::size_t draw(Rng &rng) const {
    const double u = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end())
      --it;
    return index_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

private:
  std::vector<std::size_t> index_;
  std::vector<double> cumulative_;
};

/// One particle drawn proportional to weight; nullopt means the filtered model
/// has died out (no particles with positive weight remain).
inline std::optional<Particle> weighted_sample(const Population &population, Rng &rng,
                                               std::optional<std::size_t> model_filter = {}) {
  WeightedIndex table(population, model_filter);
  if (table.empty())
    return std::nullopt;
  return population.particles[table.draw(rng)];
}

} // namespace abcsmc

#endif // ABCSMC_CORE_HPP
