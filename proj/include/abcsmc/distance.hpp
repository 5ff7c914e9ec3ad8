#ifndef ABCSMC_DISTANCE_HPP
#define ABCSMC_DISTANCE_HPP

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "abcsmc/core.hpp"
#include "abcsmc/simulate.hpp"

namespace abcsmc {

/// Observed (or simulated) time series. Columns whose `observed` flag is
/// false are unobserved species; their cells are NaN and never compared.
struct Dataset {
  std::vector<double> times;
  std::vector<std::string> species;
  std::vector<bool> observed;
  std::vector<double> values; // row-major, times x species

  Dataset() = default;
  Dataset(std::vector<double> t, std::vector<std::string> labels)
      : times(std::move(t)), species(std::move(labels)), observed(species.size(), true),
        values(times.size() * species.size(), 0.0) {}

  std::size_t rows() const { return times.size(); }
  std::size_t cols() const { return species.size(); }
  double &operator()(std::size_t r, std::size_t c) { return values[r * species.size() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * species.size() + c]; }

  std::size_t observed_count() const {
    std::size_t n = 0;
    for (bool b : observed) n += b;
    return n;
  }

  /// Index of a species column, or cols() if absent.
  std::size_t column(std::string_view name) const {
    for (std::size_t c = 0; c < species.size(); ++c)
      if (species[c] == name)
        return c;
    return species.size();
  }
};

/// Dataset with the layout of `like` (times, labels, mask) filled from a
/// trajectory whose columns are named by `trajectory_species`.
inline Dataset observe(const Trajectory &trajectory,
                       const std::vector<std::string> &trajectory_species, const Dataset &like) {
  if (trajectory.times != like.times)
    throw Error("observe: trajectory times differ from dataset times");
  Dataset out = like;
  for (std::size_t c = 0; c < like.cols(); ++c) {
    std::size_t src = trajectory_species.size();
    for (std::size_t j = 0; j < trajectory_species.size(); ++j)
      if (trajectory_species[j] == like.species[c])
        src = j;
    if (!like.observed[c]) {
      for (std::size_t r = 0; r < out.rows(); ++r) out(r, c) = std::nan("");
      continue;
    }
    if (src == trajectory_species.size())
      throw Error("observe: model has no species named '" + like.species[c] + "'");
    for (std::size_t r = 0; r < out.rows(); ++r) out(r, c) = trajectory(r, src);
  }
  return out;
}

enum class DistanceKind { Sse, L1, Cosine };

inline DistanceKind parse_distance(std::string_view name) {
  if (name == "sse") return DistanceKind::Sse;
  if (name == "l1") return DistanceKind::L1;
  if (name == "cosine") return DistanceKind::Cosine;
  throw ConfigError("unknown distance '" + std::string(name) + "' (expected sse, l1 or cosine)");
}

inline std::string_view distance_name(DistanceKind kind) {
  switch (kind) {
  case DistanceKind::Sse: return "sse";
  case DistanceKind::L1: return "l1";
  case DistanceKind::Cosine: return "cosine";
  }
  return "sse";
}

namespace detail {

inline void check_comparable(const Dataset &a, const Dataset &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.observed != b.observed)
    throw Error("datasets differ in shape or observation mask");
}

} // namespace detail

inline double sse_distance(const Dataset &a, const Dataset &b) {
  detail::check_comparable(a, b);
  double sum = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    if (!a.observed[c]) continue;
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const double d = a(r, c) - b(r, c);
      sum += d * d;
    }
  }
  return sum;
}

inline double l1_distance(const Dataset &a, const Dataset &b) {
  detail::check_comparable(a, b);
  double sum = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    if (!a.observed[c]) continue;
    for (std::size_t r = 0; r < a.rows(); ++r) sum += std::abs(a(r, c) - b(r, c));
  }
  return sum;
}

/// One cosine dissimilarity per observed species, summed.
inline double cosine_distance(const Dataset &a, const Dataset &b) {
  detail::check_comparable(a, b);
  double sum = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    if (!a.observed[c]) continue;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
      dot += a(r, c) * b(r, c);
      na += a(r, c) * a(r, c);
      nb += b(r, c) * b(r, c);
    }
    if (na == 0.0 || nb == 0.0)
      throw Error("cosine distance undefined for zero-norm species '" + a.species[c] + "'");
    sum += 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
  }
  return sum;
}

inline double distance(DistanceKind kind, const Dataset &a, const Dataset &b) {
  switch (kind) {
  case DistanceKind::Sse: return sse_distance(a, b);
  case DistanceKind::L1: return l1_distance(a, b);
  case DistanceKind::Cosine: return cosine_distance(a, b);
  }
  return sse_distance(a, b);
}

/// Log-likelihood of `b` around `a` under i.i.d. N(0, sigma^2) errors on every
/// observed entry.
inline double gaussian_loglik(const Dataset &a, const Dataset &b, double sigma) {
  if (!(sigma > 0.0))
    throw Error("gaussian_loglik: sigma must be > 0");
  const double n = static_cast<double>(a.rows() * a.observed_count());
  return -sse_distance(a, b) / (2.0 * sigma * sigma) -
         0.5 * n * std::log(2.0 * std::numbers::pi * sigma * sigma);
}

} // namespace abcsmc

#endif // ABCSMC_DISTANCE_HPP
