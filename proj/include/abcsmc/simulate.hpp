#ifndef ABCSMC_SIMULATE_HPP
#define ABCSMC_SIMULATE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "abcsmc/core.hpp"

namespace abcsmc {

/// States of a system sampled at record times, stored row-major
/// (one row per time, one column per species).
struct Trajectory {
  std::vector<double> times;
  std::size_t species = 0;
  std::vector<double> values;

  Trajectory() = default;
  Trajectory(std::vector<double> t, std::size_t m)
      : times(std::move(t)), species(m), values(times.size() * m, 0.0) {}

  std::size_t rows() const { return times.size(); }
  double &operator()(std::size_t row, std::size_t col) { return values[row * species + col]; }
  double operator()(std::size_t row, std::size_t col) const { return values[row * species + col]; }
  std::span<double> row(std::size_t r) { return {values.data() + r * species, species}; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * species, species}; }
};

namespace detail {

inline void check_record_times(std::span<const double> times, double t0) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]))
      throw Error("record times must be finite");
    if (times[i] < t0)
      throw Error("record times must not precede the initial time");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw Error("record times must be strictly increasing");
  }
}

inline bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

} // namespace detail

// ---------------------------------------------------------------------------
// Ordinary differential equations: classical fixed-step RK4

using OdeRhs = std::function<void(double t, std::span<const double> x,
                                  std::span<const double> theta, std::span<double> dxdt)>;

struct OdeSystem {
  std::size_t dimension = 0;
  OdeRhs rhs;
};

/// Classical RK4 on the grid t0 + k*step. A record time falling between grid
/// points is reached by one extra RK4 step of the remaining length taken from
/// the last grid point; the grid itself is not shifted.
/// A step of 0 selects (t_last - t0) / 1000.
inline Trajectory rk4_solve(const OdeSystem &system, std::span<const double> theta,
                            std::span<const double> x0, double t0, std::span<const double> times,
                            double step = 0.0) {
  const std::size_t m = system.dimension;
  if (x0.size() != m)
    throw Error("rk4_solve: initial state has wrong dimension");
  detail::check_record_times(times, t0);
  Trajectory out(std::vector<double>(times.begin(), times.end()), m);
  if (times.empty())
    return out;
  if (step <= 0.0)
    step = (times.back() - t0) / 1000.0;
  if (!(step > 0.0))
    step = 1.0; // every record time equals t0

  std::vector<double> x(x0.begin(), x0.end()), k1(m), k2(m), k3(m), k4(m), tmp(m), partial(m);

  auto rk4_step = [&](std::span<const double> in, double t, double h, std::span<double> res) {
    system.rhs(t, in, theta, k1);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = in[i] + 0.5 * h * k1[i];
    system.rhs(t + 0.5 * h, tmp, theta, k2);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = in[i] + 0.5 * h * k2[i];
    system.rhs(t + 0.5 * h, tmp, theta, k3);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = in[i] + h * k3[i];
    system.rhs(t + h, tmp, theta, k4);
    for (std::size_t i = 0; i < m; ++i)
      res[i] = in[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!detail::all_finite(res))
      throw SimulationFailure("ODE state became non-finite");
  };

  std::uint64_t n = 0; // grid index, t = t0 + n*step
  const double snap = 1e-9 * step;
  for (std::size_t r = 0; r < times.size(); ++r) {
    const double target = times[r];
    while (t0 + static_cast<double>(n + 1) * step <= target + snap) {
      rk4_step(x, t0 + static_cast<double>(n) * step, step, x);
      ++n;
    }
    const double t = t0 + static_cast<double>(n) * step;
    if (std::abs(target - t) <= snap) {
      std::copy(x.begin(), x.end(), out.row(r).begin());
    } else {
      rk4_step(x, t, target - t, partial);
      std::copy(partial.begin(), partial.end(), out.row(r).begin());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Delay differential equations: adaptive Dormand-Prince 5(4) with its
// continuous extension kept as the history for lagged lookups.

using DdeRhs = std::function<void(double t, std::span<const double> x,
                                  std::span<const double> lagged, // lags x dimension, row-major
                                  std::span<const double> theta, std::span<double> dxdt)>;

struct DdeSystem {
  std::size_t dimension = 0;
  /// Concrete lag values for a parameter vector. Negative values are treated as 0.
  std::function<std::vector<double>(std::span<const double> theta)> lags;
  DdeRhs rhs;
  /// State for t <= t0.
  std::function<void(double t, std::span<const double> theta, std::span<double> x)> history;
};

namespace detail {

struct DenseSegment {
  double t = 0.0;
  double h = 0.0;
  std::vector<double> coeff; // 5 blocks of `dimension`
};

class DenseHistory {
public:
  DenseHistory(const DdeSystem &system, std::span<const double> theta, double t0)
      : system_(system), theta_(theta), t0_(t0) {}

  void push(DenseSegment segment) { segments_.push_back(std::move(segment)); }

  void evaluate(double s, std::span<double> out) const {
    if (s <= t0_ || segments_.empty()) {
      system_.history(std::min(s, t0_), theta_, out);
      return;
    }
    // Lags are usually recent, so scan from the back.
    std::size_t k = segments_.size() - 1;
    while (k > 0 && segments_[k].t > s)
      --k;
    interpolate(segments_[k], s, out);
  }

  static void interpolate(const DenseSegment &seg, double s, std::span<double> out) {
    const std::size_t m = out.size();
    const double th = (s - seg.t) / seg.h;
    const double th1 = 1.0 - th;
    const double *r = seg.coeff.data();
    for (std::size_t i = 0; i < m; ++i)
      out[i] = r[i] + th * (r[m + i] + th1 * (r[2 * m + i] + th * (r[3 * m + i] + th1 * r[4 * m + i])));
  }

private:
  const DdeSystem &system_;
  std::span<const double> theta_;
  double t0_;
  std::vector<DenseSegment> segments_;
};

} // namespace detail

inline Trajectory dde_solve(const DdeSystem &system, std::span<const double> theta, double t0,
                            std::span<const double> times, double tol = 1e-6,
                            std::uint64_t max_steps = 1'000'000) {
  if (!(tol > 0.0))
    throw Error("dde_solve: tol must be > 0");
  detail::check_record_times(times, t0);
  const std::size_t m = system.dimension;
  Trajectory out(std::vector<double>(times.begin(), times.end()), m);
  if (times.empty())
    return out;

  std::vector<double> lags = system.lags ? system.lags(theta) : std::vector<double>{};
  for (double &tau : lags) {
    if (!std::isfinite(tau))
      throw SimulationFailure("non-finite delay");
    tau = std::max(tau, 0.0);
  }
  const std::size_t nl = lags.size();

  const double t_end = times.back();
  const double span = t_end - t0;
  std::vector<double> y(m);
  system.history(t0, theta, y);

  std::size_t r = 0;
  while (r < times.size() && times[r] <= t0) {
    std::copy(y.begin(), y.end(), out.row(r).begin());
    ++r;
  }
  if (r == times.size())
    return out;

  double h_max = span;
  for (double tau : lags)
    if (tau > 0.0)
      h_max = std::min(h_max, std::max(tau, 1e-3 * span));
  const double h_min = 1e-12 * span;

  // Derivative jumps propagate from t0 to t0 + j*tau, one order smoother each
  // time; steps end exactly on the first few so no step straddles a kink.
  std::vector<double> breaks;
  for (double tau : lags)
    if (tau > 0.0)
      for (int j = 1; j <= 6 && t0 + j * tau < t_end; ++j) breaks.push_back(t0 + j * tau);
  std::sort(breaks.begin(), breaks.end());
  std::size_t next_break = 0;

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  detail::DenseHistory past(system, theta, t0);
  std::vector<double> lagged(nl * m), stage(m), y1(m), err(m);
  std::array<std::vector<double>, 7> k;
  for (auto &v : k) v.assign(m, 0.0);

  auto f = [&](double t, std::span<const double> x, std::span<double> dxdt) {
    for (std::size_t l = 0; l < nl; ++l) {
      std::span<double> dst(lagged.data() + l * m, m);
      if (lags[l] == 0.0)
        std::copy(x.begin(), x.end(), dst.begin());
      else
        past.evaluate(t - lags[l], dst);
    }
    system.rhs(t, x, lagged, theta, dxdt);
  };

  double t = t0;
  double h = std::min(h_max, 1e-2 * span);
  f(t, y, k[0]);
  std::uint64_t steps = 0;

  while (r < times.size()) {
    if (++steps > max_steps)
      throw SimulationFailure("DDE solver exceeded step limit");
    h = std::min(h, t_end - t);
    while (next_break < breaks.size() && breaks[next_break] <= t + h_min) ++next_break;
    const bool to_break = next_break < breaks.size() && t + h >= breaks[next_break] - h_min;
    if (to_break)
      h = breaks[next_break] - t;
    if (h < h_min)
      throw SimulationFailure("DDE step size underflow");

    for (std::size_t i = 0; i < m; ++i) stage[i] = y[i] + h * a21 * k[0][i];
    f(t + c2 * h, stage, k[1]);
    for (std::size_t i = 0; i < m; ++i) stage[i] = y[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
    f(t + c3 * h, stage, k[2]);
    for (std::size_t i = 0; i < m; ++i)
      stage[i] = y[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
    f(t + c4 * h, stage, k[3]);
    for (std::size_t i = 0; i < m; ++i)
      stage[i] = y[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
    f(t + c5 * h, stage, k[4]);
    for (std::size_t i = 0; i < m; ++i)
      stage[i] = y[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] +
                             a65 * k[4][i]);
    f(t + h, stage, k[5]);
    for (std::size_t i = 0; i < m; ++i)
      y1[i] = y[i] + h * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] + a75 * k[4][i] +
                          a76 * k[5][i]);
    f(t + h, y1, k[6]);

    double norm = 0.0;
    bool finite = detail::all_finite(y1);
    for (std::size_t i = 0; i < m; ++i) {
      err[i] = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] +
                    e7 * k[6][i]);
      const double sc = tol; // absolute error per step
      norm += (err[i] / sc) * (err[i] / sc);
    }
    norm = std::sqrt(norm / static_cast<double>(m));
    if (!finite || !std::isfinite(norm)) {
      if (!detail::all_finite(y) || h <= h_min * 2)
        throw SimulationFailure("DDE state became non-finite");
      h *= 0.25;
      continue;
    }

    if (norm <= 1.0) {
      detail::DenseSegment seg{t, h, std::vector<double>(5 * m)};
      for (std::size_t i = 0; i < m; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = h * k[0][i] - ydiff;
        seg.coeff[i] = y[i];
        seg.coeff[m + i] = ydiff;
        seg.coeff[2 * m + i] = bspl;
        seg.coeff[3 * m + i] = ydiff - h * k[6][i] - bspl;
        seg.coeff[4 * m + i] = h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] + d5 * k[4][i] +
                                    d6 * k[5][i] + d7 * k[6][i]);
      }
      const double t_next = to_break ? breaks[next_break] : (t_end - (t + h) <= h_min) ? t_end : t + h;
      while (r < times.size() && times[r] <= t_next) {
        if (times[r] == t_next)
          std::copy(y1.begin(), y1.end(), out.row(r).begin());
        else
          detail::DenseHistory::interpolate(seg, times[r], out.row(r));
        ++r;
      }
      past.push(std::move(seg));
      t = t_next;
      y.swap(y1);
      std::swap(k[0], k[6]); // first-same-as-last
    }
    const double factor = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
    h = std::min(h_max, h * (norm <= 1.0 ? factor : std::min(factor, 1.0)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reaction networks: Gillespie's direct method

using Hazard = std::function<double(std::span<const double> state, std::span<const double> theta)>;

struct Reaction {
  std::vector<int> change; // stoichiometry change, one entry per species
  Hazard hazard;
};

struct ReactionNetwork {
  std::size_t species = 0;
  std::vector<Reaction> reactions;
};

inline constexpr std::uint64_t default_event_cap = 100'000'000;

/// Exact stochastic simulation. The state reported at a record time is the
/// state after the last event at or before it. If the total hazard reaches 0
/// the state is held for the remaining record times.
inline Trajectory gillespie(const ReactionNetwork &network, std::span<const double> theta,
                            std::span<const double> x0, double t0, std::span<const double> times,
                            Rng &rng, std::uint64_t event_cap = default_event_cap) {
  const std::size_t m = network.species;
  if (x0.size() != m)
    throw Error("gillespie: initial state has wrong dimension");
  for (double v : x0)
    if (!(v >= 0.0) || v != std::floor(v))
      throw Error("gillespie: initial state must be nonnegative integers");
  detail::check_record_times(times, t0);

  Trajectory out(std::vector<double>(times.begin(), times.end()), m);
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> hazards(network.reactions.size());
  double t = t0;
  std::size_t r = 0;
  std::uint64_t events = 0;

  auto record_until = [&](double horizon) {
    while (r < times.size() && times[r] < horizon) {
      std::copy(x.begin(), x.end(), out.row(r).begin());
      ++r;
    }
  };

  while (r < times.size()) {
    double total = 0.0;
    for (std::size_t j = 0; j < hazards.size(); ++j) {
      const double hz = network.reactions[j].hazard(x, theta);
      if (!(hz >= 0.0) || !std::isfinite(hz))
        throw SimulationFailure("reaction " + std::to_string(j) + " has invalid hazard");
      hazards[j] = hz;
      total += hz;
    }
    if (total <= 0.0) {
      record_until(std::numeric_limits<double>::infinity());
      break;
    }
    const double tau = std::exponential_distribution<double>(total)(rng);
    record_until(t + tau);
    if (r == times.size())
      break;
    t += tau;

    double u = uniform01(rng) * total;
    std::size_t chosen = 0;
    for (; chosen + 1 < hazards.size(); ++chosen) {
      if (u < hazards[chosen])
        break;
      u -= hazards[chosen];
    }
    while (hazards[chosen] <= 0.0 && chosen > 0) // guards round-off at the tail
      --chosen;
    const auto &change = network.reactions[chosen].change;
    for (std::size_t i = 0; i < m; ++i) {
      x[i] += change[i];
      if (x[i] < 0.0)
        throw SimulationFailure("reaction drove a species count negative");
    }
    if (++events > event_cap)
      throw SimulationFailure("stochastic simulation exceeded the event cap");
  }
  return out;
}

} // namespace abcsmc

#endif // ABCSMC_SIMULATE_HPP
