#ifndef GAINLOSS_ODE_HPP
#define GAINLOSS_ODE_HPP

// Embedded Dormand-Prince 5(4) integrator with error control.
//
// State is any Eigen dense object (vector or matrix, real or complex). The
// right-hand side is called as rhs(t, y, dydt) and must write into dydt,
// which has the shape of y. Output is delivered by stepping exactly onto each
// requested time, so no interpolation error enters the samples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>

#include "gainloss/errors.hpp"

namespace gainloss::ode {

struct AdaptiveOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  /// First trial step; 0 selects one automatically.
  double initial_step = 0.0;
  /// Upper bound on a single step; 0 means unbounded.
  double max_step = 0.0;
  std::size_t max_steps = 50'000'000;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_calls = 0;
};

namespace detail {

// Butcher tableau of the Dormand-Prince 5(4) pair.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat (fifth-order minus embedded fourth-order weights).
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                        e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;

template <typename State>
double scaled_error(const State& err, const State& y0, const State& y1,
                    const AdaptiveOptions& opt) {
  // |z| as sqrt(|z|^2): avoids hypot, which dominates for large complex states.
  const auto scale =
      (opt.rtol * y0.array().abs2().max(y1.array().abs2()).sqrt() + opt.atol).eval();
  return (err.array().abs2().sqrt() / scale).maxCoeff();
}

}  // namespace detail

/// Integrates y' = rhs(t, y) from times.front() (where y holds the initial
/// value) through every entry of times, which must be strictly increasing.
/// observer(i, t, y) is invoked at each times[i], including i = 0.
template <typename State, typename Rhs, typename Observer>
Stats integrate(Rhs&& rhs, State y, std::span<const double> times,
                const AdaptiveOptions& opt, Observer&& observer) {
  using namespace detail;
  Stats stats;
  if (times.empty()) return stats;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InputError("ode::integrate: time grid must be strictly increasing");
    }
  }

  double t = times.front();
  observer(std::size_t{0}, t, static_cast<const State&>(y));
  if (times.size() == 1) return stats;

  State k1 = State::Zero(y.rows(), y.cols());
  State k2 = k1, k3 = k1, k4 = k1, k5 = k1, k6 = k1, k7 = k1;
  State ytmp = k1, ynew = k1, err = k1;

  rhs(t, y, k1);
  ++stats.rhs_calls;

  double h = opt.initial_step;
  if (h <= 0.0) {
    // Hairer-Norsett-Wanner starting step heuristic.
    const double d0 = (y.array().abs() / (opt.rtol * y.array().abs() + opt.atol)).maxCoeff();
    const double d1 = (k1.array().abs() / (opt.rtol * y.array().abs() + opt.atol)).maxCoeff();
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, times.back() - t);
    ytmp = y + h0 * k1;
    rhs(t + h0, ytmp, k2);
    ++stats.rhs_calls;
    const double d2 =
        ((k2 - k1).array().abs() / (opt.rtol * y.array().abs() + opt.atol)).maxCoeff() / h0;
    const double h1 = std::max(d1, d2) <= 1e-15
                          ? std::max(1e-6, h0 * 1e-3)
                          : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    h = std::min(100.0 * h0, h1);
  }

  std::size_t next = 1;
  while (next < times.size()) {
    const double target = times[next];
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
    double hs = h;
    bool lands = false;
    if (t + hs >= target) {
      hs = target - t;
      lands = true;
    }
    const double floor = 1e-14 * std::max(1.0, std::abs(t));
    if (hs < floor) {
      std::ostringstream msg;
      msg << "ode::integrate: step size underflow at t=" << t << " (h=" << hs << ")";
      throw StepSizeUnderflow(msg.str());
    }
    if (stats.accepted + stats.rejected >= opt.max_steps) {
      throw StepSizeUnderflow("ode::integrate: step budget exhausted");
    }

    ytmp = y + hs * (a21 * k1);
    rhs(t + c2 * hs, ytmp, k2);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    rhs(t + c3 * hs, ytmp, k3);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * hs, ytmp, k4);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * hs, ytmp, k5);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + hs, ytmp, k6);
    ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + hs, ynew, k7);
    stats.rhs_calls += 6;
    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double e = scaled_error(err, y, ynew, opt);
    // A non-finite error estimate (overflow) is a rejection with maximal shrink.
    const double grow = !std::isfinite(e) ? 0.2
                        : e == 0.0        ? 5.0
                                          : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
    if (e <= 1.0) {
      t = lands ? target : t + hs;
      y.swap(ynew);
      k1.swap(k7);
      ++stats.accepted;
      if (lands) {
        observer(next, t, static_cast<const State&>(y));
        ++next;
        // A step shortened to hit the grid says little about the usable size.
        if (grow < 1.0) h = std::min(h, hs * grow);
      } else {
        h = hs * grow;
      }
    } else {
      ++stats.rejected;
      h = hs * std::min(1.0, grow);
    }
  }
  return stats;
}

}  // namespace gainloss::ode

#endif  // GAINLOSS_ODE_HPP
