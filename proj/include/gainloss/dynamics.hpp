#ifndef GAINLOSS_DYNAMICS_HPP
#define GAINLOSS_DYNAMICS_HPP

// Second-moment dynamics d sigma/dt = Y sigma + sigma Y^+ + 4 D for the
// Hermitian ladder covariance (see gaussian.hpp), with
// Y = blockdiag(-iH, iH^+) and D = diag(gamma_L, gain + 2 gamma_G)/2 on both
// halves. In terms of the symmetric form <{A_i, A_j}> this is the familiar
// Y S + S Y^T + 4 D X equation; both describe the same moments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "gainloss/errors.hpp"
#include "gainloss/gaussian.hpp"
#include "gainloss/model.hpp"
#include "gainloss/ode.hpp"

namespace gainloss {

/// Entry magnitude beyond which a trajectory is reported as diverged.
inline constexpr double kDivergenceCap = 1e100;

struct DriftDiffusion {
  Eigen::Matrix4cd y;
  Eigen::Matrix4d d;
  ModelParams params;
};

inline DriftDiffusion build_drift_diffusion(const ModelParams& p) {
  const double gt = effective_gain(p);
  const double d_l = 0.5 * p.loss_l;
  const double d_g = 0.5 * (gt + 2.0 * p.loss_g);
  if (d_l < 0.0 || d_g < 0.0) {
    std::ostringstream msg;
    msg << "build_drift_diffusion: negative diffusion (" << d_l << ", " << d_g << ")";
    throw NegativeDiffusion(msg.str());
  }
  DriftDiffusion dd;
  dd.y = drift_matrix(p);
  dd.d = Eigen::Vector4d(d_l, d_g, d_l, d_g).asDiagonal();
  dd.params = p;
  return dd;
}

/// Y sigma + sigma Y^+ + 4 D.
inline Eigen::Matrix4cd lyapunov_rhs(const DriftDiffusion& dd, const Eigen::Matrix4cd& sigma) {
  return dd.y * sigma + sigma * dd.y.adjoint() + 4.0 * dd.d.cast<cplx>();
}

enum class PropagationMethod { ExactExponential, AdaptiveIntegrator };

struct PropagationResult {
  CovarianceAA sigma;
  double t = 0.0;
  PropagationMethod method = PropagationMethod::ExactExponential;
  /// Largest |sigma - sigma^+| removed by the final symmetrisation.
  double asymmetry = 0.0;
  /// Set when an entry exceeded kDivergenceCap; sigma then holds the last
  /// finite value and t the time it was reached.
  bool diverged = false;
};

/// Exact one-step map sigma -> Phi sigma Phi^+ + W for a fixed interval,
/// built from one exponential of the augmented block matrix
/// [[-Y, 4D], [0, Y^+]] h, whose blocks hold exp(Y^+ h) and
/// exp(-Y h) int_0^h exp(Y s) 4D exp(Y^+ s) ds.
class LyapunovStep {
 public:
  LyapunovStep(const DriftDiffusion& dd, double h) : h_(h) {
    // Keep the exponent small; the e^{-Y h} block would otherwise amplify
    // rounding in the integral term.
    const double norm = dd.y.cwiseAbs().rowwise().sum().maxCoeff();
    const int parts = std::max(1, static_cast<int>(std::ceil(norm * h / 0.5)));
    const double hs = h / parts;
    Eigen::Matrix<cplx, 8, 8> m = Eigen::Matrix<cplx, 8, 8>::Zero();
    m.topLeftCorner<4, 4>() = -dd.y * hs;
    m.topRightCorner<4, 4>() = 4.0 * dd.d.cast<cplx>() * hs;
    m.bottomRightCorner<4, 4>() = dd.y.adjoint() * hs;
    const Eigen::Matrix<cplx, 8, 8> e = m.exp();
    const Eigen::Matrix4cd phi = e.bottomRightCorner<4, 4>().adjoint();
    const Eigen::Matrix4cd w = phi * e.topRightCorner<4, 4>();
    phi_ = Eigen::Matrix4cd::Identity();
    w_ = Eigen::Matrix4cd::Zero();
    for (int k = 0; k < parts; ++k) {
      w_ = phi * w_ * phi.adjoint() + w;
      phi_ = phi * phi_;
    }
    w_ = 0.5 * (w_ + w_.adjoint()).eval();
  }

  Eigen::Matrix4cd apply(const Eigen::Matrix4cd& sigma) const {
    return phi_ * sigma * phi_.adjoint() + w_;
  }

  double interval() const { return h_; }
  const Eigen::Matrix4cd& phi() const { return phi_; }
  const Eigen::Matrix4cd& noise() const { return w_; }

 private:
  double h_;
  Eigen::Matrix4cd phi_;
  Eigen::Matrix4cd w_;
};

namespace detail {

inline PropagationResult finish(const Eigen::Matrix4cd& raw, double t, bool diverged) {
  PropagationResult r;
  r.asymmetry = (raw - raw.adjoint()).cwiseAbs().maxCoeff();
  r.sigma = CovarianceAA::unchecked(0.5 * (raw + raw.adjoint()));
  r.t = t;
  r.diverged = diverged;
  return r;
}

}  // namespace detail

/// Covariance at time t by the exact exponential propagator. Long intervals
/// are split into substeps of unit-order exponent; each substep is exact.
inline PropagationResult propagate(const CovarianceAA& sigma0, const DriftDiffusion& dd,
                                   double t) {
  if (!(t >= 0.0)) throw InputError("propagate: t must be >= 0");
  if (t == 0.0) return detail::finish(sigma0.matrix(), 0.0, false);
  const double rate = std::max(dd.y.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  const int steps = std::max(1, static_cast<int>(std::ceil(rate * t / 2.0)));
  const LyapunovStep step(dd, t / steps);
  Eigen::Matrix4cd s = sigma0.matrix();
  for (int k = 0; k < steps; ++k) {
    const Eigen::Matrix4cd next = step.apply(s);
    if (!(next.cwiseAbs().maxCoeff() <= kDivergenceCap)) {
      return detail::finish(s, t * k / steps, true);
    }
    s = next;
  }
  return detail::finish(s, t, false);
}

inline PropagationResult propagate(const CovarianceAA& sigma0, const ModelParams& p,
                                   double t) {
  return propagate(sigma0, build_drift_diffusion(p), t);
}

/// Independent check of propagate(): Dormand-Prince integration of the
/// matrix ODE at relative tolerance 1e-10. sigma0 is the state at t = 0.
inline std::vector<PropagationResult> propagate_adaptive(const CovarianceAA& sigma0,
                                                         const ModelParams& p,
                                                         std::span<const double> t_grid,
                                                         double rtol = 1e-10) {
  std::vector<PropagationResult> out;
  if (t_grid.empty()) return out;
  if (t_grid.front() < 0.0) throw InputError("propagate_adaptive: times must be >= 0");
  const DriftDiffusion dd = build_drift_diffusion(p);

  std::vector<double> times;
  const bool prepend = t_grid.front() > 0.0;
  if (prepend) times.push_back(0.0);
  times.insert(times.end(), t_grid.begin(), t_grid.end());

  ode::AdaptiveOptions opt;
  opt.rtol = rtol;
  opt.atol = rtol * std::max(1.0, sigma0.matrix().cwiseAbs().maxCoeff()) * 1e-2;
  auto rhs = [&](double, const Eigen::Matrix4cd& s, Eigen::Matrix4cd& ds) {
    ds = lyapunov_rhs(dd, s);
  };
  ode::integrate(rhs, Eigen::Matrix4cd(sigma0.matrix()), std::span<const double>(times), opt,
                 [&](std::size_t i, double t, const Eigen::Matrix4cd& s) {
                   if (prepend && i == 0) return;
                   PropagationResult r = detail::finish(s, t, false);
                   r.method = PropagationMethod::AdaptiveIntegrator;
                   out.push_back(r);
                 });
  return out;
}

inline StabilityReport is_stable(const ModelParams& p) { return drift_stability(p); }

/// max |Y sigma + sigma Y^+ + 4D| / max |4D|.
inline double stationary_residual(const ModelParams& p, const CovarianceAA& sigma) {
  const DriftDiffusion dd = build_drift_diffusion(p);
  const double scale = std::max(4.0 * dd.d.cwiseAbs().maxCoeff(), 1e-300);
  return lyapunov_rhs(dd, sigma.matrix()).cwiseAbs().maxCoeff() / scale;
}

/// Unique solution of Y sigma + sigma Y^+ + 4D = 0 via the vectorised
/// system (I (x) Y + conj(Y) (x) I) vec sigma = -4 vec D.
inline CovarianceAA stationary(const ModelParams& p) {
  const StabilityReport st = is_stable(p);
  if (st.stability == Stability::Unstable) {
    std::ostringstream msg;
    msg << "stationary: drift is unstable (spectral abscissa " << st.abscissa << ")";
    throw Unstable(msg.str());
  }
  if (st.stability == Stability::Marginal) {
    throw MarginallyStable("stationary: drift is marginally stable; no unique steady state");
  }
  const DriftDiffusion dd = build_drift_diffusion(p);
  using Mat16 = Eigen::Matrix<cplx, 16, 16>;
  const Eigen::Matrix4cd id = Eigen::Matrix4cd::Identity();
  Mat16 op;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      op.block<4, 4>(4 * r, 4 * c) = id(r, c) * dd.y + std::conj(dd.y(r, c)) * id;
    }
  }
  const Eigen::Matrix4cd rhs_m = -4.0 * dd.d.cast<cplx>();
  const Eigen::Matrix<cplx, 16, 1> rhs = Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(rhs_m.data());
  const Eigen::Matrix<cplx, 16, 1> x = op.fullPivLu().solve(rhs);
  Eigen::Matrix4cd s = Eigen::Map<const Eigen::Matrix4cd>(x.data());
  s = 0.5 * (s + s.adjoint()).eval();
  const CovarianceAA out = CovarianceAA::unchecked(s);
  const double res = stationary_residual(p, out);
  if (!(res <= 1e-10)) {
    std::ostringstream msg;
    msg << "stationary: Lyapunov residual " << res << " above 1e-10";
    throw NumericalFailure(msg.str());
  }
  return out;
}

// --------------------------------------------------------------------------
// Phase-insensitive trajectories with a tracked determinant
//
// For states with <a a> = 0 only the normal block N evolves:
//   dN/dt = A N + N A^+ + Q,  A = -iH,  Q = diag(2 gamma_L, 2(gain_g + loss_g)),
// and det N obeys the linear equation
//   d det N/dt = 2 Re tr(A) det N + Q_GG N_LL + Q_LL N_GG.
// Together with a constant these form a 6-dimensional linear system that is
// stepped exactly, so det N never has to be recovered by cancellation.

class PhaseInsensitiveStep {
 public:
  PhaseInsensitiveStep(const ModelParams& p, double h) : h_(h) {
    using Mat6 = Eigen::Matrix<cplx, 6, 6>;
    const Eigen::Matrix2cd a = cplx(0.0, -1.0) * mean_field_hamiltonian(p);
    const double q_l = 2.0 * p.loss_l;
    const double q_g = 2.0 * (p.gain_g + p.loss_g);
    Mat6 gen = Mat6::Zero();
    // vec(A N + N A^+) = (I (x) A + conj(A) (x) I) vec N, column-major vec.
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        gen.block<2, 2>(2 * r, 2 * c) = id(r, c) * a + std::conj(a(r, c)) * id;
      }
    }
    gen(0, 5) = q_l;
    gen(3, 5) = q_g;
    gen(4, 4) = 2.0 * a.trace().real();
    gen(4, 0) = q_g;
    gen(4, 3) = q_l;

    const double norm = gen.cwiseAbs().rowwise().sum().maxCoeff();
    const int parts = std::max(1, static_cast<int>(std::ceil(norm * h / 0.5)));
    const Mat6 e = (gen * (h / parts)).exp();
    map_ = Mat6::Identity();
    for (int k = 0; k < parts; ++k) map_ = e * map_;
  }

  PhaseInsensitiveCovariance apply(const PhaseInsensitiveCovariance& c) const {
    Eigen::Matrix<cplx, 6, 1> x;
    x << c.normal(0, 0), c.normal(1, 0), c.normal(0, 1), c.normal(1, 1), c.det_normal, 1.0;
    const Eigen::Matrix<cplx, 6, 1> y = map_ * x;
    PhaseInsensitiveCovariance out;
    out.normal << y(0), y(2), y(1), y(3);
    out.normal = 0.5 * (out.normal + out.normal.adjoint()).eval();
    out.det_normal = y(4).real();
    return out;
  }

  double interval() const { return h_; }

 private:
  double h_;
  Eigen::Matrix<cplx, 6, 6> map_;
};

struct CorrelationSample {
  double t = 0.0;
  CorrelationReport report;
  bool diverged = false;
};

/// Correlations along the trajectory started from sigma0 at t = 0, sampled on
/// t_grid (non-decreasing, >= 0). Phase-insensitive initial states use the
/// determinant-tracking stepper; others fall back to the exact 4x4
/// propagator with the general block formulas. Sampling stops after the first
/// diverged sample.
inline std::vector<CorrelationSample> correlation_series(const CovarianceAA& sigma0,
                                                         const ModelParams& p,
                                                         std::span<const double> t_grid) {
  std::vector<CorrelationSample> out;
  if (t_grid.empty()) return out;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0.0 || (i > 0 && t_grid[i] < t_grid[i - 1])) {
      throw InputError("correlation_series: times must be >= 0 and non-decreasing");
    }
  }
  const double scale = std::max(1.0, sigma0.matrix().cwiseAbs().maxCoeff());
  const bool tracked = sigma0.anomalous_block().cwiseAbs().maxCoeff() <= 1e-12 * scale;

  if (tracked) {
    PhaseInsensitiveCovariance c = phase_insensitive(sigma0, 1e-12);
    std::optional<PhaseInsensitiveStep> step;
    double t = 0.0;
    for (const double target : t_grid) {
      const double h = target - t;
      if (h > 0.0) {
        if (!step || std::abs(step->interval() - h) > 1e-12 * h) step.emplace(p, h);
        c = step->apply(c);
        t = target;
      }
      CorrelationSample s;
      s.t = target;
      if (!(c.normal.cwiseAbs().maxCoeff() <= kDivergenceCap) || !std::isfinite(c.det_normal)) {
        s.diverged = true;
        out.push_back(s);
        break;
      }
      s.report = correlation_report(c);
      out.push_back(s);
    }
    return out;
  }

  Eigen::Matrix4cd s = sigma0.matrix();
  const DriftDiffusion dd = build_drift_diffusion(p);
  std::optional<LyapunovStep> step;
  double t = 0.0;
  for (const double target : t_grid) {
    const double h = target - t;
    if (h > 0.0) {
      if (!step || std::abs(step->interval() - h) > 1e-12 * h) step.emplace(dd, h);
      s = step->apply(s);
      s = 0.5 * (s + s.adjoint()).eval();
      t = target;
    }
    CorrelationSample sample;
    sample.t = target;
    if (!(s.cwiseAbs().maxCoeff() <= kDivergenceCap)) {
      sample.diverged = true;
      out.push_back(sample);
      break;
    }
    sample.report = correlation_report(to_quadrature(CovarianceAA::unchecked(s)));
    out.push_back(sample);
  }
  return out;
}

}  // namespace gainloss

#endif  // GAINLOSS_DYNAMICS_HPP
