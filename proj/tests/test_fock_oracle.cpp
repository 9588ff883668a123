#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>
#include <unsupported/Eigen/KroneckerProduct>

#include "gainloss/dynamics.hpp"
#include "gainloss/fock_oracle.hpp"

using namespace gainloss;
using namespace gainloss::fock;

namespace {

ModelParams fig8() { return {2.0, 1.6, 1.2, 2.32}; }

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

// Dense truncated ladder operators, basis index j * (N+1) + b.
struct DenseOps {
  Eigen::MatrixXcd al, ag;
};

DenseOps dense_ops(int n) {
  const int d = n + 1;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 1; k <= n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  DenseOps o;
  o.al = Eigen::kroneckerProduct(a, id);
  o.ag = Eigen::kroneckerProduct(id, a);
  return o;
}

Eigen::MatrixXcd dissipator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& rho) {
  const Eigen::MatrixXcd ada = a.adjoint() * a;
  return a * rho * a.adjoint() - 0.5 * (ada * rho + rho * ada);
}

Eigen::MatrixXcd dense_rhs(const DenseOps& o, const ModelParams& p, const Eigen::MatrixXcd& rho) {
  const Eigen::MatrixXcd h = p.coupling * (o.al.adjoint() * o.ag + o.ag.adjoint() * o.al);
  const cplx i(0.0, 1.0);
  return -i * (h * rho - rho * h) + 2 * p.loss_l * dissipator(o.al, rho) +
         2 * p.loss_g * dissipator(o.ag, rho) + 2 * p.gain_g * dissipator(o.ag.adjoint(), rho);
}

Eigen::MatrixXcd random_density(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd b(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) b(i, j) = cplx(n(rng), n(rng));
  Eigen::MatrixXcd rho = b * b.adjoint();
  return rho / rho.trace();
}

std::vector<double> short_grid(double g) {
  std::vector<double> t;
  for (int i = 1; i <= 4; ++i) t.push_back(0.125 * i / g);
  return t;
}

}  // namespace

TEST(SectorLayout, BandsAndSizes) {
  // N = 3: excitation-number shells of sizes 1, 2, 3, 4, 3, 2, 1.
  const SectorLayout diag(3, 0);
  EXPECT_EQ(diag.size(), 44);
  // All bands: the upper triangle of the 16x16 operator plus the diagonal
  // blocks' lower halves, (256 + 44) / 2.
  const SectorLayout full(3, 6);
  EXPECT_EQ(full.size(), 150);
  EXPECT_EQ(diag.offset(1, 2), -1);
}

TEST(TruncatedState, DenseRoundTrip) {
  std::mt19937_64 rng(50);
  const Eigen::MatrixXcd rho = random_density(rng, 25);
  const TruncatedState s = from_dense(rho, 4, 8);
  EXPECT_LT(max_abs(to_dense(s) - rho), 1e-15);
  EXPECT_FALSE(s.projected());
  EXPECT_NEAR(trace(s).real(), 1.0, 1e-14);
  EXPECT_EQ(s.element(1, 2, 3, 1), rho(1 * 5 + 2, 3 * 5 + 1));
  EXPECT_EQ(s.element(3, 1, 1, 2), rho(3 * 5 + 1, 1 * 5 + 2));
  EXPECT_EQ(s.element(5, 0, 0, 0), 0.0);
  const TruncatedState f = fock_state(1, 2, 4);
  EXPECT_EQ(f.element(1, 2, 1, 2), 1.0);
  EXPECT_NEAR(trace(f).real(), 1.0, 0.0);
}

TEST(LindbladRhs, VacuumIsStationaryWithoutPump) {
  const TruncatedState d = lindblad_rhs(vacuum_state(10), {1.3, 0.7, 0.4, 0.0});
  EXPECT_EQ(d.data().cwiseAbs().maxCoeff(), 0.0);
}

TEST(LindbladRhs, MatchesDenseConstruction) {
  std::mt19937_64 rng(51);
  const int n = 5;
  const DenseOps ops = dense_ops(n);
  const ModelParams params[] = {fig8(), {1.0, 0.3, 0.0, 0.9}, {0.7, 0.0, 0.5, 0.0}};
  for (const auto& p : params) {
    const Eigen::MatrixXcd rho = random_density(rng, (n + 1) * (n + 1));
    const Eigen::MatrixXcd ref = dense_rhs(ops, p, rho);
    const Eigen::MatrixXcd got = to_dense(lindblad_rhs(from_dense(rho, n, 2 * n), p));
    EXPECT_LT(max_abs(got - ref), 1e-12);
    // Each charge band evolves on its own, so the projection commutes with
    // the generator.
    for (const int band : {0, 1, 2, 3}) {
      const TruncatedState proj = lindblad_rhs(from_dense(rho, n, band), p);
      const TruncatedState want = from_dense(ref, n, band);
      EXPECT_LT((proj.data() - want.data()).cwiseAbs().maxCoeff(), 1e-12) << band;
    }
  }
}

TEST(LindbladRhs, PreservesTrace) {
  std::mt19937_64 rng(52);
  for (int k = 0; k < 20; ++k) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const ModelParams p{u(rng), u(rng), u(rng), u(rng)};
    const int n = 3 + k % 4;
    const TruncatedState rho = from_dense(random_density(rng, (n + 1) * (n + 1)), n, 0);
    EXPECT_LT(std::abs(trace(lindblad_rhs(rho, p))), 1e-12);
  }
}

TEST(LindbladRhs, SingleExcitationFollowsMeanField) {
  for (const ModelParams& p : {ModelParams{1.0, 0.0, 0.0, 0.0}, ModelParams{1.0, 0.3, 0.2, 0.0}}) {
    const std::vector<double> ts{0.3, 0.9, M_PI / 2, 2.5};
    const auto states = integrate(fock_state(1, 0, 2), p, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const Eigen::Vector2cd psi = mean_field_evolve(Eigen::Vector2cd(1, 0), p, ts[i]);
      EXPECT_NEAR(states[i].element(1, 0, 1, 0).real(), std::norm(psi[0]), 1e-9);
      EXPECT_NEAR(states[i].element(0, 1, 0, 1).real(), std::norm(psi[1]), 1e-9);
    }
  }
}

TEST(Integrate, SingleModeGain) {
  const ModelParams p{0.0, 0.0, 0.0, 0.5};
  const std::vector<double> ts{0.05, 0.1, 0.2};
  const auto states = integrate(vacuum_state(40), p, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double n = expectation(states[i], 0, 1, 0, 1).real();
    EXPECT_NEAR(n, std::expm1(2 * p.gain_g * ts[i]), 1e-7);
  }
}

TEST(Integrate, CoherentStartHasVacuumCovariance) {
  const ModelParams p = fig8();
  const auto grid = short_grid(p.coupling);
  const auto vac = integrate(vacuum_state(60), p, grid);
  const auto coh = integrate(coherent_state(1.0, 0.5, 60, 2), p, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::Matrix4cd a = covariance_from_state(vac[i]).matrix();
    const Eigen::Matrix4cd b = covariance_from_state(coh[i]).matrix();
    EXPECT_LT(max_abs(a - b), 1e-7) << grid[i];
  }
}

TEST(Integrate, MatchesLyapunovAtShortTimes) {
  // Mean occupation stays below ~1.5 for t <= 0.5/g, where N = 30 holds the
  // state to better than 1e-6.
  const ModelParams p = fig8();
  const auto grid = short_grid(p.coupling);
  OracleDiagnostics diag;
  const auto states = integrate(vacuum_state(30), p, grid, {}, &diag);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::Matrix4cd o = covariance_from_state(states[i]).matrix();
    const Eigen::Matrix4cd e = propagate(vacuum_covariance(), p, grid[i]).sigma.matrix();
    EXPECT_LT(max_abs(o - e), 1e-6) << grid[i];
  }
  EXPECT_LT(diag.max_leakage, 1e-6);
  ASSERT_EQ(diag.trace_drift.size(), grid.size());
  for (const double d : diag.trace_drift) EXPECT_LT(d, 1e-9);
}

TEST(Integrate, LargerCutoffTightensAgreement) {
  const ModelParams p = fig8();
  const auto grid = short_grid(p.coupling);
  const auto states = integrate(vacuum_state(60), p, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::Matrix4cd o = covariance_from_state(states[i]).matrix();
    const Eigen::Matrix4cd e = propagate(vacuum_covariance(), p, grid[i]).sigma.matrix();
    EXPECT_LT(max_abs(o - e), 1e-9) << grid[i];
  }
}

TEST(Integrate, LeakageIsRejectedNotRenormalised) {
  const ModelParams p = fig8();
  std::vector<double> grid;
  for (int i = 1; i <= 12; ++i) grid.push_back(0.25 * i / p.coupling);
  EXPECT_THROW(integrate(vacuum_state(30), p, grid), CutoffExceeded);
  EXPECT_THROW(integrate(vacuum_state(3), p, short_grid(p.coupling)), CutoffExceeded);
}

TEST(Integrate, StateInvariantsAlongTheTrajectory) {
  const ModelParams p = fig8();
  const auto grid = short_grid(p.coupling);
  const auto states = integrate(thermal_state(0.3, 0.1, 30), p, grid);
  for (const auto& s : states) {
    EXPECT_NEAR(trace(s).real(), 1.0, 1e-8);
    EXPECT_LT(hermiticity_residual(s), 1e-8);
    EXPECT_GT(min_eigenvalue(s), -1e-8);
  }
}

TEST(Integrate, GaussianClosure) {
  const ModelParams p = fig8();
  const auto grid = short_grid(p.coupling);
  const auto states = integrate(coherent_state(cplx(0.6, -0.3), cplx(0.0, 0.4), 60, 3), p, grid);
  for (const auto& s : states) EXPECT_LT(max_third_cumulant(s), 1e-7);
}

TEST(Integrate, FiniteDifferenceObeysAdjointLyapunovEquation) {
  const ModelParams p = fig8();
  const double t = 0.2, h = 1e-3;
  const std::vector<double> ts{t - h, t, t + h};
  const auto states = integrate(vacuum_state(40), p, ts);
  const Eigen::Matrix4cd sm = covariance_from_state(states[0]).matrix();
  const Eigen::Matrix4cd s0 = covariance_from_state(states[1]).matrix();
  const Eigen::Matrix4cd sp = covariance_from_state(states[2]).matrix();
  const Eigen::Matrix4cd fd = (sp - sm) / (2 * h);
  const DriftDiffusion dd = build_drift_diffusion(p);
  EXPECT_LT(max_abs(fd - lyapunov_rhs(dd, s0)), 1e-5);
  // Read with Y^T in place of Y^+ the equation misses the oracle by O(1).
  const Eigen::Matrix4cd transpose_reading =
      dd.y * s0 + s0 * dd.y.transpose() + 4.0 * dd.d.cast<cplx>();
  EXPECT_GT(max_abs(fd - transpose_reading), 0.1);
}

TEST(CovarianceFromState, Examples) {
  EXPECT_LT(max_abs(covariance_from_state(vacuum_state(5)).matrix() - Eigen::Matrix4cd::Identity()),
            1e-15);
  const TruncatedState coh = coherent_state(cplx(0.7, -0.2), cplx(0.0, 0.4), 30, 2);
  EXPECT_LT(max_abs(covariance_from_state(coh).matrix() - Eigen::Matrix4cd::Identity()), 1e-7);
  const double n = 0.8;
  const CovarianceXP q = to_quadrature(covariance_from_state(thermal_state(n, 0.0, 40)));
  const Eigen::Vector4d d(2 * n + 1, 2 * n + 1, 1, 1);
  EXPECT_LT((q.matrix() - Eigen::Matrix4d(d.asDiagonal())).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CovarianceFromState, BandRequirements) {
  // <a_L> needs band 1; a diagonal-only state cannot answer it.
  EXPECT_THROW(expectation(vacuum_state(5), 0, 0, 1, 0), InputError);
  EXPECT_NO_THROW(expectation(vacuum_state(5, 1), 0, 0, 1, 0));
  EXPECT_TRUE(coherent_state(1.0, 0.5, 20, 2).projected());
  EXPECT_THROW(min_eigenvalue(coherent_state(1.0, 0.5, 20, 2)), InputError);
}
