// Spectrum, thresholds and correlation dynamics for one parameter set.

#include <cstdio>
#include <vector>

#include "gainloss/dynamics.hpp"
#include "gainloss/gaussian.hpp"
#include "gainloss/model.hpp"

int main() {
  using namespace gainloss;
  const ModelParams p{2.0, 1.6, 1.2, 2.32};  // g, gamma_L, gamma_G, Gamma_G

  const Spectrum s = eigenvalues(p);
  std::printf("E+ = %.6f%+.6fi, E- = %.6f%+.6fi\n", s.e_plus.real(), s.e_plus.imag(),
              s.e_minus.real(), s.e_minus.imag());

  const Thresholds th = thresholds(p);
  std::printf("gamma_L: PT %.4f  EP %.4f  lasing %.4f (closed form %.4f)\n", th.gamma_l_pt,
              th.gamma_l_ep, *th.gamma_l_th_numeric, th.gamma_l_th_paper);
  std::printf("regime: %s\n", std::string(to_string(classify_regime(p).kind)).c_str());

  std::vector<double> times;
  for (int i = 0; i <= 10; ++i) times.push_back(0.5 * i);
  for (const auto& sample : correlation_series(vacuum_covariance(), p, times)) {
    std::printf("t=%4.1f  I=%.6f  D_LG=%.6f  D_GL=%.6f\n", sample.t,
                sample.report.mutual_information, sample.report.discord_lg,
                sample.report.discord_gl);
  }

  const CorrelationReport ss = correlation_report(to_quadrature(stationary(p)));
  std::printf("stationary: I=%.6f  D_LG=%.6f  D_GL=%.6f\n", ss.mutual_information, ss.discord_lg,
              ss.discord_gl);
}
