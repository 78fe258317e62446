#include <gtest/gtest.h>

#include <cmath>

#include "isospectra/analytic_spectra.hpp"
#include "isospectra/quadrature.hpp"

using namespace isospectra;
using namespace isospectra::quadrature;

namespace {

// Oracle from the Chebyshev expansion of ln(y + eta):
// g(cos t, eta) = atan2(q sin t, 1 + q cos t) / (q sin t), q = eta - sqrt(eta^2 - 1).
double g_oracle(double x, double eta) {
  const double t = std::acos(x);
  const double q = eta - std::sqrt(eta * eta - 1.0);
  return std::atan2(q * std::sin(t), 1.0 + q * std::cos(t)) / (q * std::sin(t));
}

// g~(cos t) = t cot(t/2) - 1
double g_tilde_oracle(double x) {
  const double t = std::acos(x);
  return t / std::tan(0.5 * t) - 1.0;
}

}  // namespace

TEST(TanhSinh, KnownIntegrals) {
  EXPECT_NEAR(tanh_sinh([](double x) { return std::log(x); }, 0.0, 1.0), -1.0, 1e-12);
  EXPECT_NEAR(tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0), 2.0, 1e-10);
  EXPECT_NEAR(tanh_sinh([](double x) { return std::exp(x); }, -1.0, 2.0), std::exp(2.0) - std::exp(-1.0), 1e-12);
  EXPECT_EQ(tanh_sinh([](double) { return 1.0; }, 1.0, 1.0), 0.0);
}

TEST(TanhSinh, ReportsNonConvergence) {
  // A jump in the middle of the interval defeats a shallow level cap.
  auto step = [](double x) { return x < 0.3 ? 0.0 : 1.0; };
  EXPECT_THROW(tanh_sinh(step, 0.0, 1.0, {1e-14, 3}), ConvergenceError);
  EXPECT_THROW(tanh_sinh(step, 1.0, 0.0), std::invalid_argument);
}

TEST(PrincipalValue, PolynomialNumerators) {
  // PV of the bare Chebyshev kernel vanishes; f(y) = y gives pi; f(y) = y^2 gives pi x.
  for (double x : {-0.9, -0.3, 0.0, 0.5, 0.99}) {
    EXPECT_NEAR(pv_chebyshev_adaptive(PVIntegrand::from_y([](double) { return 1.0; }), x), 0.0, 1e-12);
    EXPECT_NEAR(pv_chebyshev_adaptive(PVIntegrand::from_y([](double y) { return y; }), x), kPi, 1e-11);
    EXPECT_NEAR(pv_chebyshev_adaptive(PVIntegrand::from_y([](double y) { return y * y; }), x), kPi * x, 1e-11);
  }
}

TEST(PrincipalValue, RejectsEndpoints) {
  const auto f = PVIntegrand::from_y([](double y) { return y; });
  EXPECT_THROW(pv_chebyshev(f, 1.0, 64), std::invalid_argument);
  EXPECT_THROW(pv_chebyshev(f, -1.0, 64), std::invalid_argument);
  EXPECT_THROW(pv_chebyshev(f, 0.0, 8), std::invalid_argument);
}

TEST(PrincipalValue, ConvergesUnderRefinement) {
  // Two resolutions of a smooth numerator agree far below the tolerance.
  const auto f = log_shift_integrand(3.0);
  EXPECT_NEAR(pv_chebyshev(f, 0.4, 256), pv_chebyshev(f, 0.4, 1024), 1e-12);
}

TEST(Deformation, MatchesClosedFormOracle) {
  double worst = 0.0;
  for (double eta : {1.0005, 1.02, 1.1, 1.5, 2.0, 3.0, 10.0, 1e3, 1e6}) {
    for (double x : {-0.999, -0.9, -0.5, 0.0, 0.3, 0.9, 0.999}) {
      worst = std::max(worst, std::abs(deformation_g(x, eta) - g_oracle(x, eta)));
    }
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Deformation, GoldenTable) {
  // 30-digit reference values, rounded.
  struct Row {
    double eta, x, g;
  };
  const Row rows[] = {
      {1.1, -0.9, 2.09093480394684569}, {1.1, 0.0, 0.889061254486912066}, {1.1, 0.9, 0.627366214622808722},
      {1.5, -0.9, 1.49236481159385523}, {1.5, 0.0, 0.955225903266498396}, {1.5, 0.9, 0.740401900290268579},
      {3.0, -0.9, 1.17954482994701375}, {3.0, 0.0, 0.990357330526159634}, {3.0, 0.9, 0.865030378168198985},
  };
  for (const Row& r : rows) EXPECT_NEAR(deformation_g(r.x, r.eta), r.g, 1e-10) << r.eta << " " << r.x;
}

TEST(Deformation, LargeEtaTendsToOne) {
  for (double x : {-0.5, 0.0, 0.5}) EXPECT_NEAR(deformation_g(x, 1e8), 1.0, 1e-7);
}

TEST(Deformation, GTildeMatchesOracle) {
  for (double x : {-1.0 + 1e-9, -0.99999, -0.5, 0.0, 0.5, 0.9999, 1.0 - 1e-9}) {
    EXPECT_NEAR(deformation_g_tilde(x), g_tilde_oracle(x), 1e-9) << x;
  }
  // g~(0) = pi/2 - 1
  EXPECT_NEAR(deformation_g_tilde(0.0), kPi / 2.0 - 1.0, 1e-11);
}

TEST(Deformation, RejectsBadEta) {
  EXPECT_THROW(deformation_g(0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(deformation_g(0.0, std::nan("")), std::invalid_argument);
}

TEST(Moments, MarchenkoPastur) {
  const SpectralDensity mp = mp_density();
  EXPECT_NEAR(density_moment(mp, MomentWeight::one), 1.0, 1e-10);
  EXPECT_NEAR(density_moment(mp, MomentWeight::lambda), 1.0, 1e-10);
  // \int lambda ln lambda sigma_MP = 1/2
  EXPECT_NEAR(density_moment(mp, MomentWeight::lambda_log_lambda), 0.5, 1e-10);
  EXPECT_NEAR(density_mass(mp, 0.0, 4.0), 1.0, 1e-10);
  EXPECT_NEAR(density_mass(mp, 0.0, 2.0) + density_mass(mp, 2.0, 4.0), 1.0, 1e-10);
  EXPECT_EQ(density_mass(mp, 5.0, 6.0), 0.0);
}

TEST(Moments, AtomIsOptional) {
  const SpectralDensity evap = evaporated_spectrum(EntropyDeficit(1.0, 50));
  const double with = density_moment(evap, MomentWeight::one);
  const double without = density_moment(evap, MomentWeight::one, {1e-10, false});
  EXPECT_NEAR(without, 1.0, 1e-10);
  EXPECT_NEAR(with - without, 1.0 / 50.0, 1e-12);
}

TEST(Hilbert, MarchenkoPastur) {
  // PV \int sigma_MP(l)/(l - x) dl = -1/2 on (0, 4): the beta = 0 saddle point
  // 2 PV = -xi with xi = 1.
  const SpectralDensity mp = mp_density();
  for (double x : {0.1, 1.0, 2.5, 3.9}) EXPECT_NEAR(density_hilbert(mp, x), -0.5, 1e-9);
  EXPECT_THROW(density_hilbert(mp, 0.0), std::invalid_argument);
}

TEST(Tricomi, ResidualIsFlatForExactSolutions) {
  for (double beta : {0.0, 0.7, 1.5, 2.5, 4.0}) {
    const ResidualReport r = tricomi_residual(sigma(InverseTemperature(beta)), beta, 16);
    EXPECT_LT(r.residual_std, 1e-8) << beta;
    EXPECT_EQ(r.sample_points.size(), 16u);
  }
}

TEST(Tricomi, DetectsAWrongDensity) {
  // The beta = 0 law does not solve the beta = 2 equation.
  const ResidualReport r = tricomi_residual(mp_density(), 2.0, 16);
  EXPECT_GT(r.residual_std, 1e-2);
}
