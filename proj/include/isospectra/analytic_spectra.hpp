#pragma once

// Closed-form typical entanglement spectra at fixed von Neumann entropy.
//
// Rescaled eigenvalues lambda = N lambda_k. The entropy deficit is
// u = ln N - S_vN and beta is its conjugate multiplier. Three phases:
//
//   gapped      beta > 3/2          0 <= u < u_c     support [a, b], a > 0
//   gapless     0 <= beta <= 3/2    u_c <= u <= 1/2  support [0, b]
//   evaporated  (beta < 0)          1/2 < u <= ln N  atom mu = u / ln N + MP sea
//
// with gamma = sqrt(1 + 2 beta) and u_c = ln(2/3) + 2/3.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "isospectra/quadrature.hpp"
#include "isospectra/spectral_density.hpp"

namespace isospectra {

inline constexpr double kBetaCritical = 1.5;

// ln(2/3) + 2/3
inline const double kUCritical = std::log(2.0 / 3.0) + 2.0 / 3.0;

struct CriticalValues {
  double beta_c;
  double u_c;
};

inline CriticalValues critical_values() { return {kBetaCritical, kUCritical}; }

// Lagrange multiplier conjugate to the entropy deficit. Always >= 0; the
// evaporated phase is addressed through EntropyDeficit instead.
struct InverseTemperature {
  double value = 0.0;

  InverseTemperature() = default;
  explicit InverseTemperature(double beta) : value(beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
      throw std::domain_error("InverseTemperature: beta must be finite and >= 0, got " + std::to_string(beta));
    }
  }
};

// u = ln N - S_vN. n_dim is required only in the evaporated phase (u > 1/2)
// and by quantities that scale with N.
struct EntropyDeficit {
  double value = 0.0;
  std::optional<int> n_dim;

  EntropyDeficit() = default;
  explicit EntropyDeficit(double u, std::optional<int> n = std::nullopt) : value(u), n_dim(n) {
    if (!(u >= 0.0) || !std::isfinite(u)) {
      throw std::domain_error("EntropyDeficit: u must be finite and >= 0, got " + std::to_string(u));
    }
    if (n) {
      if (*n < 2) throw std::domain_error("EntropyDeficit: n_dim must be >= 2");
      if (u > std::log(static_cast<double>(*n))) {
        throw std::domain_error("EntropyDeficit: u exceeds ln(n_dim)");
      }
    } else if (u > 0.5) {
      throw std::domain_error("EntropyDeficit: u > 1/2 requires n_dim (evaporated phase)");
    }
  }

  double log_n() const {
    if (!n_dim) throw std::domain_error("EntropyDeficit: n_dim not set");
    return std::log(static_cast<double>(*n_dim));
  }
};

enum class Phase { gapped, gapless, evaporated };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::gapped:
      return "gapped";
    case Phase::gapless:
      return "gapless";
    case Phase::evaporated:
      return "evaporated";
  }
  return "unknown";
}

inline Phase phase_of(InverseTemperature beta) {
  return beta.value > kBetaCritical ? Phase::gapped : Phase::gapless;
}

inline Phase phase_of(double u) {
  if (u < kUCritical) return Phase::gapped;
  if (u <= 0.5) return Phase::gapless;
  return Phase::evaporated;
}

inline Phase phase_of(EntropyDeficit u) { return phase_of(u.value); }

inline SupportInterval support_edges(InverseTemperature beta) {
  const double b = beta.value;
  if (b > kBetaCritical) {
    const double r = std::sqrt(b - 0.5);
    return {(r - 1.0) * (r - 1.0) / b, (r + 1.0) * (r + 1.0) / b};
  }
  // (4/beta)(gamma - 1) = 8 / (gamma + 1); finite at beta = 0.
  const double gamma = std::sqrt(1.0 + 2.0 * b);
  return {0.0, 8.0 / (gamma + 1.0)};
}

// Per-branch closed forms and their beta-derivatives.
namespace branch {

inline double u_gapped(double beta) { return std::log1p(-0.5 / beta) + 1.0 / beta; }

// -ln((gamma+1)/2) - gamma/(2 beta) + 1 + 1/(2 beta), with the removable
// 0/0 at beta = 0 rewritten as -1/(1 + gamma).
inline double u_gapless(double beta) {
  const double gamma = std::sqrt(1.0 + 2.0 * beta);
  return -std::log(0.5 * (gamma + 1.0)) - 1.0 / (1.0 + gamma) + 1.0;
}

inline double s_gapped(double beta) { return 0.5 * std::log(1.0 / beta - 0.5 / (beta * beta)) - 0.25; }

inline double s_gapless(double beta) {
  const double gamma = std::sqrt(1.0 + 2.0 * beta);
  return -std::log(0.5 * (gamma + 1.0)) + gamma - 0.5 * beta - 1.5;
}

inline double s_evaporated(double u, double log_n) { return std::log1p(-u / log_n) - 0.5; }

// du/dbeta, d2u/dbeta2, d3u/dbeta3.
struct UDerivatives {
  double d1, d2, d3;
};

inline UDerivatives du_gapped(double beta) {
  const double q = 2.0 * beta - 1.0;
  const double b2 = beta * beta;
  return {2.0 / q - 1.0 / beta - 1.0 / b2, -4.0 / (q * q) + 1.0 / b2 + 2.0 / (b2 * beta),
          16.0 / (q * q * q) - 2.0 / (b2 * beta) - 6.0 / (b2 * b2)};
}

inline UDerivatives du_gapless(double beta) {
  const double g = std::sqrt(1.0 + 2.0 * beta);
  const double p = 1.0 + g;
  return {-1.0 / (p * p), 2.0 / (g * p * p * p), -2.0 * (1.0 + 4.0 * g) / (g * g * g * p * p * p * p)};
}

}  // namespace branch

inline EntropyDeficit u_of_beta(InverseTemperature beta) {
  const double b = beta.value;
  return EntropyDeficit(b > kBetaCritical ? branch::u_gapped(b) : branch::u_gapless(b));
}

namespace detail {

// Solve u(beta) = target on one branch: bisection on a bracket, then Newton
// with the analytic slope. u is strictly decreasing on each branch.
inline double invert_branch(Phase phase, double target, double tolerance) {
  const bool gapped = phase == Phase::gapped;
  auto u = [&](double b) { return gapped ? branch::u_gapped(b) : branch::u_gapless(b); };
  auto du = [&](double b) { return gapped ? branch::du_gapped(b).d1 : branch::du_gapless(b).d1; };

  double lo = gapped ? kBetaCritical : 0.0;
  double hi = kBetaCritical;
  if (gapped) {
    // u ~ 1/(2 beta) for large beta.
    hi = 2.0;
    while (u(hi) > target) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) throw std::domain_error("beta_of_u: u too small to invert");
    }
  }
  for (int i = 0; i < 200 && (hi - lo) > 1e-3 * std::max(1.0, lo); ++i) {
    const double mid = 0.5 * (lo + hi);
    (u(mid) > target ? lo : hi) = mid;
  }
  double b = 0.5 * (lo + hi);
  for (int i = 0; i < 100; ++i) {
    const double step = (u(b) - target) / du(b);
    double next = b - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    (u(next) > target ? lo : hi) = next;
    const bool done = std::abs(next - b) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, next);
    b = next;
    if (done) break;
  }
  if (std::abs(u(b) - target) > tolerance) {
    throw ConvergenceError("beta_of_u: inversion residual above tolerance at u = " + std::to_string(target));
  }
  return b;
}

}  // namespace detail

// Inverse of u_of_beta on 0 < u <= 1/2; u = 1/2 maps to beta = 0.
inline InverseTemperature beta_of_u(EntropyDeficit u, double tolerance = 1e-12) {
  const double v = u.value;
  if (!(v > 0.0)) throw std::domain_error("beta_of_u: u must be > 0 (beta diverges at u = 0)");
  if (v > 0.5) throw std::domain_error("beta_of_u: u > 1/2 is the evaporated phase; use evaporated_spectrum");
  if (v == 0.5) return InverseTemperature(0.0);
  if (v == kUCritical) return InverseTemperature(kBetaCritical);
  return InverseTemperature(detail::invert_branch(phase_of(v), v, tolerance));
}

// Marchenko-Pastur law (1/2pi) sqrt((4 - lambda)/lambda) on [0, 4].
inline double mp_value(double lambda) {
  return std::sqrt((4.0 - lambda) / lambda) / (2.0 * quadrature::kPi);
}

inline SpectralDensity mp_density() { return SpectralDensity({0.0, 4.0}, mp_value, true); }

// Typical spectrum at inverse temperature beta.
inline SpectralDensity sigma(InverseTemperature beta, quadrature::PVOptions opts = {}) {
  const double bt = beta.value;
  const SupportInterval s = support_edges(beta);
  if (bt > kBetaCritical) {
    const double w = s.width();
    const double eta = (s.b + s.a) / w;
    const double scale = 8.0 / (quadrature::kPi * w * w);
    return SpectralDensity(s, [s, w, eta, scale, opts](double lambda) {
      const double x = 2.0 * (lambda - s.a) / w - 1.0;
      // within rounding of an edge, where the square root vanishes
      if (!(std::abs(x) < 1.0)) return 0.0;
      return scale * std::sqrt((s.b - lambda) * (lambda - s.a)) * quadrature::deformation_g(x, eta, opts);
    });
  }
  if (bt == 0.0) return mp_density();
  const double b = s.b;
  const double amplitude = bt * b / 4.0;
  return SpectralDensity(
      s,
      [b, amplitude, opts](double lambda) {
        const double x = 2.0 * lambda / b - 1.0;
        // g~ -> -1 continuously at the lower edge; x rounds to -1 only for
        // lambda below b * 1e-16.
        if (!(x < 1.0)) return 0.0;
        const double deformation = x > -1.0 ? quadrature::deformation_g_tilde(x, opts) : -1.0;
        return 2.0 / (quadrature::kPi * b) * std::sqrt((b - lambda) / lambda) * (1.0 + amplitude * deformation);
      },
      true);
}

// Evaporated phase: atom at mu = u / ln N plus a Marchenko-Pastur sea in the
// variable (N - 1) lambda_k / (1 - mu).
inline SpectralDensity evaporated_spectrum(EntropyDeficit u) {
  if (!u.n_dim) throw std::domain_error("evaporated_spectrum: n_dim is required");
  if (!(u.value > 0.5)) throw std::domain_error("evaporated_spectrum: requires u > 1/2");
  const double mu = u.value / u.log_n();
  return SpectralDensity({0.0, 4.0}, mp_value, true, DensityVariable::sea_rescaled,
                         Atom{mu, 1.0 / static_cast<double>(*u.n_dim)});
}

// Entropy of the entropy s(u), the large-N log-density per N^2 of the
// eigenvalue law at the typical spectrum. Diverges to -inf at u = ln N.
inline double entropy_density_s(EntropyDeficit u) {
  const double v = u.value;
  if (!(v > 0.0)) throw std::domain_error("entropy_density_s: u must be > 0 (s is unbounded below at u = 0)");
  switch (phase_of(v)) {
    case Phase::gapped:
      return branch::s_gapped(beta_of_u(u).value);
    case Phase::gapless:
      return branch::s_gapless(beta_of_u(u).value);
    case Phase::evaporated:
      if (!u.n_dim) throw std::domain_error("entropy_density_s: u > 1/2 requires n_dim");
      return branch::s_evaporated(v, u.log_n());
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// N^2 s(u): log of the relative volume of the isoentropic manifold.
inline double log_volume(EntropyDeficit u) {
  if (!u.n_dim) throw std::domain_error("log_volume: n_dim is required");
  const double n = *u.n_dim;
  return n * n * entropy_density_s(u);
}

}  // namespace isospectra
