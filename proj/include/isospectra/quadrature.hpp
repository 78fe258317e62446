#pragma once

// Singular-integral and moment machinery.
//
// Principal-value integrals of the Chebyshev-weighted Cauchy kernel
//
//     PV \int_{-1}^{1} f(y) / (sqrt(1 - y^2) (y - x)) dy ,   |x| < 1,
//
// are evaluated by singularity subtraction. With y = cos(t) the bare kernel
// has vanishing principal value, so the integral equals
//
//     \int_0^pi (f(cos t) - f(x)) / (cos t - x) dt ,
//
// whose integrand is regular. Smooth f uses Gauss-Chebyshev nodes (the
// midpoint rule in t). Integrands with endpoint singularities in t (log or
// square-root behavior at y = -1) use tanh-sinh quadrature on [0, pi].
//
// Integrands are supplied as functions of the angle t so that 1 + y and
// 1 - y can be formed without cancellation (1 + cos t = 2 cos^2(t/2)).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isospectra/errors.hpp"
#include "isospectra/spectral_density.hpp"

namespace isospectra::quadrature {

inline constexpr double kPi = std::numbers::pi;

struct TanhSinhOptions {
  double tolerance = 1e-12;  // relative, floored at an absolute value of the same size
  int max_level = 12;
  double absolute_tolerance = 0.0;
};

// Double-exponential quadrature of f over [lo, hi]. Endpoint singularities
// (integrable) are tolerated; the nodes never touch the endpoints.
template <typename F>
double tanh_sinh(F&& f, double lo, double hi, TanhSinhOptions opts = {}) {
  if (!(hi > lo)) {
    if (hi == lo) return 0.0;
    throw std::invalid_argument("tanh_sinh: requires lo <= hi");
  }
  constexpr double kTMax = 4.5;
  const double half = 0.5 * (hi - lo);

  auto node_sum = [&](double t) {
    const double s = 0.5 * kPi * std::sinh(t);
    const double cs = std::cosh(s);
    const double w = half * 0.5 * kPi * std::cosh(t) / (cs * cs);
    if (!(w > 0.0) || !std::isfinite(w)) return 0.0;
    // Distance to the nearer endpoint, computed without cancellation.
    const double x = s >= 0.0 ? hi - (hi - lo) / (1.0 + std::exp(2.0 * s))
                              : lo + (hi - lo) / (1.0 + std::exp(-2.0 * s));
    if (x <= lo || x >= hi) return 0.0;
    return w * f(x);
  };

  double h = 1.0;
  double sum = 0.0;
  for (int k = -static_cast<int>(kTMax); k <= static_cast<int>(kTMax); ++k) sum += node_sum(k * h);
  double estimate = h * sum;

  for (int level = 1; level <= opts.max_level; ++level) {
    h *= 0.5;
    double fresh = 0.0;
    for (double t = h; t <= kTMax; t += 2.0 * h) fresh += node_sum(t) + node_sum(-t);
    sum += fresh;
    const double next = h * sum;
    const double change = std::abs(next - estimate);
    estimate = next;
    if (level >= 3 && (change <= opts.tolerance * std::max(1.0, std::abs(next)) ||
                       change <= opts.absolute_tolerance)) {
      return next;
    }
  }
  throw ConvergenceError("tanh_sinh: no convergence to " + std::to_string(opts.tolerance) +
                         " after " + std::to_string(opts.max_level) + " levels");
}

// Numerator f of the Chebyshev PV kernel, held as a function of the angle
// t = acos(y).
struct PVIntegrand {
  std::function<double(double)> of_angle;
  // Log or square-root behavior at an endpoint; routes to tanh-sinh.
  bool endpoint_singular = false;

  static PVIntegrand from_y(std::function<double(double)> f, bool endpoint_singular = false) {
    return {[f = std::move(f)](double t) { return f(std::cos(t)); }, endpoint_singular};
  }
  static PVIntegrand from_angle(std::function<double(double)> f, bool endpoint_singular = false) {
    return {std::move(f), endpoint_singular};
  }

  double at(double y) const { return of_angle(std::acos(y)); }
};

struct PVOptions {
  int n_nodes = 256;
  int max_nodes = 1 << 16;
  double tolerance = 1e-10;
  double absolute_tolerance = 0.0;
};

namespace detail {

inline void check_pv_point(double x) {
  if (!(std::abs(x) < 1.0)) {
    throw std::invalid_argument("pv_chebyshev: evaluation point must satisfy |x| < 1, got " +
                                std::to_string(x));
  }
}

// (f(cos t) - f(x)) / (cos t - x), with a second-order Taylor fallback when
// a node lands close to the pole. Both the window and the differencing step
// scale with the distance 1 - |x| to the nearer endpoint.
class SubtractedKernel {
 public:
  SubtractedKernel(const PVIntegrand& f, double x)
      : f_(f),
        x_(x),
        angle_x_(std::acos(x)),
        fx_(f.of_angle(angle_x_)),
        scale_(std::min(1.0, 1.0 - std::abs(x))) {}

  double angle_x() const { return angle_x_; }

  double operator()(double t) const {
    // cos t - x without cancellation near either endpoint.
    double d = 0.0;
    if (x_ < 0.0) {
      const double c = std::cos(0.5 * t);
      d = 2.0 * c * c - (1.0 + x_);
    } else {
      const double s = std::sin(0.5 * t);
      d = (1.0 - x_) - 2.0 * s * s;
    }
    if (std::abs(d) > kNear * scale_) return (f_.of_angle(t) - fx_) / d;
    if (!derivs_) {
      const double h = 1e-3 * scale_;
      const double fp = f_.at(x_ + h);
      const double fm = f_.at(x_ - h);
      derivs_ = std::pair{(fp - fm) / (2.0 * h), (fp - 2.0 * fx_ + fm) / (h * h)};
    }
    return derivs_->first + 0.5 * derivs_->second * d;
  }

 private:
  static constexpr double kNear = 1e-6;
  const PVIntegrand& f_;
  double x_;
  double angle_x_;
  double fx_;
  double scale_;
  mutable std::optional<std::pair<double, double>> derivs_;
};

}  // namespace detail

// Fixed n-node Gauss-Chebyshev evaluation of the subtracted PV integral.
inline double pv_chebyshev(const PVIntegrand& f, double x, int n_nodes) {
  detail::check_pv_point(x);
  if (n_nodes < 16) throw std::invalid_argument("pv_chebyshev: n_nodes must be >= 16");
  const detail::SubtractedKernel kernel(f, x);
  const double step = kPi / n_nodes;
  double sum = 0.0;
  for (int k = 0; k < n_nodes; ++k) sum += kernel((k + 0.5) * step);
  return step * sum;
}

// PV integral refined until two successive resolutions agree to the
// tolerance. Gauss-Chebyshev doubles n_nodes; endpoint-singular integrands
// use tanh-sinh on [0, t_x] and [t_x, pi].
inline double pv_chebyshev_adaptive(const PVIntegrand& f, double x, PVOptions opts = {}) {
  detail::check_pv_point(x);
  if (f.endpoint_singular) {
    const detail::SubtractedKernel kernel(f, x);
    const TanhSinhOptions ts{opts.tolerance, 12, opts.absolute_tolerance};
    return tanh_sinh(kernel, 0.0, kernel.angle_x(), ts) + tanh_sinh(kernel, kernel.angle_x(), kPi, ts);
  }
  int n = std::max(16, opts.n_nodes);
  double previous = pv_chebyshev(f, x, n);
  while (2 * n <= opts.max_nodes) {
    n *= 2;
    const double current = pv_chebyshev(f, x, n);
    const double change = std::abs(current - previous);
    if (change <= opts.tolerance * std::max(1.0, std::abs(current)) || change <= opts.absolute_tolerance) {
      return current;
    }
    previous = current;
  }
  throw ConvergenceError("pv_chebyshev: no convergence at x = " + std::to_string(x) + " with " +
                         std::to_string(opts.max_nodes) + " nodes");
}

// Below this eta - 1 the log singularity of ln(y + eta) sits too close to
// y = -1 for Gauss-Chebyshev and the tanh-sinh route is used.
inline constexpr double kNearUnitEta = 1e-3;

// ln(cos t + eta), formed as ln(2 cos^2(t/2) + (eta - 1)). For large eta
// the constant ln(eta) is dropped (the bare kernel has zero principal
// value) and log1p(cos t / eta) keeps the relative precision.
inline PVIntegrand log_shift_integrand(double eta) {
  const double eta_minus_one = eta - 1.0;
  if (eta > 2.0) {
    return PVIntegrand::from_angle([eta](double t) { return std::log1p(std::cos(t) / eta); });
  }
  return PVIntegrand::from_angle(
      [eta_minus_one](double t) {
        const double c = std::cos(0.5 * t);
        return std::log(2.0 * c * c + eta_minus_one);
      },
      eta_minus_one < kNearUnitEta);
}

// Universal deformation of the semicircle,
//   g(x, eta) = (eta + sqrt(eta^2 - 1)) / (2 pi) * PV \int ln(y + eta) / (sqrt(1 - y^2)(y - x)) dy.
// g -> 1 as eta -> infinity; g(., 1) diverges like 1/sqrt(1 + x) at x = -1.
inline double deformation_g(double x, double eta, PVOptions opts = {}) {
  detail::check_pv_point(x);
  if (!(eta >= 1.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("deformation_g: eta must be finite and >= 1, got " + std::to_string(eta));
  }
  const double prefactor = (eta + std::sqrt((eta - 1.0) * (eta + 1.0))) / (2.0 * kPi);
  return prefactor * pv_chebyshev_adaptive(log_shift_integrand(eta), x, opts);
}

// Gapless-phase deformation g~(x) = 2 (x + 1) g(x, 1) - 1, with the (x + 1)
// factor applied directly to the PV integral so it stays finite near x = -1.
// The integral diverges like (1 + x)^{-1/2} there, so its tolerance is set
// to give g~ the requested absolute accuracy.
inline double deformation_g_tilde(double x, PVOptions opts = {}) {
  detail::check_pv_point(x);
  const double factor = (x + 1.0) / kPi;
  opts.absolute_tolerance = std::max(opts.absolute_tolerance, opts.tolerance / factor);
  return factor * pv_chebyshev_adaptive(log_shift_integrand(1.0), x, opts) - 1.0;
}

enum class MomentWeight { one, lambda, lambda_log_lambda };

inline double moment_weight(MomentWeight w, double lambda) {
  switch (w) {
    case MomentWeight::one:
      return 1.0;
    case MomentWeight::lambda:
      return lambda;
    case MomentWeight::lambda_log_lambda:
      return lambda > 0.0 ? lambda * std::log(lambda) : 0.0;
  }
  return 0.0;
}

namespace detail {

// lambda = a + (b - a) cos^2(t/2): t = 0 maps to b, t = pi maps to a. The
// square-root edges and the lambda^{-1/2} origin become regular in t.
inline double lambda_of_angle(const SupportInterval& s, double t) {
  const double c = std::cos(0.5 * t);
  return s.a + s.width() * c * c;
}

inline double angle_of_lambda(const SupportInterval& s, double lambda) {
  const double r = std::clamp((lambda - s.a) / s.width(), 0.0, 1.0);
  return 2.0 * std::acos(std::sqrt(r));
}

}  // namespace detail

struct MomentOptions {
  double tolerance = 1e-10;
  bool include_atom = true;
};

// \int w(lambda) sigma(lambda) dlambda over the support, plus
// weight * w(position) for an atom when present and requested.
inline double density_moment(const SpectralDensity& sigma, MomentWeight weight, MomentOptions opts = {}) {
  const SupportInterval& s = sigma.support();
  const double half_width = 0.5 * s.width();
  auto integrand = [&](double t) {
    const double lambda = detail::lambda_of_angle(s, t);
    if (lambda <= s.a || lambda >= s.b) return 0.0;
    return sigma(lambda) * moment_weight(weight, lambda) * half_width * std::sin(t);
  };
  double total = tanh_sinh(integrand, 0.0, kPi, {opts.tolerance, 12});
  if (opts.include_atom && sigma.atom()) {
    total += sigma.atom()->weight * moment_weight(weight, sigma.atom()->position);
  }
  return total;
}

// Mass of the continuous part on [lo, hi] (clamped to the support).
inline double density_mass(const SpectralDensity& sigma, double lo, double hi, double tolerance = 1e-11) {
  const SupportInterval& s = sigma.support();
  lo = std::max(lo, s.a);
  hi = std::min(hi, s.b);
  if (!(hi > lo)) return 0.0;
  const double half_width = 0.5 * s.width();
  auto integrand = [&](double t) {
    const double lambda = detail::lambda_of_angle(s, t);
    if (lambda <= s.a || lambda >= s.b) return 0.0;
    return sigma(lambda) * half_width * std::sin(t);
  };
  return tanh_sinh(integrand, detail::angle_of_lambda(s, hi), detail::angle_of_lambda(s, lo), {tolerance, 12});
}

// PV \int sigma(l') / (l' - lambda) dl' for lambda strictly inside the support.
inline double density_hilbert(const SpectralDensity& sigma, double lambda, double tolerance = 1e-9) {
  const SupportInterval& s = sigma.support();
  if (!(lambda > s.a && lambda < s.b)) {
    throw std::invalid_argument("density_hilbert: lambda must lie strictly inside the support");
  }
  const PVIntegrand f = PVIntegrand::from_angle(
      [&](double t) {
        const double l = detail::lambda_of_angle(s, t);
        if (l <= s.a || l >= s.b) return 0.0;
        return sigma(l) * std::sin(t);
      },
      true);
  const double x = (lambda - s.center()) / (0.5 * s.width());
  return pv_chebyshev_adaptive(f, x, {256, 1 << 16, tolerance});
}

struct ResidualReport {
  double xi_fit = 0.0;  // fitted Lagrange multiplier xi = -mean(F)
  double residual_std = 0.0;
  double residual_max = 0.0;
  std::vector<double> sample_points;
  std::vector<double> values;  // F(lambda) at each sample point
};

struct ResidualOptions {
  // Sample points are kept in [a + margin (b - a), b - margin (b - a)].
  double margin = 0.05;
  double tolerance = 1e-9;
};

// Saddle-point test: F(lambda) = beta (ln lambda + 1) + 2 PV \int sigma(l')/(l' - lambda) dl'
// must be constant (= -xi) across the support.
inline ResidualReport tricomi_residual(const SpectralDensity& sigma, double beta, int n_points,
                                       ResidualOptions opts = {}) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("tricomi_residual: beta must be >= 0");
  if (n_points < 8) throw std::invalid_argument("tricomi_residual: n_points must be >= 8");
  if (!(opts.margin > 0.0 && opts.margin < 0.5)) throw std::invalid_argument("tricomi_residual: margin in (0, 1/2)");

  const SupportInterval& s = sigma.support();
  ResidualReport report;
  report.sample_points.reserve(n_points);
  report.values.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double frac = opts.margin + (1.0 - 2.0 * opts.margin) * i / (n_points - 1);
    const double lambda = s.a + s.width() * frac;
    const double value = beta * (std::log(lambda) + 1.0) + 2.0 * density_hilbert(sigma, lambda, opts.tolerance);
    report.sample_points.push_back(lambda);
    report.values.push_back(value);
  }
  double mean = 0.0;
  for (double v : report.values) mean += v;
  mean /= n_points;
  double var = 0.0;
  for (double v : report.values) {
    var += (v - mean) * (v - mean);
    report.residual_max = std::max(report.residual_max, std::abs(v - mean));
  }
  report.xi_fit = -mean;
  report.residual_std = std::sqrt(var / n_points);
  return report;
}

}  // namespace isospectra::quadrature
