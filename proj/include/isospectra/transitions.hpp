#pragma once

// Derivatives of the entropy density s(u) and detection of the phase
// transitions from their one-sided jumps.
//
// Along the gapped and gapless branches ds/du = beta(u), so
//   s''   = 1 / u'
//   s'''  = -u'' / u'^3
//   s'''' = (3 u''^2 - u' u''') / u'^5
// with u', u'', u''' the beta-derivatives of u(beta). On the evaporated
// branch s = ln(1 - u/ln N) - 1/2 and s^(k) = -(k-1)! / (ln N - u)^k.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "isospectra/analytic_spectra.hpp"

namespace isospectra {

inline constexpr int kMaxDerivativeOrder = 4;

// s(u) evaluated with the closed form of a fixed branch, including the
// closed boundary of that branch (u_c for both gapped and gapless, 1/2 for
// gapless and evaporated).
inline double entropy_density_on_branch(double u, Phase phase, std::optional<double> log_n = std::nullopt) {
  switch (phase) {
    case Phase::gapped: {
      if (!(u > 0.0 && u <= kUCritical)) throw std::domain_error("gapped branch requires 0 < u <= u_c");
      const double beta = u == kUCritical ? kBetaCritical : detail::invert_branch(Phase::gapped, u, 1e-12);
      return branch::s_gapped(beta);
    }
    case Phase::gapless: {
      if (!(u >= kUCritical && u <= 0.5)) throw std::domain_error("gapless branch requires u_c <= u <= 1/2");
      double beta = 0.0;
      if (u == kUCritical) {
        beta = kBetaCritical;
      } else if (u < 0.5) {
        beta = detail::invert_branch(Phase::gapless, u, 1e-12);
      }
      return branch::s_gapless(beta);
    }
    case Phase::evaporated:
      if (!log_n) throw std::domain_error("evaporated branch requires ln N");
      if (!(u >= 0.5 && u <= *log_n)) throw std::domain_error("evaporated branch requires 1/2 <= u <= ln N");
      return branch::s_evaporated(u, *log_n);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace detail {

inline std::vector<double> chain_rule_derivatives(Phase phase, double u, std::optional<double> log_n, int max_order) {
  std::vector<double> out;
  out.reserve(max_order);
  if (phase == Phase::evaporated) {
    const double gap = *log_n - u;
    double factorial = 1.0;
    for (int k = 1; k <= max_order; ++k) {
      out.push_back(-factorial / std::pow(gap, k));
      factorial *= k;
    }
    return out;
  }
  double beta = 0.0;
  if (u == kUCritical) {
    beta = kBetaCritical;
  } else if (u < 0.5) {
    beta = invert_branch(phase, u, 1e-12);
  }
  const branch::UDerivatives d = phase == Phase::gapped ? branch::du_gapped(beta) : branch::du_gapless(beta);
  const std::array<double, 4> all{
      beta,
      1.0 / d.d1,
      -d.d2 / (d.d1 * d.d1 * d.d1),
      (3.0 * d.d2 * d.d2 - d.d1 * d.d3) / std::pow(d.d1, 5),
  };
  out.assign(all.begin(), all.begin() + max_order);
  return out;
}

inline void check_order(int max_order) {
  if (max_order < 1 || max_order > kMaxDerivativeOrder) {
    throw std::invalid_argument("derivative order must lie in [1, 4]");
  }
}

inline std::optional<double> log_n_of(const EntropyDeficit& u) {
  if (!u.n_dim) return std::nullopt;
  return std::log(static_cast<double>(*u.n_dim));
}

}  // namespace detail

// d^k s / du^k for k = 1..max_order via the chain rule through beta. The
// branch points u_c and 1/2 are rejected (the one-sided limits differ).
inline std::vector<double> s_derivatives(EntropyDeficit u, int max_order = kMaxDerivativeOrder) {
  detail::check_order(max_order);
  const double v = u.value;
  if (!(v > 0.0)) throw std::domain_error("s_derivatives: u must be > 0");
  if (v == kUCritical || v == 0.5) {
    throw std::domain_error("s_derivatives: u is a branch point; use one-sided estimates");
  }
  const Phase phase = phase_of(v);
  if (phase == Phase::evaporated && !u.n_dim) throw std::domain_error("s_derivatives: u > 1/2 requires n_dim");
  if (phase == Phase::evaporated && v >= detail::log_n_of(u).value()) {
    throw std::domain_error("s_derivatives: s diverges at u = ln N");
  }
  return detail::chain_rule_derivatives(phase, v, detail::log_n_of(u), max_order);
}

// Finite-difference weights for the derivative of given order at x0 from
// samples at `points` (Fornberg's recursion).
inline std::vector<double> finite_difference_weights(double x0, const std::vector<double>& points, int order) {
  const int n = static_cast<int>(points.size());
  if (order < 0 || n <= order) throw std::invalid_argument("finite_difference_weights: need more points than the order");
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = points[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = points[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = points[i] - points[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

// Richardson-extrapolated finite-difference estimate with an error scale.
struct DerivativeEstimate {
  double value = 0.0;
  double spread = 0.0;    // |R(h) - R(2h)| across stencil widths h, 2h, 4h
  double rounding = 0.0;  // propagated floating-point error of the samples
  double noise() const { return spread + rounding; }
};

namespace detail {

// Second-order stencil at width w; offsets are multiples of w.
template <typename F>
std::pair<double, double> stencil_estimate(F&& s, double u0, double w, const std::vector<int>& offsets, int order) {
  std::vector<double> pts;
  pts.reserve(offsets.size());
  for (int j : offsets) pts.push_back(u0 + j * w);
  const std::vector<double> c = finite_difference_weights(u0, pts, order);
  double sum = 0.0;
  double abs_sum = 0.0;
  double max_abs_s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double v = s(pts[i]);
    sum += c[i] * v;
    abs_sum += std::abs(c[i]);
    max_abs_s = std::max(max_abs_s, std::abs(v));
  }
  return {sum, 8.0 * std::numeric_limits<double>::epsilon() * max_abs_s * abs_sum};
}

template <typename F>
DerivativeEstimate richardson(F&& s, double u0, double h, const std::vector<int>& offsets, int order) {
  const auto [d1, r1] = stencil_estimate(s, u0, h, offsets, order);
  const auto [d2, r2] = stencil_estimate(s, u0, 2.0 * h, offsets, order);
  const auto [d4, r4] = stencil_estimate(s, u0, 4.0 * h, offsets, order);
  // Leading error term is O(w^2) for every stencil used here.
  const double rh = (4.0 * d1 - d2) / 3.0;
  const double r2h = (4.0 * d2 - d4) / 3.0;
  return {rh, std::abs(rh - r2h), (4.0 * r1 + r2) / 3.0};
}

inline std::vector<int> central_offsets(int order) {
  const int m = (order + 1) / 2;
  std::vector<int> out;
  for (int j = -m; j <= m; ++j) out.push_back(j);
  return out;
}

inline std::vector<int> one_sided_offsets(int order, int direction) {
  std::vector<int> out;
  for (int j = 0; j < order + 2; ++j) out.push_back(direction * j);
  return out;
}

inline bool interval_crosses_branch(double lo, double hi) {
  auto inside = [&](double p) { return p > lo && p < hi; };
  return inside(kUCritical) || inside(0.5);
}

}  // namespace detail

// Half-width of the widest one-sided stencil used by the detector, in units
// of the base step.
inline constexpr int kOneSidedSpanSteps = 4 * (kMaxDerivativeOrder + 1);

// Central finite differences of s (step h, 2h, 4h; Richardson), as an
// independent check of s_derivatives. Rejects stencils crossing u_c or 1/2.
inline std::vector<DerivativeEstimate> s_derivatives_fd(EntropyDeficit u, int max_order = kMaxDerivativeOrder,
                                                        double step = 1e-3) {
  detail::check_order(max_order);
  if (!(step > 0.0)) throw std::invalid_argument("s_derivatives_fd: step must be > 0");
  const double v = u.value;
  const Phase phase = phase_of(v);
  const std::optional<double> log_n = detail::log_n_of(u);
  if (phase == Phase::evaporated && !log_n) throw std::domain_error("s_derivatives_fd: u > 1/2 requires n_dim");
  const double reach = 4.0 * step * ((max_order + 1) / 2);
  const bool past_top = phase == Phase::evaporated && v + reach >= *log_n;
  if (v - reach <= 0.0 || past_top || detail::interval_crosses_branch(v - reach, v + reach) || v == kUCritical ||
      v == 0.5) {
    throw std::domain_error("s_derivatives_fd: stencil around u = " + std::to_string(v) +
                            " crosses a branch point or the domain edge");
  }
  auto s = [&](double x) { return entropy_density_on_branch(x, phase, log_n); };
  std::vector<DerivativeEstimate> out;
  for (int k = 1; k <= max_order; ++k) out.push_back(detail::richardson(s, v, step, detail::central_offsets(k), k));
  return out;
}

struct TransitionGrid {
  double u_min = 0.05;       // first grid point
  double top_margin = 0.05;  // last grid point is ln N - top_margin
  int points = 120;
  double step = 1e-3;        // base finite-difference step
  double threshold = 10.0;   // jump must exceed threshold * noise
};

struct DerivativeJump {
  double u = 0.0;
  int order = 0;
  double left = 0.0;
  double right = 0.0;
  double jump = 0.0;
  double noise = 0.0;
  bool flagged = false;
};

struct DetectedTransition {
  double u = 0.0;
  int lowest_order = 0;
  // |s(u+) - s(u-)|; nonzero at u = 1/2 for finite N, O(1/ln N).
  double value_gap = 0.0;
};

struct TransitionReport {
  int n_dim = 0;
  double u_c = 0.0;
  std::vector<DerivativeJump> one_sided_derivatives;
  std::vector<DetectedTransition> detected;
  // First-derivative jump at u = 1/2 and its product with ln N.
  double half_first_jump = 0.0;
  double half_first_jump_times_log_n = 0.0;
};

// One-sided estimates of s^(k), k = 1..4, at each grid point (plus u_c and
// 1/2). A transition is reported at points where some order jumps by more
// than threshold * noise; the lowest such order is recorded.
inline TransitionReport detect_transitions(int n_dim, const TransitionGrid& grid = {}) {
  if (n_dim < 3) throw std::invalid_argument("detect_transitions: n_dim must be >= 3");
  if (grid.points < 2 || !(grid.step > 0.0)) throw std::invalid_argument("detect_transitions: bad grid");
  const double log_n = std::log(static_cast<double>(n_dim));
  const double u_max = log_n - grid.top_margin;
  if (!(grid.u_min > 0.0 && u_max > grid.u_min)) throw std::invalid_argument("detect_transitions: empty grid");
  const double span = kOneSidedSpanSteps * grid.step;

  std::vector<double> candidates{kUCritical, 0.5};
  for (int i = 0; i < grid.points; ++i) {
    const double u = grid.u_min + (u_max - grid.u_min) * i / (grid.points - 1);
    if (u - span <= 0.0 || u + span >= log_n) continue;
    if (detail::interval_crosses_branch(u - span, u + span)) continue;
    candidates.push_back(u);
  }
  std::sort(candidates.begin(), candidates.end());

  TransitionReport report;
  report.n_dim = n_dim;
  report.u_c = kUCritical;
  for (double u : candidates) {
    Phase left_phase = phase_of(u);
    Phase right_phase = left_phase;
    if (u == kUCritical) {
      left_phase = Phase::gapped;
      right_phase = Phase::gapless;
    } else if (u == 0.5) {
      left_phase = Phase::gapless;
      right_phase = Phase::evaporated;
    }
    auto s_left = [&](double x) { return entropy_density_on_branch(x, left_phase, log_n); };
    auto s_right = [&](double x) { return entropy_density_on_branch(x, right_phase, log_n); };

    std::optional<int> lowest;
    for (int k = 1; k <= kMaxDerivativeOrder; ++k) {
      const DerivativeEstimate l = detail::richardson(s_left, u, grid.step, detail::one_sided_offsets(k, -1), k);
      const DerivativeEstimate r = detail::richardson(s_right, u, grid.step, detail::one_sided_offsets(k, +1), k);
      DerivativeJump row;
      row.u = u;
      row.order = k;
      row.left = l.value;
      row.right = r.value;
      row.jump = std::abs(r.value - l.value);
      row.noise = std::max(l.spread, r.spread) + l.rounding + r.rounding;
      row.flagged = row.jump > grid.threshold * row.noise;
      if (row.flagged && !lowest) lowest = k;
      if (u == 0.5 && k == 1) {
        report.half_first_jump = row.jump;
        report.half_first_jump_times_log_n = row.jump * log_n;
      }
      report.one_sided_derivatives.push_back(row);
    }
    if (lowest) report.detected.push_back({u, *lowest, std::abs(s_right(u) - s_left(u))});
  }
  return report;
}

// Least-squares fit jump ~ c / ln N over (N, jump) pairs.
struct InverseLogFit {
  double c = 0.0;
  double max_relative_deviation = 0.0;
};

inline InverseLogFit fit_inverse_log(const std::vector<std::pair<int, double>>& samples) {
  if (samples.empty()) throw std::invalid_argument("fit_inverse_log: no samples");
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [n, jump] : samples) {
    const double x = 1.0 / std::log(static_cast<double>(n));
    sxy += x * jump;
    sxx += x * x;
  }
  InverseLogFit fit;
  fit.c = sxy / sxx;
  for (const auto& [n, jump] : samples) {
    const double model = fit.c / std::log(static_cast<double>(n));
    fit.max_relative_deviation = std::max(fit.max_relative_deviation, std::abs(jump - model) / model);
  }
  return fit;
}

}  // namespace isospectra
