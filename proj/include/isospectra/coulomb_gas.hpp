#pragma once

// Metropolis sampler for N eigenvalues on the simplex with weight
//
//     prod_{j<k} |l_j - l_k|^2 * exp(-beta N^2 (ln N + sum_k l_k ln l_k)).
//
// Moves transfer delta between a random pair, so sum l_k = 1 holds exactly
// up to rounding; a periodic renormalization removes the drift. Chain
// lengths are counted in sweeps of N proposals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "isospectra/analytic_spectra.hpp"
#include "isospectra/empirics.hpp"

namespace isospectra {

enum class InitKind { flat, mp_quantiles, custom };

inline const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::flat:
      return "flat";
    case InitKind::mp_quantiles:
      return "mp_quantiles";
    case InitKind::custom:
      return "custom";
  }
  return "unknown";
}

inline InitKind init_kind_from_string(const std::string& s) {
  if (s == "flat") return InitKind::flat;
  if (s == "mp_quantiles") return InitKind::mp_quantiles;
  if (s == "custom") return InitKind::custom;
  throw std::invalid_argument("unknown init kind '" + s + "' (flat, mp_quantiles, custom)");
}

struct ChainConfig {
  int n_dim = 64;
  double beta = 0.0;
  long steps = 20000;  // sweeps, burn-in included
  long burn_in = 2000;
  long thinning = 10;
  std::uint64_t seed = 1;
  double move_scale = -1.0;  // initial max transfer, tuned during burn-in; < 0 selects 2 / N^2
  bool autotune = true;
  double min_gap = -1.0;  // < 0 selects 1e-12 / N
  InitKind init = InitKind::mp_quantiles;
  std::vector<double> custom_init;

  double effective_min_gap() const { return min_gap < 0.0 ? 1e-12 / n_dim : min_gap; }
  // Typical eigenvalue spacing is ~1/N^2; this lands near 40 % acceptance for beta <~ 3.
  double effective_move_scale() const { return move_scale < 0.0 ? 2.0 / (double(n_dim) * n_dim) : move_scale; }

  void validate() const {
    if (n_dim < 2) throw std::invalid_argument("ChainConfig: n_dim must be >= 2");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("ChainConfig: beta must be finite and >= 0");
    if (!(steps > burn_in && burn_in >= 0)) throw std::invalid_argument("ChainConfig: need steps > burn_in >= 0");
    if (thinning < 1) throw std::invalid_argument("ChainConfig: thinning must be >= 1");
    if (!(move_scale > 0.0 || move_scale == -1.0)) {
      throw std::invalid_argument("ChainConfig: move_scale must be > 0 (or -1 for the default)");
    }
    if (init == InitKind::custom && static_cast<int>(custom_init.size()) != n_dim) {
      throw std::invalid_argument("ChainConfig: custom init needs exactly n_dim values");
    }
  }
};

struct GasState {
  std::vector<double> lambdas;
  double cached_log_weight = 0.0;
  int n_dim = 0;
};

struct ChainResult {
  std::vector<std::vector<double>> samples;
  double acceptance_rate = 0.0;
  std::vector<double> empirical_u_trace;  // one entry per sweep
  std::uint64_t seed = 0;
  double move_scale = 0.0;  // after tuning
  double max_log_weight_drift = 0.0;
  double max_renormalization = 0.0;
  std::vector<std::string> warnings;
};

// Acceptance bands outside which the move scale is considered mistuned.
inline constexpr double kAcceptanceLow = 0.05;
inline constexpr double kAcceptanceHigh = 0.95;

// 2 sum_{j<k} ln|l_j - l_k| - beta N^2 (ln N + sum l ln l); -inf for
// coincident or negative eigenvalues.
inline double log_weight(const std::vector<double>& lambdas, double beta) {
  const std::size_t n = lambdas.size();
  const double nd = static_cast<double>(n);
  double repulsion = 0.0;
  double xlogx = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double lj = lambdas[j];
    if (!(lj >= 0.0)) return -std::numeric_limits<double>::infinity();
    if (lj > 0.0) xlogx += lj * std::log(lj);
    for (std::size_t k = j + 1; k < n; ++k) {
      const double gap = std::abs(lj - lambdas[k]);
      if (gap == 0.0) return -std::numeric_limits<double>::infinity();
      repulsion += std::log(gap);
    }
  }
  const double potential = beta == 0.0 ? 0.0 : beta * nd * nd * (std::log(nd) + xlogx);
  return 2.0 * repulsion - potential;
}

inline double log_weight(const GasState& state, double beta) { return log_weight(state.lambdas, beta); }

struct PairMove {
  int i = 0;
  int j = 1;
  double delta = 0.0;
  bool auto_reject = false;
};

namespace detail {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double uniform01(std::mt19937_64& rng) { return std::generate_canonical<double, 53>(rng); }

inline int uniform_index(std::mt19937_64& rng, int n) {
  return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
}

}  // namespace detail

// Uniform unordered pair, delta uniform in [-scale, scale]. Positivity and
// min_gap are checked later against the full state in move_delta; here only
// the cheap positivity test is flagged.
inline PairMove propose_pair_move(const GasState& state, std::mt19937_64& rng, double move_scale) {
  const int n = static_cast<int>(state.lambdas.size());
  PairMove m;
  m.i = detail::uniform_index(rng, n);
  m.j = detail::uniform_index(rng, n - 1);
  if (m.j >= m.i) ++m.j;
  m.delta = move_scale * (2.0 * detail::uniform01(rng) - 1.0);
  const double li = state.lambdas[m.i] + m.delta;
  const double lj = state.lambdas[m.j] - m.delta;
  m.auto_reject = !(li >= 0.0 && lj >= 0.0);
  return m;
}

// Change of log_weight under a pair move, O(N). Returns -inf when the move
// violates positivity or brings two eigenvalues closer than min_gap.
inline double move_delta(const GasState& state, const PairMove& m, double beta, double min_gap) {
  if (m.auto_reject) return -std::numeric_limits<double>::infinity();
  if (m.delta == 0.0) return 0.0;
  const auto& l = state.lambdas;
  const double li = l[m.i], lj = l[m.j];
  const double ni = li + m.delta, nj = lj - m.delta;
  const int n = static_cast<int>(l.size());
  if (std::abs(ni - nj) < min_gap) return -std::numeric_limits<double>::infinity();

  // Products of gap ratios, folded into a log every few factors.
  double log_ratio = std::log(std::abs(ni - nj) / std::abs(li - lj));
  double prod = 1.0;
  int pending = 0;
  for (int k = 0; k < n; ++k) {
    if (k == m.i || k == m.j) continue;
    const double lk = l[k];
    const double gi = ni - lk, gj = nj - lk;
    if (std::abs(gi) < min_gap || std::abs(gj) < min_gap) return -std::numeric_limits<double>::infinity();
    prod *= (gi / (li - lk)) * (gj / (lj - lk));
    if (++pending == 8) {
      log_ratio += std::log(std::abs(prod));
      prod = 1.0;
      pending = 0;
    }
  }
  log_ratio += std::log(std::abs(prod));
  const double nd = static_cast<double>(n);
  double d = 2.0 * log_ratio;
  if (beta != 0.0) {
    d -= beta * nd * nd *
         (detail::xlogx(ni) + detail::xlogx(nj) - detail::xlogx(li) - detail::xlogx(lj));
  }
  return d;
}

// Marchenko-Pastur CDF on [0, 4]: (2/pi)(phi + sin(2 phi)/2), phi = asin(sqrt(x)/2).
inline double mp_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 4.0) return 1.0;
  const double phi = std::asin(0.5 * std::sqrt(x));
  return 2.0 / quadrature::kPi * (phi + 0.5 * std::sin(2.0 * phi));
}

inline double mp_quantile(double p) {
  double lo = 0.0, hi = 4.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mp_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline std::vector<double> initial_lambdas(const ChainConfig& cfg) {
  const int n = cfg.n_dim;
  std::vector<double> l(n);
  switch (cfg.init) {
    case InitKind::flat:
      for (int k = 0; k < n; ++k) l[k] = (0.5 + static_cast<double>(k) / (n - 1)) / n;
      break;
    case InitKind::mp_quantiles:
      for (int k = 0; k < n; ++k) l[k] = mp_quantile((k + 0.5) / n) / n;
      break;
    case InitKind::custom:
      l = cfg.custom_init;
      break;
  }
  double total = 0.0;
  for (double x : l) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("initial state: eigenvalues must be >= 0");
    total += x;
  }
  if (!(total > 0.0)) throw std::invalid_argument("initial state: zero total");
  for (double& x : l) x /= total;
  std::vector<double> sorted = l;
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k + 1 < n; ++k) {
    if (sorted[k + 1] - sorted[k] < cfg.effective_min_gap()) {
      throw std::invalid_argument("initial state: eigenvalues closer than min_gap");
    }
  }
  return l;
}

inline GasState make_state(std::vector<double> lambdas, double beta) {
  GasState s;
  s.n_dim = static_cast<int>(lambdas.size());
  s.lambdas = std::move(lambdas);
  s.cached_log_weight = log_weight(s.lambdas, beta);
  return s;
}

inline void apply_move(GasState& state, const PairMove& m, double delta_log_weight) {
  state.lambdas[m.i] += m.delta;
  state.lambdas[m.j] -= m.delta;
  state.cached_log_weight += delta_log_weight;
}

inline constexpr long kRenormalizeEvery = 100;  // sweeps

inline ChainResult run_chain(const ChainConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_dim;
  const double min_gap = cfg.effective_min_gap();
  std::mt19937_64 rng(cfg.seed);
  GasState state = make_state(initial_lambdas(cfg), cfg.beta);

  ChainResult out;
  out.seed = cfg.seed;
  out.empirical_u_trace.reserve(cfg.steps);
  double scale = cfg.effective_move_scale();
  long accepted = 0, proposed = 0;
  long window_accepted = 0, window_proposed = 0;

  for (long sweep = 0; sweep < cfg.steps; ++sweep) {
    for (int p = 0; p < n; ++p) {
      const PairMove m = propose_pair_move(state, rng, scale);
      const double d = move_delta(state, m, cfg.beta, min_gap);
      const bool accept = d >= 0.0 || (std::isfinite(d) && detail::uniform01(rng) < std::exp(d));
      if (accept) apply_move(state, m, d);
      if (sweep >= cfg.burn_in) {
        ++proposed;
        accepted += accept;
      } else {
        ++window_proposed;
        window_accepted += accept;
      }
    }

    // Burn-in tuning toward 30-50 % acceptance.
    if (cfg.autotune && sweep < cfg.burn_in && (sweep + 1) % 10 == 0) {
      const double rate = static_cast<double>(window_accepted) / static_cast<double>(window_proposed);
      if (rate < 0.3) scale *= 0.8;
      if (rate > 0.5) scale *= 1.25;
      window_accepted = window_proposed = 0;
    }

    if ((sweep + 1) % kRenormalizeEvery == 0) {
      double total = 0.0;
      for (double x : state.lambdas) total += x;
      out.max_renormalization = std::max(out.max_renormalization, std::abs(total - 1.0));
      for (double& x : state.lambdas) x /= total;
      const double fresh = log_weight(state.lambdas, cfg.beta);
      out.max_log_weight_drift = std::max(out.max_log_weight_drift, std::abs(fresh - state.cached_log_weight));
      state.cached_log_weight = fresh;
    }

    out.empirical_u_trace.push_back(entropy_deficit(state.lambdas));
    if (sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.thinning == 0) out.samples.push_back(state.lambdas);
  }

  out.move_scale = scale;
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(std::max(1L, proposed));
  if (out.acceptance_rate < kAcceptanceLow || out.acceptance_rate > kAcceptanceHigh) {
    out.warnings.push_back("acceptance rate " + std::to_string(out.acceptance_rate) +
                           " outside [0.05, 0.95]; move_scale is mistuned");
  }
  return out;
}

// Independent chains with seeds seed, seed + 1, ... run concurrently and
// pooled in seed order.
inline ChainResult run_chains(const ChainConfig& cfg, int chains) {
  if (chains < 1) throw std::invalid_argument("run_chains: chains must be >= 1");
  if (chains == 1) return run_chain(cfg);
  std::vector<std::future<ChainResult>> jobs;
  for (int c = 0; c < chains; ++c) {
    ChainConfig local = cfg;
    local.seed = cfg.seed + static_cast<std::uint64_t>(c);
    jobs.push_back(std::async(std::launch::async, [local] { return run_chain(local); }));
  }
  ChainResult merged;
  merged.seed = cfg.seed;
  double acc = 0.0;
  for (auto& j : jobs) {
    ChainResult r = j.get();
    merged.samples.insert(merged.samples.end(), r.samples.begin(), r.samples.end());
    merged.empirical_u_trace.insert(merged.empirical_u_trace.end(), r.empirical_u_trace.begin(),
                                    r.empirical_u_trace.end());
    merged.warnings.insert(merged.warnings.end(), r.warnings.begin(), r.warnings.end());
    merged.max_log_weight_drift = std::max(merged.max_log_weight_drift, r.max_log_weight_drift);
    merged.max_renormalization = std::max(merged.max_renormalization, r.max_renormalization);
    merged.move_scale = r.move_scale;
    acc += r.acceptance_rate;
  }
  merged.acceptance_rate = acc / chains;
  return merged;
}

// Pooled normalized histogram of N lambda_k over the stored samples.
inline Histogram empirical_spectrum(const ChainResult& result, double lo, double hi, int bins = kDefaultBins) {
  if (result.samples.empty()) throw std::invalid_argument("empirical_spectrum: no samples");
  const double n = static_cast<double>(result.samples.front().size());
  return rescaled_histogram(result.samples, lo, hi, bins, n);
}

inline SampleSummary summarize(const ChainResult& result) {
  SampleSummary s = summarize(result.samples);
  s.acceptance_rate = result.acceptance_rate;
  return s;
}

}  // namespace isospectra
