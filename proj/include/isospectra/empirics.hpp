#pragma once

// Sample statistics: entropies, empirical entropy-of-entropy, histograms of
// rescaled spectra and their distance to analytic densities.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "isospectra/quadrature.hpp"
#include "isospectra/spectral_density.hpp"

namespace isospectra {

// -sum lambda ln lambda with 0 ln 0 = 0.
inline double vn_entropy(const std::vector<double>& lambdas) {
  double s = 0.0;
  for (double l : lambdas) {
    if (l > 0.0) s -= l * std::log(l);
  }
  return s;
}

inline double entropy_deficit(const std::vector<double>& lambdas) {
  return std::log(static_cast<double>(lambdas.size())) - vn_entropy(lambdas);
}

// (2/N^2) sum_{j<k} ln |N lambda_j - N lambda_k|; -inf on a coincidence.
inline double empirical_s(const std::vector<double>& lambdas) {
  const std::size_t n = lambdas.size();
  if (n == 0) throw std::invalid_argument("empirical_s: empty spectrum");
  const double nd = static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const double gap = std::abs(nd * lambdas[j] - nd * lambdas[k]);
      if (gap == 0.0) return -std::numeric_limits<double>::infinity();
      acc += std::log(gap);
    }
  }
  return 2.0 * acc / (nd * nd);
}

// Equal-width bins on [edges.front(), edges.back()). Mass falling outside
// the range is tracked separately so that distances stay honest.
struct Histogram {
  std::vector<double> edges;
  std::vector<double> masses;
  double total_mass = 0.0;  // sum of in-range masses
  double outside = 0.0;

  static Histogram uniform(double lo, double hi, int bins) {
    if (bins < 1 || !(hi > lo)) throw std::invalid_argument("Histogram: need bins >= 1 and hi > lo");
    Histogram h;
    h.edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * i / bins;
    h.masses.assign(bins, 0.0);
    return h;
  }

  int bins() const { return static_cast<int>(masses.size()); }
  double lo() const { return edges.front(); }
  double hi() const { return edges.back(); }
  double width(int i) const { return edges[i + 1] - edges[i]; }
  double center(int i) const { return 0.5 * (edges[i] + edges[i + 1]); }

  void add(double value, double weight = 1.0) {
    if (!(value >= lo() && value < hi())) {
      outside += weight;
      return;
    }
    int i = static_cast<int>((value - lo()) / (hi() - lo()) * bins());
    i = std::clamp(i, 0, bins() - 1);
    masses[i] += weight;
    total_mass += weight;
  }

  // Scaled so that in-range plus outside mass is one.
  Histogram normalized() const {
    Histogram h = *this;
    const double all = total_mass + outside;
    if (!(all > 0.0)) throw std::domain_error("Histogram: cannot normalize an empty histogram");
    for (double& m : h.masses) m /= all;
    h.total_mass = total_mass / all;
    h.outside = outside / all;
    return h;
  }
};

// Pooled histogram of scale * lambda_k over all samples, normalized.
inline Histogram rescaled_histogram(const std::vector<std::vector<double>>& samples, double lo, double hi, int bins,
                                    double scale) {
  if (samples.empty()) throw std::invalid_argument("rescaled_histogram: no samples");
  Histogram h = Histogram::uniform(lo, hi, bins);
  for (const auto& s : samples) {
    for (double l : s) h.add(scale * l);
  }
  return h.normalized();
}

// Default binning: 40 bins over [0, 1.05 b].
inline constexpr int kDefaultBins = 40;
inline constexpr double kRangeExtension = 1.05;

inline Histogram spectrum_histogram(const std::vector<std::vector<double>>& samples, const SupportInterval& support,
                                    int bins = kDefaultBins) {
  const double n = static_cast<double>(samples.at(0).size());
  return rescaled_histogram(samples, 0.0, kRangeExtension * support.b, bins, n);
}

// Sea of an evaporated draw in the variable (N - 1) lambda / (1 - mu); the
// first entry is the atom.
inline Histogram sea_histogram(const std::vector<std::vector<double>>& samples, double mu, const SupportInterval& support,
                               int bins = kDefaultBins) {
  if (samples.empty()) throw std::invalid_argument("sea_histogram: no samples");
  Histogram h = Histogram::uniform(0.0, kRangeExtension * support.b, bins);
  for (const auto& s : samples) {
    const double scale = static_cast<double>(s.size() - 1) / (1.0 - mu);
    for (std::size_t k = 1; k < s.size(); ++k) h.add(scale * s[k]);
  }
  return h.normalized();
}

// The continuous part of a density integrated over the histogram's bins.
inline Histogram binned_density(const Histogram& like, const SpectralDensity& density) {
  Histogram h = like;
  h.total_mass = 0.0;
  for (int i = 0; i < h.bins(); ++i) {
    h.masses[i] = quadrature::density_mass(density, h.edges[i], h.edges[i + 1]);
    h.total_mass += h.masses[i];
  }
  h.outside = std::max(0.0, 1.0 - h.total_mass);
  return h;
}

inline double l1_distance(const Histogram& a, const Histogram& b) {
  if (a.edges != b.edges) throw std::invalid_argument("l1_distance: histograms have different bins");
  double d = std::abs(a.outside - b.outside);
  for (int i = 0; i < a.bins(); ++i) d += std::abs(a.masses[i] - b.masses[i]);
  return d;
}

inline double l1_distance(const Histogram& hist, const SpectralDensity& density) {
  return l1_distance(hist, binned_density(hist, density));
}

// Kolmogorov-Smirnov statistic evaluated on the bin edges.
inline double ks_distance(const Histogram& a, const Histogram& b) {
  if (a.edges != b.edges) throw std::invalid_argument("ks_distance: histograms have different bins");
  double ca = 0.0, cb = 0.0, d = 0.0;
  for (int i = 0; i < a.bins(); ++i) {
    ca += a.masses[i];
    cb += b.masses[i];
    d = std::max(d, std::abs(ca - cb));
  }
  return d;
}

inline double ks_distance(const Histogram& hist, const SpectralDensity& density) {
  return ks_distance(hist, binned_density(hist, density));
}

// Monte Carlo noise of a pooled histogram: half the L1 distance between the
// histograms of the first and second halves of the sample list.
inline double split_half_noise(const std::vector<std::vector<double>>& samples, const Histogram& like, double scale) {
  if (samples.size() < 2) throw std::invalid_argument("split_half_noise: need at least two samples");
  const std::size_t half = samples.size() / 2;
  const std::vector<std::vector<double>> first(samples.begin(), samples.begin() + half);
  const std::vector<std::vector<double>> second(samples.begin() + half, samples.end());
  const Histogram a = rescaled_histogram(first, like.lo(), like.hi(), like.bins(), scale);
  const Histogram b = rescaled_histogram(second, like.lo(), like.hi(), like.bins(), scale);
  return 0.5 * l1_distance(a, b);
}

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty series");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double standard_deviation(const std::vector<double>& xs) {
  const double m = mean(xs);
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

// Standard error of the mean from non-overlapping batch means; tolerates
// autocorrelated series. Falls back to the naive estimate for short series.
inline double batch_means_error(const std::vector<double>& xs, int batches = 20) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  if (n < static_cast<std::size_t>(2 * batches)) return standard_deviation(xs) / std::sqrt(static_cast<double>(n));
  const std::size_t len = n / batches;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    means.push_back(mean(std::vector<double>(xs.begin() + b * len, xs.begin() + (b + 1) * len)));
  }
  return standard_deviation(means) / std::sqrt(static_cast<double>(batches));
}

struct SampleSummary {
  std::size_t count = 0;
  double mean_u = 0.0;
  double std_u = 0.0;
  double se_u = 0.0;
  double mean_s = 0.0;
  double std_s = 0.0;
  double se_s = 0.0;
  double mean_entropy = 0.0;
  double acceptance_rate = std::numeric_limits<double>::quiet_NaN();  // chains only
};

inline SampleSummary summarize(const std::vector<std::vector<double>>& samples) {
  if (samples.empty()) throw std::invalid_argument("summarize: no samples");
  std::vector<double> us, ss;
  us.reserve(samples.size());
  ss.reserve(samples.size());
  for (const auto& s : samples) {
    us.push_back(entropy_deficit(s));
    ss.push_back(empirical_s(s));
  }
  SampleSummary out;
  out.count = samples.size();
  out.mean_u = mean(us);
  out.std_u = standard_deviation(us);
  out.se_u = batch_means_error(us);
  out.mean_s = mean(ss);
  out.std_s = standard_deviation(ss);
  out.se_s = batch_means_error(ss);
  out.mean_entropy = std::log(static_cast<double>(samples.front().size())) - out.mean_u;
  return out;
}

}  // namespace isospectra
