#pragma once

// Haar-random bipartite pure states through complex Gaussian matrices, with
// a small self-contained Hermitian eigensolver (complex Householder
// reduction to real tridiagonal form, then implicit-shift QL).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "isospectra/errors.hpp"

namespace isospectra {

using Complex = std::complex<double>;

// Dense square matrix, row-major.
struct ComplexMatrix {
  int n = 0;
  std::vector<Complex> entries;

  ComplexMatrix() = default;
  explicit ComplexMatrix(int dim) : n(dim), entries(static_cast<std::size_t>(dim) * dim) {
    if (dim < 0) throw std::invalid_argument("ComplexMatrix: negative dimension");
  }

  Complex& operator()(int r, int c) { return entries[static_cast<std::size_t>(r) * n + c]; }
  const Complex& operator()(int r, int c) const { return entries[static_cast<std::size_t>(r) * n + c]; }
};

// Schmidt coefficients, descending, summing to one.
using SchmidtSpectrum = std::vector<double>;

// Entries with independent real and imaginary parts of variance 1/2, so
// that E|G_jk|^2 = 1.
inline ComplexMatrix sample_gaussian_matrix(int n_dim, std::mt19937_64& rng) {
  if (n_dim < 1) throw std::domain_error("sample_gaussian_matrix: n_dim must be >= 1");
  ComplexMatrix g(n_dim);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  for (auto& z : g.entries) {
    const double re = normal(rng);
    const double im = normal(rng);
    z = {re, im};
  }
  return g;
}

// G G^dagger
inline ComplexMatrix gram(const ComplexMatrix& g) {
  const int n = g.n;
  ComplexMatrix w(n);
  for (int r = 0; r < n; ++r) {
    for (int c = r; c < n; ++c) {
      Complex acc = 0.0;
      for (int k = 0; k < n; ++k) acc += g(r, k) * std::conj(g(c, k));
      w(r, c) = acc;
      w(c, r) = std::conj(acc);
    }
  }
  for (int r = 0; r < n; ++r) w(r, r) = w(r, r).real();
  return w;
}

namespace detail {

inline void check_hermitian(const ComplexMatrix& h, double tolerance) {
  double scale = 0.0;
  for (const auto& z : h.entries) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument("hermitian_eigenvalues: non-finite entry");
    }
    scale = std::max(scale, std::abs(z));
  }
  const double bound = tolerance * std::max(1.0, scale);
  for (int r = 0; r < h.n; ++r) {
    for (int c = r; c < h.n; ++c) {
      if (std::abs(h(r, c) - std::conj(h(c, r))) > bound) {
        throw std::invalid_argument("hermitian_eigenvalues: matrix is not Hermitian at (" + std::to_string(r) +
                                    ", " + std::to_string(c) + ")");
      }
    }
  }
}

// Unitary similarity to real symmetric tridiagonal form. Writes the
// diagonal to d and the subdiagonal to e (e[i] couples i and i + 1).
// Phases of the complex subdiagonal are dropped: a diagonal unitary maps
// them onto their moduli without changing the spectrum.
inline void householder_tridiagonal(ComplexMatrix a, std::vector<double>& d, std::vector<double>& e) {
  const int n = a.n;
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  std::vector<Complex> v(n), p(n), w(n);
  for (int k = 0; k + 2 < n; ++k) {
    const int m = n - k - 1;  // length of the reflected block
    double norm = 0.0;
    for (int i = 0; i < m; ++i) norm = std::hypot(norm, std::abs(a(k + 1 + i, k)));
    if (norm == 0.0) continue;
    const Complex x0 = a(k + 1, k);
    const Complex phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex(1.0);
    const Complex alpha = -phase * norm;

    for (int i = 0; i < m; ++i) v[i] = a(k + 1 + i, k);
    v[0] -= alpha;
    double vnorm = 0.0;
    for (int i = 0; i < m; ++i) vnorm = std::hypot(vnorm, std::abs(v[i]));
    if (vnorm == 0.0) continue;
    for (int i = 0; i < m; ++i) v[i] /= vnorm;

    // H A H = A - v w^dagger - w v^dagger with p = A v, w = 2p - 2(v^dagger p) v
    for (int i = 0; i < m; ++i) {
      Complex acc = 0.0;
      for (int j = 0; j < m; ++j) acc += a(k + 1 + i, k + 1 + j) * v[j];
      p[i] = acc;
    }
    Complex vp = 0.0;
    for (int i = 0; i < m; ++i) vp += std::conj(v[i]) * p[i];
    for (int i = 0; i < m; ++i) w[i] = 2.0 * p[i] - 2.0 * vp.real() * v[i];
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        a(k + 1 + i, k + 1 + j) -= v[i] * std::conj(w[j]) + w[i] * std::conj(v[j]);
      }
    }
    a(k + 1, k) = alpha;
    a(k, k + 1) = std::conj(alpha);
    for (int i = 1; i < m; ++i) a(k + 1 + i, k) = a(k, k + 1 + i) = 0.0;
  }
  for (int i = 0; i < n; ++i) d[i] = a(i, i).real();
  for (int i = 0; i + 1 < n; ++i) e[i] = std::abs(a(i + 1, i));
}

// Implicit-shift QL on a real symmetric tridiagonal matrix, eigenvalues only.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, int max_iterations) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return;
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (iter++ == max_iterations) {
          throw ConvergenceError("hermitian_eigenvalues: QL iteration did not converge");
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = m - 1;
        bool underflow = false;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace detail

// All eigenvalues of a Hermitian matrix, descending.
inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h, double hermitian_tolerance = 1e-12,
                                                 int max_iterations = 60) {
  detail::check_hermitian(h, hermitian_tolerance);
  std::vector<double> d, e;
  detail::householder_tridiagonal(h, d, e);
  detail::tridiagonal_ql(d, e, max_iterations);
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

// Eigenvalues of G G^dagger / tr(G G^dagger); round-off negatives clamped to 0.
inline SchmidtSpectrum schmidt_spectrum(const ComplexMatrix& g) {
  if (g.n == 1) return {1.0};
  ComplexMatrix w = gram(g);
  double trace = 0.0;
  for (int i = 0; i < w.n; ++i) trace += w(i, i).real();
  if (!(trace > 0.0)) throw std::domain_error("schmidt_spectrum: zero matrix");
  for (auto& z : w.entries) z /= trace;
  SchmidtSpectrum lambdas = hermitian_eigenvalues(w);
  double total = 0.0;
  for (double& l : lambdas) {
    l = std::max(l, 0.0);
    total += l;
  }
  for (double& l : lambdas) l /= total;
  return lambdas;
}

inline SchmidtSpectrum sample_haar_spectrum(int n_dim, std::mt19937_64& rng) {
  return schmidt_spectrum(sample_gaussian_matrix(n_dim, rng));
}

// Evaporated phase at 1/2 < u <= ln N: lambda_1 = mu = u / ln N on top of
// an (N - 1)-dimensional Haar spectrum carrying the remaining 1 - mu.
inline SchmidtSpectrum sample_evaporated(double u, int n_dim, std::mt19937_64& rng) {
  if (n_dim < 2) throw std::domain_error("sample_evaporated: n_dim must be >= 2");
  const double log_n = std::log(static_cast<double>(n_dim));
  if (!(u > 0.5 && u <= log_n)) {
    throw std::domain_error("sample_evaporated: u must satisfy 1/2 < u <= ln(n_dim), got " + std::to_string(u));
  }
  const double mu = u / log_n;
  SchmidtSpectrum sea = sample_haar_spectrum(n_dim - 1, rng);
  SchmidtSpectrum out;
  out.reserve(n_dim);
  out.push_back(mu);
  for (double l : sea) out.push_back((1.0 - mu) * l);
  if (out[1] > out[0]) {
    throw std::domain_error("sample_evaporated: atom mu = " + std::to_string(mu) +
                            " is not the largest eigenvalue; N too small for this u");
  }
  return out;
}

}  // namespace isospectra
