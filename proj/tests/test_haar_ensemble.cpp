#include <gtest/gtest.h>

#include <cmath>

#include "isospectra/empirics.hpp"
#include "isospectra/haar_ensemble.hpp"

using namespace isospectra;

namespace {

// det(x I - H) by Gaussian elimination with partial pivoting; real for
// Hermitian H.
double char_poly(const ComplexMatrix& h, double x) {
  const int n = h.n;
  std::vector<Complex> m(h.entries);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m[i * n + j] = (i == j ? x : 0.0) - h(i, j);
  }
  Complex det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(m[r * n + c]) > std::abs(m[piv * n + c])) piv = r;
    }
    if (m[piv * n + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(m[c * n + j], m[piv * n + j]);
      det = -det;
    }
    det *= m[c * n + c];
    for (int r = c + 1; r < n; ++r) {
      const Complex f = m[r * n + c] / m[c * n + c];
      for (int j = c; j < n; ++j) m[r * n + j] -= f * m[c * n + j];
    }
  }
  return det.real();
}

// Roots of the characteristic polynomial by scanning for sign changes and
// bisecting each bracket.
std::vector<double> oracle_eigenvalues(const ComplexMatrix& h) {
  double bound = 0.0;
  for (const auto& z : h.entries) bound += std::norm(z);
  bound = std::sqrt(bound) + 1.0;
  const int grid = 20000;
  std::vector<double> roots;
  double x0 = -bound, p0 = char_poly(h, x0);
  for (int i = 1; i <= grid; ++i) {
    const double x1 = -bound + 2.0 * bound * i / grid;
    const double p1 = char_poly(h, x1);
    if ((p0 < 0) != (p1 < 0)) {
      double lo = x0, hi = x1, plo = p0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double pm = char_poly(h, mid);
        if ((pm < 0) == (plo < 0)) {
          lo = mid;
          plo = pm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    p0 = p1;
  }
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return roots;
}

ComplexMatrix random_hermitian(int n, std::mt19937_64& rng) {
  const ComplexMatrix g = sample_gaussian_matrix(n, rng);
  ComplexMatrix h(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) h(i, j) = 0.5 * (g(i, j) + std::conj(g(j, i)));
  }
  return h;
}

}  // namespace

TEST(Eigen, Identity) {
  ComplexMatrix h(4);
  for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
  for (double e : hermitian_eigenvalues(h)) EXPECT_NEAR(e, 1.0, 1e-15);
}

TEST(Eigen, TwoByTwoByHand) {
  ComplexMatrix h(2);
  h(0, 0) = 2.0;
  h(1, 1) = 2.0;
  h(0, 1) = Complex(0, 1);
  h(1, 0) = Complex(0, -1);
  const auto e = hermitian_eigenvalues(h);
  EXPECT_NEAR(e[0], 3.0, 1e-14);
  EXPECT_NEAR(e[1], 1.0, 1e-14);
}

TEST(Eigen, MatchesCharacteristicPolynomialOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix h = random_hermitian(6, rng);
    const auto e = hermitian_eigenvalues(h);
    const auto o = oracle_eigenvalues(h);
    ASSERT_EQ(o.size(), 6u);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(e[i], o[i], 1e-8);
  }
}

TEST(Eigen, TraceAndFrobeniusInvariants) {
  std::mt19937_64 rng(5);
  for (int n : {3, 17, 64}) {
    const ComplexMatrix h = random_hermitian(n, rng);
    const auto e = hermitian_eigenvalues(h);
    double tr = 0.0, fr = 0.0, s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) tr += h(i, i).real();
    for (const auto& z : h.entries) fr += std::norm(z);
    for (double x : e) {
      s += x;
      s2 += x * x;
    }
    EXPECT_NEAR(s, tr, 1e-9 * std::sqrt(fr));
    EXPECT_NEAR(s2, fr, 1e-9 * fr);
    EXPECT_TRUE(std::is_sorted(e.begin(), e.end(), std::greater<>()));
  }
}

TEST(Eigen, DiagonalAndAlreadyTridiagonal) {
  ComplexMatrix h(3);
  h(0, 0) = -1.0;
  h(1, 1) = 5.0;
  h(2, 2) = 2.0;
  const auto e = hermitian_eigenvalues(h);
  EXPECT_EQ(e, (std::vector<double>{5.0, 2.0, -1.0}));
}

TEST(Eigen, RejectsNonHermitian) {
  ComplexMatrix h(2);
  h(0, 1) = 1.0;
  EXPECT_THROW(hermitian_eigenvalues(h), std::invalid_argument);
  ComplexMatrix c(2);
  c(0, 0) = Complex(1.0, 0.5);
  EXPECT_THROW(hermitian_eigenvalues(c), std::invalid_argument);
  ComplexMatrix nan(2);
  nan(0, 0) = std::nan("");
  EXPECT_THROW(hermitian_eigenvalues(nan), std::invalid_argument);
}

TEST(Eigen, ReportsNonConvergence) {
  std::mt19937_64 rng(3);
  EXPECT_THROW(hermitian_eigenvalues(random_hermitian(8, rng), 1e-12, 0), ConvergenceError);
}

TEST(Gaussian, EntryMoments) {
  std::mt19937_64 rng(21);
  const int draws = 2000;
  Complex sum = 0.0;
  double second = 0.0;
  long count = 0;
  for (int d = 0; d < draws; ++d) {
    const ComplexMatrix g = sample_gaussian_matrix(7, rng);
    for (const auto& z : g.entries) {
      sum += z;
      second += std::norm(z);
      ++count;
    }
  }
  const double n = static_cast<double>(count);
  // Re and Im have variance 1/2; |z|^2 is Exp(1) with variance 1.
  EXPECT_LT(std::abs(sum.real() / n), 4.0 * std::sqrt(0.5 / n));
  EXPECT_LT(std::abs(sum.imag() / n), 4.0 * std::sqrt(0.5 / n));
  EXPECT_LT(std::abs(second / n - 1.0), 3.0 / std::sqrt(n) * 1.5);
}

TEST(Gaussian, Deterministic) {
  std::mt19937_64 a(9), b(9);
  EXPECT_EQ(sample_gaussian_matrix(5, a).entries, sample_gaussian_matrix(5, b).entries);
}

TEST(Schmidt, SimplexInvariants) {
  std::mt19937_64 rng(4);
  EXPECT_EQ(sample_haar_spectrum(1, rng), (SchmidtSpectrum{1.0}));
  for (int n : {2, 5, 40}) {
    const auto l = sample_haar_spectrum(n, rng);
    double s = 0.0;
    for (double x : l) {
      EXPECT_GE(x, 0.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_TRUE(std::is_sorted(l.begin(), l.end(), std::greater<>()));
  }
}

TEST(Schmidt, PageMeanAtSmallN) {
  // Exact finite-N Page value at N = 4: sum_{k=5}^{16} 1/k - 3/8.
  std::mt19937_64 rng(8);
  double exact = -3.0 / 8.0;
  for (int k = 5; k <= 16; ++k) exact += 1.0 / k;
  std::vector<double> s;
  for (int d = 0; d < 20000; ++d) s.push_back(vn_entropy(sample_haar_spectrum(4, rng)));
  EXPECT_NEAR(mean(s), exact, 4.0 * standard_deviation(s) / std::sqrt(20000.0));
}

TEST(Evaporated, AtomAndMass) {
  std::mt19937_64 rng(6);
  const auto l = sample_evaporated(1.0, 50, rng);
  ASSERT_EQ(l.size(), 50u);
  EXPECT_EQ(l[0], 1.0 / std::log(50.0));
  double s = 0.0;
  for (double x : l) s += x;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_TRUE(std::is_sorted(l.begin(), l.end(), std::greater<>()));
}

TEST(Evaporated, SeparableLimit) {
  std::mt19937_64 rng(6);
  const auto l = sample_evaporated(std::log(10.0), 10, rng);
  EXPECT_NEAR(l[0], 1.0, 1e-15);
  for (std::size_t k = 1; k < l.size(); ++k) EXPECT_NEAR(l[k], 0.0, 1e-15);
}

TEST(Evaporated, RejectsOutOfRange) {
  std::mt19937_64 rng(6);
  EXPECT_THROW(sample_evaporated(0.5, 50, rng), std::domain_error);
  EXPECT_THROW(sample_evaporated(4.0, 50, rng), std::domain_error);
  EXPECT_THROW(sample_evaporated(0.6, 1, rng), std::domain_error);
}
