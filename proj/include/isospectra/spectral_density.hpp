#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace isospectra {

// Edges [a, b] of the continuous part of a spectrum, in the rescaled
// variable lambda = N * lambda_k.
struct SupportInterval {
  double a = 0.0;
  double b = 0.0;

  double width() const { return b - a; }
  double center() const { return 0.5 * (a + b); }
  bool contains(double lambda) const { return lambda >= a && lambda <= b; }
};

// A single detached eigenvalue. `position` is the raw Schmidt coefficient mu
// and `weight` its share of the eigenvalue count (1/N).
struct Atom {
  double position = 0.0;
  double weight = 0.0;
};

// Which variable the continuous density is expressed in.
enum class DensityVariable {
  rescaled,      // lambda = N * lambda_k
  sea_rescaled,  // lambda = (N - 1) * lambda_k / (1 - mu), evaporated phase
};

// Continuous eigenvalue density on a compact support, optionally with one
// atom. The density integrates to one over the support in its own variable.
class SpectralDensity {
 public:
  using Evaluator = std::function<double(double)>;

  SpectralDensity(SupportInterval support, Evaluator density, bool singular_lower_edge = false,
                  DensityVariable variable = DensityVariable::rescaled,
                  std::optional<Atom> atom = std::nullopt)
      : support_(support),
        density_(std::move(density)),
        singular_lower_edge_(singular_lower_edge),
        variable_(variable),
        atom_(atom) {
    if (!(support_.a >= 0.0 && support_.b > support_.a)) {
      throw std::invalid_argument("SpectralDensity: support must satisfy 0 <= a < b");
    }
  }

  const SupportInterval& support() const { return support_; }
  const std::optional<Atom>& atom() const { return atom_; }
  DensityVariable variable() const { return variable_; }

  // True when sigma ~ lambda^{-1/2} at the lower edge (gapless phase).
  bool singular_lower_edge() const { return singular_lower_edge_; }

  // sigma(lambda); zero outside the support and exactly zero at a regular edge.
  // Throws std::domain_error at a divergent edge instead of returning infinity.
  double operator()(double lambda) const {
    if (!std::isfinite(lambda)) throw std::domain_error("SpectralDensity: non-finite argument");
    if (lambda < support_.a || lambda > support_.b) return 0.0;
    if (lambda == support_.a) {
      if (singular_lower_edge_) {
        throw std::domain_error("SpectralDensity: density diverges at the lower edge lambda = " +
                                std::to_string(support_.a));
      }
      return 0.0;
    }
    if (lambda == support_.b) return 0.0;
    return density_(lambda);
  }

 private:
  SupportInterval support_;
  Evaluator density_;
  bool singular_lower_edge_ = false;
  DensityVariable variable_ = DensityVariable::rescaled;
  std::optional<Atom> atom_;
};

}  // namespace isospectra
