#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "chemoflow/errors.hpp"

namespace chemoflow {

/// Parameters of the two-species system on the ball B_R(0) in R^n.
///
/// The sensitivity functions are the canonical family
///   D(s) = kD (1+s)^p,   S(s) = kS s (1+s)^(q-1),
/// so (kD, kS) are the family coefficients. The constants entering the
/// structural hypotheses are derived from them, see structural_constants().
struct ModelParams {
  int n = 3;
  double R = 1.0;
  double p = 0.0;
  double q = 1.0;
  double kD = 1.0;
  double kS = 1.0;

  /// Throws ValidationError unless n >= 1, R > 0, kD > 0, kS > 0 and p, q finite.
  void validate() const;
};

/// Constants for which the canonical family satisfies
///   D(s) <= kD s^p, S(s) >= kS s^q   (s >= 1, blow-up side)
///   D(s) >= KD (1+s)^p, S(s) <= KS (1+s)^q   (s >= 0, boundedness side).
struct StructuralConstants {
  double kD;
  double kS;
  double KD;
  double KS;
};

StructuralConstants structural_constants(const ModelParams& params);

/// Canonical diffusivity/sensitivity pair. Templated evaluation lets the
/// subsolution engine run in extended precision.
class SensitivityFamily {
 public:
  /// kS = 0 is accepted here (passive transport, used for pure-diffusion runs);
  /// ModelParams::validate() is the gate for regime work.
  SensitivityFamily(double kD, double p, double kS, double q);
  explicit SensitivityFamily(const ModelParams& params)
      : SensitivityFamily(params.kD, params.p, params.kS, params.q) {}

  /// D(s) = kD (1+s)^p. Throws DomainError for s < 0 or non-finite s.
  double eval_D(double s) const;
  /// S(s) = kS s (1+s)^(q-1). Throws DomainError for s < 0 or non-finite s.
  double eval_S(double s) const;

  // Unchecked evaluation for hot loops and extended precision.
  template <class T>
  T D(T s) const {
    if (p_ == 0.0) return T(kD_);
    return T(kD_) * std::pow(T(1) + s, T(p_));
  }
  template <class T>
  T S(T s) const {
    if (q_ == 1.0) return T(kS_) * s;
    return T(kS_) * s * std::pow(T(1) + s, T(q_) - T(1));
  }
  /// S(s)/s, finite at s = 0.
  template <class T>
  T S_over_s(T s) const {
    if (q_ == 1.0) return T(kS_);
    return T(kS_) * std::pow(T(1) + s, T(q_) - T(1));
  }
  /// dS/ds.
  template <class T>
  T S_prime(T s) const {
    if (q_ == 1.0) return T(kS_);
    return T(kS_) * std::pow(T(1) + s, T(q_) - T(2)) * (T(1) + T(q_) * s);
  }
  /// Antiderivative of D with value 0 at s = 0.
  double D_integral(double s) const;

  double kD() const { return kD_; }
  double kS() const { return kS_; }
  double p() const { return p_; }
  double q() const { return q_; }

  /// Family used for the second species: D = 1, S(s) = s.
  static SensitivityFamily linear() { return {1.0, 0.0, 1.0, 1.0}; }

 private:
  double kD_;
  double p_;
  double kS_;
  double q_;
};

enum class Regime { GB, GE, FTBU, UNCLASSIFIED };

std::string_view to_string(Regime regime);

struct RegimeVerdict {
  Regime tag;
  /// (2 - n/2) - (q - p): positive strictly inside the boundedness region.
  double boundedness_margin;
  /// (1 - n/2) - q: positive strictly inside the global-existence region.
  double existence_margin;
};

/// Places (p, q) relative to the two critical lines q - p = 2 - n/2 and
/// q = 1 - n/2. GB wins over GE when both apply. Throws ValidationError for n < 3.
RegimeVerdict classify_regime(int n, double p, double q);

/// Surface area of the unit sphere in R^n.
double unit_sphere_area(int n);

}  // namespace chemoflow
