#include "chemoflow/model.hpp"

#include <numbers>

namespace chemoflow {

void ModelParams::validate() const {
  if (n < 1) throw ValidationError("model.n: must be >= 1");
  if (!(R > 0.0) || !std::isfinite(R)) throw ValidationError("model.R: must be a positive finite radius");
  if (!std::isfinite(p)) throw ValidationError("model.p: must be finite");
  if (!std::isfinite(q)) throw ValidationError("model.q: must be finite");
  if (!(kD > 0.0) || !std::isfinite(kD)) throw ValidationError("model.kD: must be positive");
  if (!(kS > 0.0) || !std::isfinite(kS)) throw ValidationError("model.kS: must be positive");
}

StructuralConstants structural_constants(const ModelParams& params) {
  // (1+s)^p <= 2^|p| s^p and s(1+s)^(q-1) >= 2^-|q-1| s^q for s >= 1.
  return {params.kD * std::pow(2.0, std::abs(params.p)),
          params.kS / std::pow(2.0, std::abs(params.q - 1.0)), params.kD, params.kS};
}

SensitivityFamily::SensitivityFamily(double kD, double p, double kS, double q)
    : kD_(kD), p_(p), kS_(kS), q_(q) {
  if (!(kD > 0.0) || !std::isfinite(kD)) throw ValidationError("sensitivity family: kD must be positive");
  if (!(kS >= 0.0) || !std::isfinite(kS)) throw ValidationError("sensitivity family: kS must be nonnegative");
  if (!std::isfinite(p) || !std::isfinite(q)) throw ValidationError("sensitivity family: exponents must be finite");
}

namespace {
void check_density(double s) {
  if (!std::isfinite(s) || s < 0.0) throw DomainError("density argument must be finite and >= 0");
}
}  // namespace

double SensitivityFamily::eval_D(double s) const {
  check_density(s);
  return D(s);
}

double SensitivityFamily::eval_S(double s) const {
  check_density(s);
  return S(s);
}

double SensitivityFamily::D_integral(double s) const {
  if (p_ == 0.0) return kD_ * s;
  if (p_ == -1.0) return kD_ * std::log1p(s);
  return kD_ * std::expm1((p_ + 1.0) * std::log1p(s)) / (p_ + 1.0);
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::GB: return "GB";
    case Regime::GE: return "GE";
    case Regime::FTBU: return "FTBU";
    case Regime::UNCLASSIFIED: return "UNCLASSIFIED";
  }
  return "UNCLASSIFIED";
}

RegimeVerdict classify_regime(int n, double p, double q) {
  if (n < 3) throw ValidationError("classify_regime: regimes are defined for n >= 3 only");
  const double half_n = 0.5 * n;
  RegimeVerdict verdict{Regime::UNCLASSIFIED, (2.0 - half_n) - (q - p), (1.0 - half_n) - q};
  if (verdict.boundedness_margin > 0.0) {
    verdict.tag = Regime::GB;
  } else if (verdict.existence_margin > 0.0) {
    verdict.tag = Regime::GE;
  } else if (verdict.boundedness_margin < 0.0 && verdict.existence_margin < 0.0) {
    verdict.tag = Regime::FTBU;
  }
  return verdict;
}

double unit_sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace chemoflow
