#pragma once

#include <functional>
#include <vector>

#include "chemoflow/model.hpp"
#include "chemoflow/state.hpp"

namespace chemoflow {

/// G(s) = int_{s1}^{s} int_{s1}^{sigma} h(tau) dtau dsigma
///      = int_{s1}^{s} (s - tau) h(tau) dtau,
/// by adaptive Gauss-Kronrod quadrature in log(tau). Valid on both sides of s1.
double G_integral(const std::function<double(double)>& h, double s, double s1);

/// G for the ratio h = D/S of a canonical family. Uses the binomial closed form
/// when p - q + 1 is a nonnegative integer, otherwise s H0(s) - H1(s) with H1
/// in closed form and H0 from a table of Gauss-Kronrod panels in log(tau).
/// Throws DomainError for s <= 0 or s1 <= 0.
double G_eval(double s, double s1, const SensitivityFamily& sens);

/// Callable G with the family and anchor bound once.
class GFunction {
 public:
  GFunction(const SensitivityFamily& sens, double s1);
  double operator()(double s) const;
  bool closed_form() const { return closed_form_; }
  double anchor() const { return s1_; }

 private:
  SensitivityFamily sens_;
  double s1_;
  bool closed_form_;
  double H0(double s) const;
  static constexpr double kStep = 0.0625;

  int m_ = 0;
  std::vector<double> binom_;
  double m_real_ = 0.0;
  double x_lo_ = 0.0;
  std::vector<double> h0_;
};

struct LyapunovSample {
  double t = 0.0;
  double F = 0.0;
  double F_G = 0.0;   ///< int G(u)
  double F_w = 0.0;   ///< int w ln w
  double F_vz = 0.0;  ///< int grad v . grad z (enters F with a minus sign)
  double D_diss = 0.0;
};

/// Floor applied to w before taking the logarithm.
inline constexpr double kLogFloor = 1e-30;

/// F = int G(u) + int w ln w - int grad v . grad z and its dissipation
/// int (D u_r - S v_r)^2 / S + int (w_r - w z_r)^2 / w, by radial quadrature.
/// Face quantities use center averages and the solver's exact face gradients.
LyapunovSample lyapunov_sample(const RadialState& state, const SensitivityFamily& sens, const GFunction& G);

struct NormRow {
  double k = 0.0;
  double u_integral = 0.0;  ///< int (1+u)^k
  double w_integral = 0.0;  ///< int w^k
};

/// Integrals of (1+u)^k and w^k for each k. Throws ValidationError for k <= 1.
std::vector<NormRow> track_norms(const RadialState& state, const std::vector<double>& ks);

/// Default norm exponents: 2, plus p - q + 2 when it exceeds 1 and differs from 2.
std::vector<double> default_norm_exponents(const ModelParams& params);

}  // namespace chemoflow
