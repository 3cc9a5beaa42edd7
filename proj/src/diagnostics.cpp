#include "chemoflow/diagnostics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>

namespace chemoflow {

double G_integral(const std::function<double(double)>& h, double s, double s1) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("G: argument must be positive");
  if (!(s1 > 0.0) || !std::isfinite(s1)) throw DomainError("G: anchor must be positive");
  if (s == s1) return 0.0;
  // tau = exp(x) keeps the 1/tau singularity of D/S at the origin integrable
  // with few nodes.
  auto integrand = [&](double x) {
    const double tau = std::exp(x);
    return (s - tau) * h(tau) * tau;
  };
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(integrand, std::log(s1), std::log(s), 15, 1e-13);
}

GFunction::GFunction(const SensitivityFamily& sens, double s1) : sens_(sens), s1_(s1) {
  if (!(s1 > 0.0) || !std::isfinite(s1)) throw DomainError("G: anchor must be positive");
  if (!(sens.kS() > 0.0)) throw DomainError("G: needs a positive sensitivity coefficient");
  const double m = sens.p() - sens.q() + 1.0;
  closed_form_ = m >= 0.0 && m <= 16.0 && m == std::floor(m);
  if (closed_form_) {
    m_ = static_cast<int>(m);
    binom_.assign(m_ + 1, 1.0);
    for (int k = 1; k <= m_; ++k) binom_[k] = binom_[k - 1] * (m_ - k + 1) / k;
    return;
  }
  // H0(s) = int_{s1}^{s} (1+tau)^m / tau dtau = int (1 + e^x)^m dx, tabulated
  // at x = log(s1) + k * kStep for log(1e-30) <= x <= log(1e300).
  m_real_ = m;
  x_lo_ = std::floor((std::log(1e-30) - std::log(s1)) / kStep);
  const double x_hi = std::ceil((std::log(1e300) - std::log(s1)) / kStep);
  const int count = static_cast<int>(x_hi - x_lo_) + 1;
  h0_.assign(count, 0.0);
  const int k0 = static_cast<int>(-x_lo_);
  const double ls1 = std::log(s1);
  auto f = [m](double x) { return std::pow(1.0 + std::exp(x), m); };
  using boost::math::quadrature::gauss_kronrod;
  for (int k = k0 + 1; k < count; ++k)
    h0_[k] = h0_[k - 1] + gauss_kronrod<double, 15>::integrate(f, ls1 + (k - 1 - k0) * kStep, ls1 + (k - k0) * kStep, 0);
  for (int k = k0 - 1; k >= 0; --k)
    h0_[k] = h0_[k + 1] - gauss_kronrod<double, 15>::integrate(f, ls1 + (k - k0) * kStep, ls1 + (k + 1 - k0) * kStep, 0);
}

double GFunction::H0(double s) const {
  using boost::math::quadrature::gauss_kronrod;
  const double ls1 = std::log(s1_);
  const double x = std::log(s) - ls1;
  const int k0 = static_cast<int>(-x_lo_);
  const int last = static_cast<int>(h0_.size()) - 1;
  const int k = std::clamp(static_cast<int>(std::lround(x / kStep)) + k0, 0, last);
  const double m = m_real_;
  auto f = [m](double xx) { return std::pow(1.0 + std::exp(xx), m); };
  return h0_[k] + gauss_kronrod<double, 15>::integrate(f, ls1 + (k - k0) * kStep, ls1 + x, 0);
}

double GFunction::operator()(double s) const {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("G: argument must be positive");
  const double ratio = sens_.kD() / sens_.kS();
  if (!closed_form_) {
    // G = s H0(s) - H1(s) with H1(s) = int_{s1}^{s} (1+tau)^m dtau.
    const double m = m_real_;
    const double h1 = m == -1.0 ? std::log((1.0 + s) / (1.0 + s1_))
                                : (std::pow(1.0 + s, m + 1.0) - std::pow(1.0 + s1_, m + 1.0)) / (m + 1.0);
    return ratio * (s * H0(s) - h1);
  }
  // D/S = (kD/kS) (1 + tau)^m / tau = (kD/kS) (1/tau + sum_k C(m,k) tau^(k-1)).
  double acc = s * std::log(s / s1_) - (s - s1_);
  for (int k = 1; k <= m_; ++k) {
    const int j = k - 1;
    const double a = (std::pow(s, j + 1) - std::pow(s1_, j + 1)) / (j + 1);
    const double b = (std::pow(s, j + 2) - std::pow(s1_, j + 2)) / (j + 2);
    acc += binom_[k] * (s * a - b);
  }
  return ratio * acc;
}

double G_eval(double s, double s1, const SensitivityFamily& sens) { return GFunction(sens, s1)(s); }

LyapunovSample lyapunov_sample(const RadialState& state, const SensitivityFamily& sens, const GFunction& G) {
  const RadialGrid& grid = *state.grid;
  const int N = grid.cells();
  const auto& wt = grid.weights();
  const auto& c = grid.centers();
  const auto& area = grid.face_areas();
  const double omega = unit_sphere_area(grid.dim());

  LyapunovSample out;
  out.t = state.t;
  double fg = 0.0;
  double fw = 0.0;
  for (int i = 0; i < N; ++i) {
    const double ui = std::max(state.u[i], kLogFloor);
    fg += wt[i] * G(ui);
    const double wi = state.w[i];
    if (wi > 0.0) fw += wt[i] * wi * std::log(std::max(wi, kLogFloor));
  }
  double fvz = 0.0;
  double diss = 0.0;
  const SensitivityFamily lin = SensitivityFamily::linear();
  for (int f = 1; f < N; ++f) {
    const double dc = c[f] - c[f - 1];
    const double vr = state.v.face_gradient[f];
    const double zr = state.z.face_gradient[f];
    fvz += area[f] * dc * vr * zr;

    const double ub = 0.5 * (state.u[f - 1] + state.u[f]);
    const double Sb = sens.S(ub);
    if (Sb > 0.0) {
      const double ur = (state.u[f] - state.u[f - 1]) / dc;
      const double flux = sens.D(ub) * ur - Sb * vr;
      diss += area[f] * dc * flux * flux / Sb;
    }
    const double wb = 0.5 * (state.w[f - 1] + state.w[f]);
    if (wb > 0.0) {
      const double wr = (state.w[f] - state.w[f - 1]) / dc;
      const double flux = lin.D(wb) * wr - lin.S(wb) * zr;
      diss += area[f] * dc * flux * flux / wb;
    }
  }
  out.F_G = omega * fg;
  out.F_w = omega * fw;
  out.F_vz = omega * fvz;
  out.F = out.F_G + out.F_w - out.F_vz;
  out.D_diss = omega * diss;
  return out;
}

std::vector<NormRow> track_norms(const RadialState& state, const std::vector<double>& ks) {
  const RadialGrid& grid = *state.grid;
  const auto& wt = grid.weights();
  const double omega = unit_sphere_area(grid.dim());
  std::vector<NormRow> rows;
  rows.reserve(ks.size());
  for (double k : ks) {
    if (!(k > 1.0) || !std::isfinite(k)) throw ValidationError("track_norms: exponents must exceed 1");
    NormRow row{k, 0.0, 0.0};
    for (int i = 0; i < grid.cells(); ++i) {
      row.u_integral += wt[i] * std::pow(1.0 + state.u[i], k);
      row.w_integral += wt[i] * std::pow(state.w[i], k);
    }
    row.u_integral *= omega;
    row.w_integral *= omega;
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> default_norm_exponents(const ModelParams& params) {
  std::vector<double> ks{2.0};
  const double k = params.p - params.q + 2.0;
  if (k > 1.0 && k != 2.0) ks.push_back(k);
  return ks;
}

}  // namespace chemoflow
