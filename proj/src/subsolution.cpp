#include "chemoflow/subsolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "chemoflow/log.hpp"

namespace chemoflow {

namespace {

constexpr real kE = std::numbers::e_v<long double>;

real rpow(real x, real y) { return std::pow(x, y); }

std::string fmt_real(real x) {
  std::ostringstream os;
  os.precision(6);
  os << static_cast<double>(x);
  return os.str();
}

}  // namespace

ExponentMargins exponent_margins(int n, double p, double q, const Exponents& e) {
  return {(1.0 - e.alpha) * q + e.alpha - e.beta - e.delta,
          (1.0 - e.alpha) * (q - p) + e.alpha - e.beta - 2.0 / n};
}

bool exponents_feasible(int n, double p, double q, const Exponents& e) {
  if (!(e.alpha > 0.0 && e.alpha < 1.0 - 2.0 / n)) return false;
  if (!(e.delta > 0.0 && e.delta < 2.0 / n)) return false;
  if (!(e.beta > 0.0 && e.beta < 1.0)) return false;
  const auto m = exponent_margins(n, p, q, e);
  return m.growth > 0.0 && m.diffusion > 0.0;
}

void check_blowup_hypotheses(int n, double p, double q) {
  if (n < 3) throw HypothesisError("n >= 3 violated: the blow-up construction needs n >= 3");
  if (!(q - p > 2.0 - 0.5 * n))
    throw HypothesisError("q - p > 2 - n/2 violated: the diffusion margin cannot be made positive (infeasible)");
  if (!(q > 1.0 - 0.5 * n))
    throw HypothesisError("q > 1 - n/2 violated: the growth margin cannot be made positive (infeasible)");
}

real SubsolutionParams::Rn() const { return rpow(R, n); }

SubsolutionParams build_params(const ModelParams& model, double mu_star, double mu_min, const Exponents& exps,
                               const BuildOptions& opts) {
  model.validate();
  check_blowup_hypotheses(model.n, model.p, model.q);
  if (!exponents_feasible(model.n, model.p, model.q, exps)) {
    std::ostringstream os;
    const auto m = exponent_margins(model.n, model.p, model.q, exps);
    os << "exponents (" << exps.delta << ", " << exps.alpha << ", " << exps.beta
       << ") infeasible: growth margin " << m.growth << ", diffusion margin " << m.diffusion;
    throw HypothesisError(os.str());
  }
  if (!(mu_min > 0.0) || !(mu_star >= mu_min)) throw ValidationError("means: need 0 < mu_min <= mu_star");

  const StructuralConstants sc = structural_constants(model);
  SubsolutionParams P;
  P.n = model.n;
  P.R = model.R;
  P.p = model.p;
  P.q = model.q;
  P.kD = sc.kD;
  P.kS = sc.kS;
  P.mu_star = mu_star;
  P.mu_min = mu_min;
  P.exps = exps;
  const auto mg = exponent_margins(model.n, model.p, model.q, exps);
  P.margin_growth = mg.growth;
  P.margin_diffusion = mg.diffusion;

  const real n = model.n;
  const real p = P.p, q = P.q;
  const real a = exps.alpha, b = exps.beta, d = exps.delta;
  const real Rn = P.Rn();
  const real mus = P.mu_star;

  P.l = P.mu_min * Rn / (n * std::exp(1 / kE) * (Rn + 1));
  const real l = P.l;

  P.y_star_terms = {1, 1 / Rn, rpow(kE / (n * l), 1 / (1 - a)), rpow(2 * mus * kE / (n * l), 1 / (1 - b)),
                    rpow(2 * mus * kE / (n * l), 1 / (1 - a))};
  P.y_star = *std::max_element(P.y_star_terms.begin(), P.y_star_terms.end());

  P.c1 = std::max(b / a, real(1));
  P.c2 = std::min(b / a, real(1));
  P.c3 = 4 * P.kD * std::exp(std::abs(q) + std::abs(p) + 1) / (rpow(P.c2, b) * P.kS) * rpow(n, 2 + p - q) *
         rpow(l, p - q) * rpow(a, 2 / n - 1 - a + (1 - a) * (p - q)) * rpow(b, b);
  P.c4 = 4 * std::exp(std::abs(q) + 1) / (rpow(P.c2, b) * P.kS * rpow(n, q)) * rpow(l, -q) *
         rpow(a, (a - 1) * q + d - a) * rpow(b, b);

  const real m1 = P.margin_growth;
  const real m2 = P.margin_diffusion;
  // Each smallness condition on s_star solved for an explicit upper bound.
  P.s_star_bounds = {
      rpow(n * rpow(b, 1 - b) * l / (2 * mus * kE), 1 / (1 - b)),
      rpow(n * rpow(a, 1 - a) * l / kE, 1 / (1 - a)),
      rpow(P.c3, -1 / m2),
      rpow(P.c4, -1 / m1),
      rpow(n * rpow(a, 1 - a) * l / (2 * mus * kE), 1 / (1 - a)),
      rpow(4 * n * rpow(P.c1, a) * kE * kE * rpow(a, a) / (l * rpow(b, 2 - 2 / n)), -1 / (1 - a - 2 / n)),
      rpow(4 * rpow(P.c1, a) * kE * kE * rpow(a, a) * rpow(b, d - 1) / (n * l), -1 / (1 - d - a)),
  };
  real smin = *std::min_element(P.s_star_bounds.begin(), P.s_star_bounds.end());
  P.s_star = std::min(smin / 2, Rn / 2);
  if (!(P.s_star > 0) || !std::isfinite(P.s_star))
    throw NumericalError("s_star degenerate (" + fmt_real(P.s_star) + ")");
  const real ss = P.s_star;

  P.bracket_lo = n * l / kE * rpow(a, 1 - a) * rpow(P.R, n * (a - 1));
  P.bracket_hi = n * l * rpow(ss, a - 1);
  if (!(P.bracket_hi >= P.bracket_lo)) throw NumericalError("sensitivity bracket is empty");
  const SensitivityFamily sens(model);
  P.D_max = std::max(sens.D(P.bracket_lo), sens.D(P.bracket_hi));
  P.S_max = std::max(sens.S(P.bracket_lo), sens.S(P.bracket_hi));
  if (opts.dmax_samples > 1) {
    const real llo = std::log(P.bracket_lo), lhi = std::log(P.bracket_hi);
    for (int k = 0; k < opts.dmax_samples; ++k) {
      const real x = std::exp(llo + (lhi - llo) * k / (opts.dmax_samples - 1));
      P.D_max = std::max(P.D_max, sens.D(x));
      P.S_max = std::max(P.S_max, sens.S(x));
    }
  }

  const real R2n2 = rpow(P.R, 2 * n - 2);
  P.theta_star_P = kE / (l * rpow(ss, a)) *
                   (l * rpow(ss, a - d) + n * n * R2n2 * l * rpow(ss, a - 2) * P.D_max / a + mus * Rn * P.S_max / n);
  P.theta_star_Q =
      kE / (l * rpow(ss, b)) * (l * rpow(ss, b - d) + n * n * R2n2 * l * rpow(ss, b - 2) / b + mus * Rn / n);
  P.theta_star = std::max(P.theta_star_P, P.theta_star_Q);
  P.theta = 2 * P.theta_star;

  P.kappa_P = P.kS * rpow(n, q) * rpow(l, q) / (2 * std::exp(std::abs(q) + 1));
  P.kappa_Q = n * l / (2 * kE * kE);
  P.kappa = std::min({real(1), P.kappa_P, P.kappa_Q});

  const real y_theta = rpow(P.theta / (P.kappa * d), 1 / d);
  P.y0 = 2 * std::max({y_theta, P.y_star, 1 / ss});
  P.T = rpow(P.y0, -d) / (P.kappa * d);

  for (real v : {P.l, P.y_star, P.theta, P.kappa, P.y0, P.T})
    if (!std::isfinite(v) || !(v > 0)) throw NumericalError("parameter pipeline produced a non-finite value");
  if (!(P.T < 1 / P.theta)) throw NumericalError("T < 1/theta failed");
  if (!(P.theta > 1)) throw NumericalError("theta must exceed 1");
  return P;
}

Exponents select_exponents(const ModelParams& model, double mu_star, double mu_min, const SelectionOptions& opts) {
  model.validate();
  check_blowup_hypotheses(model.n, model.p, model.q);
  const int n = model.n;
  const double hi_d = 2.0 / n, hi_a = 1.0 - 2.0 / n, hi_b = 1.0;
  auto objective = [&](const Exponents& e) {
    if (!exponents_feasible(n, model.p, model.q, e)) return std::numeric_limits<double>::infinity();
    try {
      const SubsolutionParams prm = build_params(model, mu_star, mu_min, e, BuildOptions{0});
      return static_cast<double>(std::log10(prm.y0));
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const int G = std::max(4, opts.lattice);
  Exponents best{};
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 1; i < G; ++i)
    for (int j = 1; j < G; ++j)
      for (int k = 1; k < G; ++k) {
        const Exponents e{hi_d * i / G, hi_a * j / G, hi_b * k / G};
        const double v = objective(e);
        if (v < best_val) {
          best_val = v;
          best = e;
        }
      }
  if (!std::isfinite(best_val)) throw NumericalError("exponent search found no representable construction");

  // Compass search, kept 1/256 of each range away from the open endpoints.
  const double lo_frac = 1.0 / 256.0;
  auto clampe = [&](Exponents e) {
    e.delta = std::clamp(e.delta, hi_d * lo_frac, hi_d * (1 - lo_frac));
    e.alpha = std::clamp(e.alpha, hi_a * lo_frac, hi_a * (1 - lo_frac));
    e.beta = std::clamp(e.beta, hi_b * lo_frac, hi_b * (1 - lo_frac));
    return e;
  };
  std::array<double, 3> step{hi_d / G, hi_a / G, hi_b / G};
  for (int round = 0; round < opts.refine_rounds; ++round) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int axis = 0; axis < 3; ++axis) {
        for (int sign : {-1, 1}) {
          Exponents e = best;
          double* c = axis == 0 ? &e.delta : axis == 1 ? &e.alpha : &e.beta;
          *c += sign * step[axis];
          e = clampe(e);
          const double v = objective(e);
          if (v < best_val - 1e-12) {
            best_val = v;
            best = e;
            improved = true;
          }
        }
      }
    }
    for (double& s : step) s *= 0.5;
  }
  log::debug("selected exponents delta={} alpha={} beta={} (log10 y0 = {:.3f})", best.delta, best.alpha, best.beta,
             best_val);
  return best;
}

Exponents select_exponents(int n, double p, double q) {
  ModelParams m;
  m.n = n;
  m.p = p;
  m.q = q;
  return select_exponents(m, 1.0, 1.0);
}

Exponents select_exponents_limit_path(int n, double p, double q, int max_halvings) {
  check_blowup_hypotheses(n, p, q);
  Exponents best{};
  double best_margin = -1.0;
  double eps = 0.125;
  for (int k = 0; k < max_halvings; ++k, eps *= 0.5) {
    const Exponents e{eps, 1.0 - 2.0 / n - eps, eps};
    if (!exponents_feasible(n, p, q, e)) continue;
    const auto m = exponent_margins(n, p, q, e);
    const double mm = std::min(m.growth, m.diffusion);
    if (mm > best_margin) {
      best_margin = mm;
      best = e;
    }
  }
  if (best_margin <= 0.0) throw NumericalError("halving rule found no feasible exponents");
  return best;
}

real y_of_t(const SubsolutionParams& prm, real t) {
  if (!(t >= 0) || !(t < prm.T)) throw DomainError("y(t): t must lie in [0, T)");
  const real d = prm.exps.delta;
  const real base = rpow(prm.y0, -d) - prm.kappa * d * t;
  return rpow(base, -1 / d);
}

real y_prime(const SubsolutionParams& prm, real t) {
  return prm.kappa * rpow(y_of_t(prm, t), 1 + static_cast<real>(prm.exps.delta));
}

const char* to_string(Region region) {
  switch (region) {
    case Region::INNER: return "INNER";
    case Region::MIDDLE: return "MIDDLE";
    case Region::OUTER: return "OUTER";
  }
  return "OUTER";
}

SubsolutionEval eval_subsolution(const SubsolutionParams& prm, real s, real t) {
  if (!(s >= 0) || !(s <= prm.Rn())) throw DomainError("subsolution: s must lie in [0, R^n]");
  SubsolutionEval ev;
  ev.s = s;
  ev.t = t;
  ev.y = y_of_t(prm, t);
  ev.yp = prm.kappa * rpow(ev.y, 1 + static_cast<real>(prm.exps.delta));
  ev.factor = std::exp(-prm.theta * t);
  const real l = prm.l, y = ev.y, yp = ev.yp;
  const real a = prm.exps.alpha, b = prm.exps.beta;
  if (s <= 1 / y) {
    ev.region = Region::INNER;
    ev.Phi = l * rpow(y, 1 - a) * s;
    ev.Psi = l * rpow(y, 1 - b) * s;
    ev.Phi_s = l * rpow(y, 1 - a);
    ev.Psi_s = l * rpow(y, 1 - b);
    ev.Phi_ss = 0;
    ev.Psi_ss = 0;
    ev.Phi_t = l * (1 - a) * yp * rpow(y, -a) * s;
    ev.Psi_t = l * (1 - b) * yp * rpow(y, -b) * s;
    return ev;
  }
  ev.region = s <= prm.s_star ? Region::MIDDLE : Region::OUTER;
  const real A = s - (1 - a) / y;
  const real B = s - (1 - b) / y;
  ev.Phi = l * rpow(a, -a) * rpow(A, a);
  ev.Psi = l * rpow(b, -b) * rpow(B, b);
  ev.Phi_s = l * rpow(a, 1 - a) * rpow(A, a - 1);
  ev.Psi_s = l * rpow(b, 1 - b) * rpow(B, b - 1);
  ev.Phi_ss = l * rpow(a, 1 - a) * (a - 1) * rpow(A, a - 2);
  ev.Psi_ss = l * rpow(b, 1 - b) * (b - 1) * rpow(B, b - 2);
  ev.Phi_t = l * rpow(a, 1 - a) * (1 - a) * rpow(A, a - 1) * yp / (y * y);
  ev.Psi_t = l * rpow(b, 1 - b) * (1 - b) * rpow(B, b - 1) * yp / (y * y);
  return ev;
}

KinkMatch kink_values(const SubsolutionParams& prm, real t) {
  const real y = y_of_t(prm, t);
  const real s = 1 / y;
  const real l = prm.l, a = prm.exps.alpha, b = prm.exps.beta;
  const real A = s - (1 - a) / y;
  const real B = s - (1 - b) / y;
  return {l * rpow(y, 1 - a) * s, l * rpow(a, -a) * rpow(A, a), l * rpow(y, 1 - a), l * rpow(a, 1 - a) * rpow(A, a - 1),
          l * rpow(y, 1 - b) * s, l * rpow(b, -b) * rpow(B, b), l * rpow(y, 1 - b), l * rpow(b, 1 - b) * rpow(B, b - 1)};
}

namespace {
real abs_sum(const real* x, std::size_t m) {
  real acc = 0;
  for (std::size_t k = 0; k < m; ++k) acc += std::abs(x[k]);
  return acc;
}
real plain_sum(const std::vector<real>& x) {
  real acc = 0;
  for (real v : x) acc += v;
  return acc;
}
}  // namespace

real OperatorTerms::P_scale() const { return abs_sum(P.data(), P.size()); }
real OperatorTerms::Q_scale() const { return abs_sum(Q.data(), Q.size()); }
real RegionalBound::P() const { return plain_sum(P_terms); }
real RegionalBound::Q() const { return plain_sum(Q_terms); }
real RegionalBound::P_scale() const { return abs_sum(P_terms.data(), P_terms.size()); }
real RegionalBound::Q_scale() const { return abs_sum(Q_terms.data(), Q_terms.size()); }

OperatorTerms operator_terms(const SubsolutionParams& prm, const SensitivityFamily& sens, const SubsolutionEval& ev) {
  const real n = prm.n;
  const real geo = n * n * rpow(ev.s, 2 - 2 / n);
  const real x = n * ev.U_s();
  const real mu_s = prm.mu_star * ev.s / n;
  OperatorTerms o;
  o.P = {-prm.theta * ev.U(), ev.factor * ev.Phi_t, -geo * sens.D(x) * ev.U_ss(), -sens.S(x) * (ev.W() - mu_s)};
  o.Q = {-prm.theta * ev.W(), ev.factor * ev.Psi_t, -geo * ev.W_ss(), -n * ev.W_s() * (ev.U() - mu_s)};
  return o;
}

RegionalBound regional_bound(const SubsolutionParams& prm, const SubsolutionEval& ev) {
  const real n = prm.n;
  const real l = prm.l, a = prm.exps.alpha, b = prm.exps.beta, d = prm.exps.delta;
  const real p = prm.p, q = prm.q;
  const real y = ev.y, yp = ev.yp, s = ev.s;
  RegionalBound rb;
  switch (ev.region) {
    case Region::INNER:
      rb.P_terms = {l * rpow(y, -a) * s * yp, -l * rpow(y, -a) * s * prm.kappa_P * rpow(y, 1 + d)};
      rb.Q_terms = {l * rpow(y, -b) * s * yp, -l * rpow(y, -b) * s * prm.kappa_Q * rpow(y, 1 + d)};
      break;
    case Region::MIDDLE: {
      const real A = s - (1 - a) / y;
      const real B = s - (1 - b) / y;
      rb.P_terms = {
          rpow(a, d - a) * l * rpow(A, a - d),
          prm.kD * rpow(n, 2 + p) * std::exp(std::abs(p)) * rpow(l, p + 1) * rpow(a, 2 / n - 1 - a + (1 - a) * p) *
              rpow(A, a - 2 / n + p * (a - 1)),
          -rpow(prm.c2, b) * prm.kS * rpow(n, q) * rpow(l, q + 1) / (2 * std::exp(std::abs(q) + 1) * rpow(b, b)) *
              rpow(a, (1 - a) * q) * rpow(A, b + q * (a - 1)),
      };
      rb.Q_terms = {
          rpow(b, d - b) * l * rpow(B, b - d),
          n * n * l * rpow(b, 2 / n - 1 - b) * rpow(B, b - 2 / n),
          -n * l * l / (2 * rpow(prm.c1, a) * kE * kE * rpow(a, a)) * rpow(b, 1 - b) * rpow(B, a + b - 1),
      };
      break;
    }
    case Region::OUTER: {
      const real ss = prm.s_star;
      const real Rn = prm.Rn();
      const real R2n2 = rpow(prm.R, 2 * n - 2);
      rb.P_terms = {-prm.theta * l * rpow(ss, a) / kE, l * rpow(ss, a - d), n * n * R2n2 * l * rpow(ss, a - 2) * prm.D_max / a,
                    prm.mu_star * Rn * prm.S_max / n};
      rb.Q_terms = {-prm.theta * l * rpow(ss, b) / kE, l * rpow(ss, b - d), n * n * R2n2 * l * rpow(ss, b - 2) / b,
                    prm.mu_star * Rn / n};
      break;
    }
  }
  (void)yp;
  return rb;
}

std::pair<double, double> initial_thresholds(const SubsolutionParams& prm, double r) {
  if (!(r >= 0.0) || !(r <= static_cast<double>(prm.R) * (1 + 1e-15))) throw DomainError("thresholds: r outside [0, R]");
  const real s = std::min(rpow(static_cast<real>(r), prm.n), prm.Rn());
  const SubsolutionEval ev = eval_subsolution(prm, s, 0);
  const real omega = unit_sphere_area(prm.n);
  return {static_cast<double>(omega * ev.U()), static_cast<double>(omega * ev.W())};
}

std::pair<double, double> predicted_central_lower_bound(const SubsolutionParams& prm, real t) {
  const real y = y_of_t(prm, t);
  const real n = prm.n;
  return {static_cast<double>(n * prm.l * rpow(y, 1 - static_cast<real>(prm.exps.alpha)) / kE),
          static_cast<double>(n * prm.l * rpow(y, 1 - static_cast<real>(prm.exps.beta)) / kE)};
}

namespace {

std::vector<real> certificate_times(const SubsolutionParams& prm, int count) {
  // Half log-spaced from 1e-6 T, half log-clustered toward 0.99 T.
  std::vector<real> ts;
  const int half = std::max(1, count / 2);
  const real T = prm.T;
  const real t0 = real(1e-6) * T, t1 = real(0.5) * T;
  for (int k = 0; k < half; ++k) ts.push_back(t0 * rpow(t1 / t0, real(k) / half));
  const int rest = std::max(1, count - half);
  const real g0 = real(0.5) * T, g1 = real(0.01) * T;
  for (int k = 0; k < rest; ++k) {
    const real gap = rest == 1 ? g1 : g0 * rpow(g1 / g0, real(k) / (rest - 1));
    ts.push_back(T - gap);
  }
  return ts;
}

// Logarithmic fractions in (0, 1], clustered toward 0.
std::vector<real> log_fractions(int m, real smallest) {
  std::vector<real> xs(m);
  for (int k = 0; k < m; ++k) xs[k] = m == 1 ? 1 : smallest * rpow(1 / smallest, real(k) / (m - 1));
  return xs;
}

struct TimeSlice {
  RegionSummary in, mid, out;
  bool boundary_ok = true, sandwich_ok = true, monotone_ok = true;
};

void account(RegionSummary& r, const SubsolutionParams& prm, const SensitivityFamily& sens, const SubsolutionEval& ev,
             double tol, TimeSlice& slice) {
  const OperatorTerms o = operator_terms(prm, sens, ev);
  const RegionalBound rb = regional_bound(prm, ev);
  const real Pv = o.P_value(), Qv = o.Q_value();
  const real Ps = o.P_scale(), Qs = o.Q_scale();
  const double nP = Ps > 0 ? static_cast<double>(Pv / Ps) : 0.0;
  const double nQ = Qs > 0 ? static_cast<double>(Qv / Qs) : 0.0;
  ++r.samples;
  if (nP > r.worst_P || r.samples == 1) {
    r.worst_P = nP;
    r.worst_P_s = static_cast<double>(ev.s);
    r.worst_P_t = static_cast<double>(ev.t);
  }
  if (nQ > r.worst_Q || r.samples == 1) {
    r.worst_Q = nQ;
    r.worst_Q_s = static_cast<double>(ev.s);
    r.worst_Q_t = static_cast<double>(ev.t);
  }
  const real bP = rb.P(), bQ = rb.Q();
  const real bPs = rb.P_scale(), bQs = rb.Q_scale();
  r.worst_chain = std::max({r.worst_chain, static_cast<double>(bP / bPs), static_cast<double>(bQ / bQs)});
  r.worst_gap = std::max({r.worst_gap, static_cast<double>((Pv - bP) / (Ps + bPs)),
                          static_cast<double>((Qv - bQ) / (Qs + bQs))});
  if (!std::isfinite(nP) || !std::isfinite(nQ) || nP > tol || nQ > tol || r.worst_chain > tol || r.worst_gap > tol)
    r.pass = false;

  // The estimates rely on x = n U_s exceeding 1 (inner, middle) or lying in
  // the sampled bracket (outer).
  const real x = prm.n * ev.U_s();
  if (ev.region == Region::OUTER) {
    const real slack = real(1e-12);
    if (x < prm.bracket_lo * (1 - slack) || x > prm.bracket_hi * (1 + slack)) r.argument_ok = false;
  } else if (!(x >= 1)) {
    r.argument_ok = false;
  }
  if (!r.argument_ok) r.pass = false;

  if (ev.U_s() < 0 || ev.W_s() < 0) slice.monotone_ok = false;
  if (ev.region == Region::MIDDLE) {
    const real a = prm.exps.alpha, b = prm.exps.beta;
    const real A = ev.s - (1 - a) / ev.y;
    const real B = ev.s - (1 - b) / ev.y;
    const real eps = real(1e-15) * std::abs(B);
    if (!(prm.c2 * A <= B + eps && B <= prm.c1 * A + eps)) slice.sandwich_ok = false;
  }
}

TimeSlice certify_slice(const SubsolutionParams& prm, const SensitivityFamily& sens, real t, int m, double tol) {
  TimeSlice slice;
  const real y = y_of_t(prm, t);
  const real kink = 1 / y;
  const real Rn = prm.Rn();
  for (real f : log_fractions(m, real(1e-8))) account(slice.in, prm, sens, eval_subsolution(prm, kink * f, t), tol, slice);
  for (real f : log_fractions(m, real(1e-9))) {
    const real s = kink + (prm.s_star - kink) * f;
    account(slice.mid, prm, sens, eval_subsolution(prm, s, t), tol, slice);
  }
  for (real f : log_fractions(m, real(1e-9))) {
    const real s = std::min(Rn, prm.s_star + (Rn - prm.s_star) * f);
    account(slice.out, prm, sens, eval_subsolution(prm, s, t), tol, slice);
  }
  const SubsolutionEval e0 = eval_subsolution(prm, 0, t);
  const SubsolutionEval eR = eval_subsolution(prm, Rn, t);
  const real cap = prm.mu_min * Rn / prm.n;
  if (e0.U() != 0 || e0.W() != 0 || eR.U() > cap || eR.W() > cap) slice.boundary_ok = false;
  return slice;
}

void merge(RegionSummary& into, const RegionSummary& r) {
  if (r.samples == 0) return;
  if (into.samples == 0 || r.worst_P > into.worst_P) {
    into.worst_P = r.worst_P;
    into.worst_P_s = r.worst_P_s;
    into.worst_P_t = r.worst_P_t;
  }
  if (into.samples == 0 || r.worst_Q > into.worst_Q) {
    into.worst_Q = r.worst_Q;
    into.worst_Q_s = r.worst_Q_s;
    into.worst_Q_t = r.worst_Q_t;
  }
  into.worst_chain = std::max(into.worst_chain, r.worst_chain);
  into.worst_gap = std::max(into.worst_gap, r.worst_gap);
  into.samples += r.samples;
  into.argument_ok = into.argument_ok && r.argument_ok;
  into.pass = into.pass && r.pass;
}

}  // namespace

Certificate certify(const SubsolutionParams& prm, const SensitivityFamily& sens, const CertifyOptions& opts) {
  if (opts.t_samples < 2 || opts.s_per_region < 2) throw ValidationError("certify: need at least 2 samples per axis");
  if (!(prm.T > 0) || !(prm.s_star > 0)) throw ValidationError("certify: parameters not built");
  const std::vector<real> ts = certificate_times(prm, opts.t_samples);
  std::vector<TimeSlice> slices(ts.size());
  const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(ts.size())));
  auto work = [&](int w) {
    for (std::size_t k = static_cast<std::size_t>(w); k < ts.size(); k += static_cast<std::size_t>(workers))
      slices[k] = certify_slice(prm, sens, ts[k], opts.s_per_region, opts.tol);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  Certificate c;
  c.tol = opts.tol;
  c.boundary_ok = c.sandwich_ok = c.monotone_ok = true;
  for (const auto& sl : slices) {
    merge(c.inner, sl.in);
    merge(c.middle, sl.mid);
    merge(c.outer, sl.out);
    c.boundary_ok = c.boundary_ok && sl.boundary_ok;
    c.sandwich_ok = c.sandwich_ok && sl.sandwich_ok;
    c.monotone_ok = c.monotone_ok && sl.monotone_ok;
  }
  c.samples = c.inner.samples + c.middle.samples + c.outer.samples;
  c.T_below_inverse_theta = prm.T < 1 / prm.theta;

  auto describe = [&](const char* name, const RegionSummary& r) -> std::string {
    if (r.pass) return {};
    std::ostringstream os;
    os << name << ":";
    if (r.worst_P > opts.tol) os << " P residual " << r.worst_P;
    if (r.worst_Q > opts.tol) os << " Q residual " << r.worst_Q;
    if (r.worst_chain > opts.tol) os << " regional estimate positive (" << r.worst_chain << ")";
    if (r.worst_gap > opts.tol) os << " operator exceeds regional estimate (" << r.worst_gap << ")";
    if (!r.argument_ok) os << " sensitivity argument outside the estimate's range";
    return os.str();
  };
  std::string failure;
  for (const auto& [name, r] : {std::pair<const char*, const RegionSummary*>{"INNER", &c.inner},
                                {"MIDDLE", &c.middle},
                                {"OUTER", &c.outer}}) {
    const std::string d = describe(name, *r);
    if (!d.empty()) failure += (failure.empty() ? "" : "; ") + d;
  }
  if (!c.T_below_inverse_theta) failure += (failure.empty() ? "" : "; ") + std::string("T >= 1/theta");
  if (!c.boundary_ok) failure += (failure.empty() ? "" : "; ") + std::string("boundary values");
  if (!c.sandwich_ok) failure += (failure.empty() ? "" : "; ") + std::string("MIDDLE: sandwich c2 A <= B <= c1 A");
  if (!c.monotone_ok) failure += (failure.empty() ? "" : "; ") + std::string("negative s-derivative");
  c.failure = failure;
  c.pass = failure.empty();
  return c;
}

std::pair<std::vector<double>, std::vector<double>> dominating_profile(const SubsolutionParams& prm,
                                                                       const RadialGrid& grid, double lambda,
                                                                       double mu_u, double mu_w) {
  if (!(lambda > 0.0)) throw ValidationError("dominating data: lambda must be positive");
  if (grid.dim() != prm.n) throw ValidationError("dominating data: dimension mismatch");
  const real Rn = prm.Rn();
  const real n = prm.n;
  const SubsolutionEval end = eval_subsolution(prm, Rn, 0);
  const real cu = mu_u / n - lambda * end.Phi / Rn;
  const real cw = mu_w / n - lambda * end.Psi / Rn;
  if (cu < 0 || cw < 0) throw ValidationError("dominating data: lambda too large for the requested means");
  const auto& faces = grid.faces();
  const auto& wt = grid.weights();
  std::vector<double> u(grid.cells()), w(grid.cells());
  real Uprev = 0, Wprev = 0;
  for (int i = 0; i < grid.cells(); ++i) {
    const real s = std::min(rpow(static_cast<real>(faces[i + 1]), prm.n), Rn);
    const SubsolutionEval ev = eval_subsolution(prm, s, 0);
    const real U = lambda * ev.Phi + cu * s;
    const real W = lambda * ev.Psi + cw * s;
    u[i] = static_cast<double>((U - Uprev) / wt[i]);
    w[i] = static_cast<double>((W - Wprev) / wt[i]);
    Uprev = U;
    Wprev = W;
  }
  return {u, w};
}

std::pair<double, double> threshold_margins(const SubsolutionParams& prm, const RadialGrid& grid,
                                            const std::vector<double>& u, const std::vector<double>& w) {
  const auto& faces = grid.faces();
  const auto& wt = grid.weights();
  real Ucum = 0, Wcum = 0;
  double mu = std::numeric_limits<double>::infinity(), mw = mu;
  for (int i = 0; i < grid.cells(); ++i) {
    Ucum += static_cast<real>(wt[i]) * u[i];
    Wcum += static_cast<real>(wt[i]) * w[i];
    const real s = std::min(rpow(static_cast<real>(faces[i + 1]), prm.n), prm.Rn());
    const SubsolutionEval ev = eval_subsolution(prm, s, 0);
    mu = std::min(mu, static_cast<double>(Ucum - ev.U()));
    mw = std::min(mw, static_cast<double>(Wcum - ev.W()));
  }
  return {mu, mw};
}

}  // namespace chemoflow
