#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "chemoflow/elliptic.hpp"
#include "chemoflow/model.hpp"

namespace chemoflow {

/// Extended precision for the blow-up construction: its scales span more
/// than a hundred decades for some admissible parameters.
using real = long double;

struct Exponents {
  double delta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

/// growth = (1-alpha) q + alpha - beta - delta,
/// diffusion = (1-alpha)(q-p) + alpha - beta - 2/n.
struct ExponentMargins {
  double growth;
  double diffusion;
};

ExponentMargins exponent_margins(int n, double p, double q, const Exponents& e);

/// True when alpha in (0, 1-2/n), delta in (0, 2/n), beta in (0, 1) and both margins are positive.
bool exponents_feasible(int n, double p, double q, const Exponents& e);

/// Throws HypothesisError naming the violated inequality unless n >= 3,
/// q - p > 2 - n/2 and q > 1 - n/2.
void check_blowup_hypotheses(int n, double p, double q);

struct SelectionOptions {
  int lattice = 24;        ///< interior points per axis of the coarse search
  int refine_rounds = 40;  ///< step halvings of the pattern search
};

/// Deterministic search over the admissible box for the exponents that
/// minimize log y0 of the resulting construction (the initial concentration
/// scale), which keeps every derived quantity inside double range whenever
/// possible. Coarse lattice, then compass pattern search.
Exponents select_exponents(const ModelParams& model, double mu_star, double mu_min,
                           const SelectionOptions& opts = {});
/// Same with R = 1, kD = kS = 1 and unit means.
Exponents select_exponents(int n, double p, double q);

/// The halving rule (eps, 1-2/n-eps, eps), eps = 1/8, 1/16, ..., keeping the
/// feasible eps with the largest min margin. Admissible but produces y0 far
/// beyond floating-point range; kept for comparison.
Exponents select_exponents_limit_path(int n, double p, double q, int max_halvings = 40);

struct SubsolutionParams {
  int n = 3;
  real R = 1;
  real p = 0;
  real q = 1;
  real kD = 1;  ///< effective constant with D(s) <= kD s^p for s >= 1
  real kS = 1;  ///< effective constant with S(s) >= kS s^q for s >= 1
  real mu_star = 1;
  real mu_min = 1;
  Exponents exps;
  real margin_growth = 0;
  real margin_diffusion = 0;

  real l = 0;
  real y_star = 0;
  std::array<real, 5> y_star_terms{};
  real c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  std::array<real, 7> s_star_bounds{};
  real s_star = 0;
  real bracket_lo = 0, bracket_hi = 0;
  real D_max = 0, S_max = 0;
  real theta_star_P = 0, theta_star_Q = 0, theta_star = 0;
  real theta = 0;
  real kappa = 0;
  real kappa_P = 0;  ///< rate constant of the inner P estimate
  real kappa_Q = 0;  ///< rate constant of the inner Q estimate
  real y0 = 0;
  real T = 0;

  real Rn() const;
};

struct BuildOptions {
  int dmax_samples = 10000;  ///< log-spaced samples for D_max and S_max (0: endpoints only)
};

/// The closed-form parameter pipeline for the given exponents. Throws
/// HypothesisError for infeasible exponents and NumericalError for a
/// degenerate or non-finite result.
SubsolutionParams build_params(const ModelParams& model, double mu_star, double mu_min, const Exponents& exps,
                               const BuildOptions& opts = {});

/// y(t) = (y0^-delta - kappa delta t)^(-1/delta). Throws DomainError unless 0 <= t < T.
real y_of_t(const SubsolutionParams& prm, real t);
/// y'(t) = kappa y^(1+delta).
real y_prime(const SubsolutionParams& prm, real t);

enum class Region { INNER, MIDDLE, OUTER };
const char* to_string(Region region);

/// Values of the unscaled profiles and their partials at (s, t); the
/// subsolution itself is factor * (Phi, Psi) with factor = exp(-theta t).
struct SubsolutionEval {
  Region region = Region::INNER;
  real s = 0, t = 0, y = 0, yp = 0, factor = 1;
  real Phi = 0, Psi = 0;
  real Phi_s = 0, Psi_s = 0;
  real Phi_ss = 0, Psi_ss = 0;
  real Phi_t = 0, Psi_t = 0;

  real U() const { return factor * Phi; }
  real W() const { return factor * Psi; }
  real U_s() const { return factor * Phi_s; }
  real W_s() const { return factor * Psi_s; }
  real U_ss() const { return factor * Phi_ss; }
  real W_ss() const { return factor * Psi_ss; }
};

/// Throws DomainError for s outside [0, R^n] or t outside [0, T).
SubsolutionEval eval_subsolution(const SubsolutionParams& prm, real s, real t);

/// Inner branch at s = 1/y and the outer formula evaluated at the same point.
struct KinkMatch {
  real Phi_inner, Phi_outer, Phi_s_inner, Phi_s_outer;
  real Psi_inner, Psi_outer, Psi_s_inner, Psi_s_outer;
};
KinkMatch kink_values(const SubsolutionParams& prm, real t);

/// Additive terms of P and Q at a point:
/// P = -theta U + factor Phi_t - n^2 s^(2-2/n) D(n U_s) U_ss - S(n U_s)(W - mu s/n), same layout for Q.
struct OperatorTerms {
  std::array<real, 4> P{};
  std::array<real, 4> Q{};
  real P_value() const { return P[0] + P[1] + P[2] + P[3]; }
  real Q_value() const { return Q[0] + Q[1] + Q[2] + Q[3]; }
  real P_scale() const;
  real Q_scale() const;
};
OperatorTerms operator_terms(const SubsolutionParams& prm, const SensitivityFamily& sens, const SubsolutionEval& ev);

/// Upper bounds for P and Q from the regional estimates, each a sum of
/// terms so that its own rounding scale is available.
struct RegionalBound {
  std::vector<real> P_terms;
  std::vector<real> Q_terms;
  real P() const;
  real Q() const;
  real P_scale() const;
  real Q_scale() const;
};
RegionalBound regional_bound(const SubsolutionParams& prm, const SubsolutionEval& ev);

/// (M1(r), M2(r)) = omega_n (U(r^n, 0), W(r^n, 0)).
std::pair<double, double> initial_thresholds(const SubsolutionParams& prm, double r);

/// (n l y^(1-alpha)(t) / e, n l y^(1-beta)(t) / e).
std::pair<double, double> predicted_central_lower_bound(const SubsolutionParams& prm, real t);

struct CertifyOptions {
  int t_samples = 40;
  int s_per_region = 100;
  double tol = 1e-9;
  int workers = 1;
};

struct RegionSummary {
  long samples = 0;
  double worst_P = -1e300;  ///< largest P / (sum of |terms|)
  double worst_Q = -1e300;
  double worst_P_s = 0, worst_P_t = 0;
  double worst_Q_s = 0, worst_Q_t = 0;
  double worst_chain = -1e300;  ///< largest regional bound / its scale (must be <= tol)
  double worst_gap = -1e300;    ///< largest (value - bound) / scale (must be <= tol)
  bool argument_ok = true;      ///< the sensitivity argument lies where the estimate needs it
  bool pass = true;
};

struct Certificate {
  bool pass = false;
  std::string failure;  ///< empty on PASS; names the region and check otherwise
  RegionSummary inner, middle, outer;
  long samples = 0;
  bool T_below_inverse_theta = false;
  bool boundary_ok = false;   ///< U(0,t) = W(0,t) = 0 and U(R^n,t), W(R^n,t) <= mu_min R^n / n
  bool sandwich_ok = false;   ///< c2 A <= B <= c1 A in the middle region
  bool monotone_ok = false;   ///< U_s, W_s >= 0 at every sample
  double tol = 0.0;
};

Certificate certify(const SubsolutionParams& prm, const SensitivityFamily& sens, const CertifyOptions& opts = {});

/// Densities whose mass functions are lambda Phi(s,0) + c s with c set so
/// the mean of u is mu_u (same for w with Psi and mu_w). Requires
/// lambda Phi(R^n,0) <= mu R^n / n.
std::pair<std::vector<double>, std::vector<double>> dominating_profile(const SubsolutionParams& prm,
                                                                       const RadialGrid& grid, double lambda,
                                                                       double mu_u, double mu_w);

/// Smallest face margin of the mass functions of (u, w) over (U, W)(., 0);
/// negative when the data lie below the thresholds somewhere.
std::pair<double, double> threshold_margins(const SubsolutionParams& prm, const RadialGrid& grid,
                                            const std::vector<double>& u, const std::vector<double>& w);

}  // namespace chemoflow
