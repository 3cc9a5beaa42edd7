#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chemoflow/diagnostics.hpp"
#include "chemoflow/model.hpp"
#include "chemoflow/state.hpp"

namespace chemoflow {

/// Time-step policy for advance(). Zero-valued defaults are resolved at the
/// start of a run from the initial state.
struct StepControl {
  double dt_init = 0.0;          ///< 0: start at the stability limit
  double dt_min = 0.0;           ///< 0: 1e-16 times the first step
  double dt_max = 1e-2;
  double cfl = 0.4;              ///< fraction of a cell's content that may leave per step
  double growth = 1.25;          ///< largest dt increase between accepted steps
  double max_rel_change = 0.25;  ///< target sup-norm-relative change per step
  double diffusion_number = 0.0; ///< > 0 adds dt <= number * h^2 / D (off by default, diffusion is implicit)
  double u_cap = 0.0;            ///< 0: 1e6 times the initial max of u and w
  int max_retries = 20;
  long max_steps = 20'000'000;
  double record_interval = 0.0;  ///< 0: record every accepted step
  bool lyapunov = true;
  double anchor = 1.0;           ///< s1 in G
  std::vector<double> norm_exponents;
  std::vector<double> blowup_sigmas{1.0, 2.0};

  void validate() const;
};

enum class Verdict { COMPLETED_HORIZON, BLOWUP_DETECTED, STEP_COLLAPSE };
std::string_view to_string(Verdict verdict);

struct RunRecord {
  double t = 0.0;
  double u_max = 0.0;
  double w_max = 0.0;
  double u_center = 0.0;
  double mass_u = 0.0;
  double mass_w = 0.0;
  double dt = 0.0;
  double F = 0.0;
  double D_diss = 0.0;
  std::vector<double> norms;  ///< int (1+u)^k then int w^k, for each exponent in order
};

struct BlowupEstimate {
  bool valid = false;
  double time = 0.0;
  double sigma = 0.0;
  double residual = 0.0;  ///< RMS misfit of the line through ||u||^-sigma, relative to its mean
};

struct RunReport {
  std::vector<RunRecord> records;
  std::vector<double> norm_exponents;
  Verdict verdict = Verdict::COMPLETED_HORIZON;
  BlowupEstimate blowup;
  std::string message;
  long steps = 0;
  long rejected = 0;
  long F_checks = 0;
  long F_violations = 0;
  double max_mass_drift_u = 0.0;
  double max_mass_drift_w = 0.0;
  double max_step_drift = 0.0;     ///< largest relative mass change of a single step
  double max_mean_v = 0.0;         ///< max |mean v| / max |v|
  double max_mean_z = 0.0;
  double u_cap = 0.0;
};

/// Largest dt for which the explicit upwind transport keeps every cell
/// nonnegative, times ctrl.cfl; +inf if nothing moves.
double stable_dt(const RadialState& state, const SensitivityFamily& sens, const StepControl& ctrl);

/// One IMEX step of length dt: explicit upwind chemotactic transport, then
/// implicit flux-form diffusion with coefficients frozen at the old state,
/// then both signals re-solved. Throws NumericalError when the result has a
/// negative or non-finite cell.
RadialState step(const RadialState& state, const SensitivityFamily& sens, double dt);

/// Called with every accepted state (and the initial one); record is non-null
/// when the state was also written to the report.
using StepObserver = std::function<void(const RadialState&, const RunRecord*)>;

/// Adaptive integration up to `horizon`, see StepControl and Verdict.
RunReport advance(RadialState state, const SensitivityFamily& sens, const StepControl& ctrl, double horizon,
                  const StepObserver& observer = {});

/// Least-squares line through (t, ||u||^-sigma) for each sigma, extrapolated to
/// zero; the sigma with the smallest relative misfit wins.
BlowupEstimate estimate_blowup_time(const std::vector<std::pair<double, double>>& t_umax,
                                    const std::vector<double>& sigmas);

/// a exp(-(r/rho)^2) + b at cell centers, clipped at zero.
std::vector<double> gaussian_profile(const RadialGrid& grid, double a, double rho, double b);

/// Piecewise-linear interpolation of (r, value) samples at cell centers,
/// constant beyond the ends, clipped at zero.
std::vector<double> tabulated_profile(const RadialGrid& grid, const std::vector<double>& r,
                                      const std::vector<double>& values);

}  // namespace chemoflow
