#include "chemoflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

#include "chemoflow/log.hpp"

namespace chemoflow {

void StepControl::validate() const {
  if (dt_init < 0.0 || !std::isfinite(dt_init)) throw ValidationError("step.dt_init: must be >= 0");
  if (dt_min < 0.0 || !std::isfinite(dt_min)) throw ValidationError("step.dt_min: must be >= 0");
  if (!(dt_max > 0.0)) throw ValidationError("step.dt_max: must be positive");
  if (dt_min > dt_max) throw ValidationError("step.dt_min: must not exceed dt_max");
  if (!(cfl > 0.0) || cfl >= 1.0) throw ValidationError("step.cfl: must lie in (0, 1)");
  if (!(growth >= 1.0)) throw ValidationError("step.growth: must be >= 1");
  if (!(max_rel_change > 0.0)) throw ValidationError("step.max_rel_change: must be positive");
  if (diffusion_number < 0.0) throw ValidationError("step.diffusion_number: must be >= 0");
  if (u_cap < 0.0) throw ValidationError("step.u_cap: must be >= 0");
  if (max_retries < 0) throw ValidationError("step.max_retries: must be >= 0");
  if (max_steps < 1) throw ValidationError("step.max_steps: must be >= 1");
  if (record_interval < 0.0) throw ValidationError("step.record_interval: must be >= 0");
  if (!(anchor > 0.0)) throw ValidationError("diagnostics.anchor: must be positive");
  for (double k : norm_exponents)
    if (!(k > 1.0)) throw ValidationError("diagnostics.norm_exponents: every exponent must exceed 1");
  if (blowup_sigmas.empty()) throw ValidationError("step.blowup_sigmas: need at least one exponent");
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::COMPLETED_HORIZON: return "COMPLETED_HORIZON";
    case Verdict::BLOWUP_DETECTED: return "BLOWUP_DETECTED";
    case Verdict::STEP_COLLAPSE: return "STEP_COLLAPSE";
  }
  return "STEP_COLLAPSE";
}

namespace {

double sup(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

// Largest dt keeping (1 - cfl) of each cell after explicit upwind transport.
// rate(i) = (S(x_i)/x_i) * (outflow flux area sum) / weight.
template <class SOverS>
double transport_limit(const RadialGrid& grid, const std::vector<double>& x, const std::vector<double>& g,
                       double cfl, SOverS s_over_s) {
  const auto& wt = grid.weights();
  const int N = grid.cells();
  double dt = std::numeric_limits<double>::infinity();
  for (int i = 0; i < N; ++i) {
    const double out = std::max(g[i + 1], 0.0) + std::max(-g[i], 0.0);
    if (out <= 0.0) continue;
    const double rate = s_over_s(x[i]) * out / wt[i];
    if (rate > 0.0) dt = std::min(dt, cfl / rate);
  }
  return dt;
}

// Explicit upwind transport of x along the face fluxes g = r^(n-1) grad(signal).
template <class SFun>
void transport(const RadialGrid& grid, const std::vector<double>& x, const std::vector<double>& g, double dt,
               SFun S, std::vector<double>& out) {
  const auto& wt = grid.weights();
  const int N = grid.cells();
  std::vector<double> q(N + 1, 0.0);
  for (int f = 1; f < N; ++f) {
    const double up = g[f] > 0.0 ? x[f - 1] : x[f];
    q[f] = -S(up) * g[f];
  }
  out.resize(N);
  for (int i = 0; i < N; ++i) out[i] = x[i] + dt * (q[i + 1] - q[i]) / wt[i];
}

// Implicit diffusion: (I + dt W^-1 A) x_new = rhs with face conductances a_f.
void implicit_diffusion(const RadialGrid& grid, const std::vector<double>& a, double dt, std::vector<double>& x) {
  const auto& wt = grid.weights();
  const int N = grid.cells();
  std::vector<double> lower(N, 0.0), diag(N, 1.0), upper(N, 0.0);
  for (int i = 0; i < N; ++i) {
    const double s = dt / wt[i];
    lower[i] = -s * a[i];
    upper[i] = -s * a[i + 1];
    diag[i] = 1.0 + s * (a[i] + a[i + 1]);
  }
  // Thomas algorithm; the matrix is an M-matrix with strict diagonal dominance.
  for (int i = 1; i < N; ++i) {
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    x[i] -= m * x[i - 1];
  }
  x[N - 1] /= diag[N - 1];
  for (int i = N - 2; i >= 0; --i) x[i] = (x[i] - upper[i] * x[i + 1]) / diag[i];
}

template <class DFun>
std::vector<double> conductances(const RadialGrid& grid, const std::vector<double>& x, DFun D) {
  const auto& c = grid.centers();
  const auto& area = grid.face_areas();
  const int N = grid.cells();
  std::vector<double> a(N + 1, 0.0);
  for (int f = 1; f < N; ++f) a[f] = area[f] * D(0.5 * (x[f - 1] + x[f])) / (c[f] - c[f - 1]);
  return a;
}

bool admissible(const std::vector<double>& x) {
  for (double v : x)
    if (!std::isfinite(v) || v < 0.0) return false;
  return true;
}

}  // namespace

double stable_dt(const RadialState& state, const SensitivityFamily& sens, const StepControl& ctrl) {
  const RadialGrid& grid = *state.grid;
  double dt = transport_limit(grid, state.u, state.v.face_flux, ctrl.cfl,
                              [&](double x) { return sens.S_over_s(std::max(x, 0.0)); });
  dt = std::min(dt, transport_limit(grid, state.w, state.z.face_flux, ctrl.cfl, [](double) { return 1.0; }));
  if (ctrl.diffusion_number > 0.0) {
    const double h = grid.min_width();
    double dmax = 1.0;
    for (double x : state.u) dmax = std::max(dmax, sens.D(x));
    dt = std::min(dt, ctrl.diffusion_number * h * h / dmax);
  }
  return dt;
}

RadialState step(const RadialState& state, const SensitivityFamily& sens, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("step: dt must be positive");
  const RadialGrid& grid = *state.grid;
  const SensitivityFamily lin = SensitivityFamily::linear();

  RadialState next;
  next.grid = state.grid;
  next.t = state.t + dt;
  transport(grid, state.u, state.v.face_flux, dt, [&](double x) { return sens.S(std::max(x, 0.0)); }, next.u);
  transport(grid, state.w, state.z.face_flux, dt, [&](double x) { return lin.S(std::max(x, 0.0)); }, next.w);
  if (!admissible(next.u) || !admissible(next.w)) throw NumericalError("step: transport produced a negative cell");

  implicit_diffusion(grid, conductances(grid, state.u, [&](double x) { return sens.D(std::max(x, 0.0)); }), dt,
                     next.u);
  implicit_diffusion(grid, conductances(grid, state.w, [](double) { return 1.0; }), dt, next.w);
  if (!admissible(next.u) || !admissible(next.w)) throw NumericalError("step: diffusion produced a negative cell");
  next.refresh();
  return next;
}

BlowupEstimate estimate_blowup_time(const std::vector<std::pair<double, double>>& t_umax,
                                    const std::vector<double>& sigmas) {
  BlowupEstimate best;
  const std::size_t m = t_umax.size();
  if (m < 3) return best;
  double tmean = 0.0;
  for (const auto& [t, u] : t_umax) tmean += t;
  tmean /= m;
  for (double sigma : sigmas) {
    if (!(sigma > 0.0)) continue;
    std::vector<double> y(m);
    double ymean = 0.0;
    bool ok = true;
    for (std::size_t k = 0; k < m; ++k) {
      if (!(t_umax[k].second > 0.0)) ok = false;
      y[k] = std::pow(t_umax[k].second, -sigma);
      ymean += y[k];
    }
    if (!ok) continue;
    ymean /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double dx = t_umax[k].first - tmean;
      sxx += dx * dx;
      sxy += dx * (y[k] - ymean);
    }
    if (!(sxx > 0.0)) continue;
    const double slope = sxy / sxx;
    if (!(slope < 0.0)) continue;
    double sq = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double fit = ymean + slope * (t_umax[k].first - tmean);
      sq += (y[k] - fit) * (y[k] - fit);
    }
    const double residual = std::sqrt(sq / m) / std::abs(ymean);
    const double tstar = tmean - ymean / slope;
    if (!best.valid || residual < best.residual) best = {true, tstar, sigma, residual};
  }
  return best;
}

RunReport advance(RadialState state, const SensitivityFamily& sens, const StepControl& ctrl, double horizon,
                  const StepObserver& observer) {
  ctrl.validate();
  if (!(horizon >= state.t) || !std::isfinite(horizon)) throw ValidationError("advance: horizon must be >= t");

  RunReport report;
  report.norm_exponents = ctrl.norm_exponents;
  std::optional<GFunction> G;
  if (ctrl.lyapunov && sens.kS() > 0.0) G.emplace(sens, ctrl.anchor);

  const double m0u = state.mass_u();
  const double m0w = state.mass_w();
  double prev_mu = m0u;
  double prev_mw = m0w;
  const double cap = ctrl.u_cap > 0.0 ? ctrl.u_cap : 1e6 * std::max(sup(state.u), sup(state.w));
  report.u_cap = cap;

  double F_prev = 0.0;
  auto make_record = [&](const RadialState& s, double dt) {
    RunRecord r;
    r.t = s.t;
    r.u_max = sup(s.u);
    r.w_max = sup(s.w);
    r.u_center = s.u.front();
    r.mass_u = s.mass_u();
    r.mass_w = s.mass_w();
    r.dt = dt;
    if (G) {
      const LyapunovSample ly = lyapunov_sample(s, sens, *G);
      r.F = ly.F;
      r.D_diss = ly.D_diss;
    }
    if (!ctrl.norm_exponents.empty()) {
      const auto rows = track_norms(s, ctrl.norm_exponents);
      for (const auto& row : rows) r.norms.push_back(row.u_integral);
      for (const auto& row : rows) r.norms.push_back(row.w_integral);
    }
    return r;
  };
  auto track_means = [&](const RadialState& s) {
    const double sv = sup(s.v.values);
    const double sz = sup(s.z.values);
    if (sv > 0.0) report.max_mean_v = std::max(report.max_mean_v, std::abs(mean_value(*s.grid, s.v.values)) / sv);
    if (sz > 0.0) report.max_mean_z = std::max(report.max_mean_z, std::abs(mean_value(*s.grid, s.z.values)) / sz);
  };

  report.records.push_back(make_record(state, 0.0));
  F_prev = report.records.back().F;
  track_means(state);
  if (observer) observer(state, &report.records.back());
  double last_record_t = state.t;

  std::deque<std::pair<double, double>> history;
  history.emplace_back(state.t, report.records.back().u_max);

  double dt_next = ctrl.dt_init;
  double dt_floor = ctrl.dt_min;
  double last_dt = 0.0;

  auto finish = [&](Verdict v, std::string msg) {
    report.verdict = v;
    report.message = std::move(msg);
    if (report.records.back().t != state.t) report.records.push_back(make_record(state, last_dt));
    if (v == Verdict::BLOWUP_DETECTED) {
      std::vector<std::pair<double, double>> pts(history.begin(), history.end());
      report.blowup = estimate_blowup_time(pts, ctrl.blowup_sigmas);
    }
    log::info("run finished: {} at t = {:.6g} after {} steps ({})", to_string(v), state.t, report.steps,
              report.message);
    return report;
  };

  while (state.t < horizon) {
    if (report.steps >= ctrl.max_steps) return finish(Verdict::STEP_COLLAPSE, "step budget exhausted");
    const double limit = std::min(stable_dt(state, sens, ctrl), ctrl.dt_max);
    double dt = dt_next > 0.0 ? std::min(dt_next, limit) : limit;
    if (dt_floor == 0.0) dt_floor = 1e-16 * dt;
    const double remaining = horizon - state.t;
    bool final_step = false;
    if (dt >= remaining) {
      dt = remaining;
      final_step = true;
    }
    if (dt < dt_floor && !final_step) return finish(Verdict::STEP_COLLAPSE, "time step fell below dt_min");

    const double su = std::max(sup(state.u), std::numeric_limits<double>::min());
    const double sw = std::max(sup(state.w), std::numeric_limits<double>::min());
    bool accepted = false;
    RadialState next;
    double rel = 0.0;
    for (int attempt = 0; attempt <= ctrl.max_retries; ++attempt) {
      try {
        next = step(state, sens, dt);
        rel = 0.0;
        for (std::size_t i = 0; i < state.u.size(); ++i) {
          rel = std::max(rel, std::abs(next.u[i] - state.u[i]) / su);
          rel = std::max(rel, std::abs(next.w[i] - state.w[i]) / sw);
        }
        if (rel <= 2.0 * ctrl.max_rel_change) {
          accepted = true;
          break;
        }
      } catch (const NumericalError&) {
      }
      ++report.rejected;
      dt *= 0.5;
      final_step = false;
    }
    if (!accepted) return finish(Verdict::STEP_COLLAPSE, "retries exhausted");

    if (final_step) next.t = horizon;
    state = std::move(next);
    last_dt = dt;
    ++report.steps;
    const double factor = rel > 0.0 ? std::clamp(0.9 * ctrl.max_rel_change / rel, 0.5, ctrl.growth) : ctrl.growth;
    dt_next = dt * factor;

    const double mu = state.mass_u();
    const double mw = state.mass_w();
    if (prev_mu > 0.0) report.max_step_drift = std::max(report.max_step_drift, std::abs(mu - prev_mu) / prev_mu);
    if (prev_mw > 0.0) report.max_step_drift = std::max(report.max_step_drift, std::abs(mw - prev_mw) / prev_mw);
    prev_mu = mu;
    prev_mw = mw;
    if (m0u > 0.0) report.max_mass_drift_u = std::max(report.max_mass_drift_u, std::abs(mu - m0u) / m0u);
    if (m0w > 0.0) report.max_mass_drift_w = std::max(report.max_mass_drift_w, std::abs(mw - m0w) / m0w);
    track_means(state);

    const double umax = sup(state.u);
    const double wmax = sup(state.w);
    history.emplace_back(state.t, umax);
    if (history.size() > 10) history.pop_front();

    const bool blowup = !(umax <= cap) || !(wmax <= cap);
    const bool due = ctrl.record_interval == 0.0 || state.t >= last_record_t + ctrl.record_interval ||
                     state.t >= horizon || blowup;
    double F_now = F_prev;
    const RunRecord* rec = nullptr;
    if (due) {
      report.records.push_back(make_record(state, dt));
      rec = &report.records.back();
      last_record_t = state.t;
      F_now = rec->F;
    } else if (G) {
      F_now = lyapunov_sample(state, sens, *G).F;
    }
    if (G) {
      ++report.F_checks;
      if (F_now > F_prev + 1e-6 * (1.0 + std::abs(F_prev))) ++report.F_violations;
      F_prev = F_now;
    }
    if (observer) observer(state, rec);
    if (blowup) return finish(Verdict::BLOWUP_DETECTED, "sup norm exceeded the blow-up cap");
  }
  return finish(Verdict::COMPLETED_HORIZON, "horizon reached");
}

std::vector<double> gaussian_profile(const RadialGrid& grid, double a, double rho, double b) {
  if (!(rho > 0.0)) throw ValidationError("initial: rho must be positive");
  if (!std::isfinite(a) || !std::isfinite(b)) throw ValidationError("initial: amplitude and offset must be finite");
  std::vector<double> out(grid.cells());
  for (int i = 0; i < grid.cells(); ++i) {
    const double x = grid.centers()[i] / rho;
    out[i] = std::max(0.0, a * std::exp(-x * x) + b);
  }
  return out;
}

std::vector<double> tabulated_profile(const RadialGrid& grid, const std::vector<double>& r,
                                      const std::vector<double>& values) {
  if (r.size() != values.size() || r.empty()) throw ValidationError("initial table: need matching non-empty columns");
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!std::isfinite(r[k]) || !std::isfinite(values[k])) throw ValidationError("initial table: non-finite entry");
    if (k > 0 && !(r[k] > r[k - 1])) throw ValidationError("initial table: r must be strictly increasing");
  }
  std::vector<double> out(grid.cells());
  for (int i = 0; i < grid.cells(); ++i) {
    const double x = grid.centers()[i];
    double val;
    if (x <= r.front()) {
      val = values.front();
    } else if (x >= r.back()) {
      val = values.back();
    } else {
      const auto it = std::upper_bound(r.begin(), r.end(), x);
      const std::size_t k = static_cast<std::size_t>(it - r.begin());
      const double th = (x - r[k - 1]) / (r[k] - r[k - 1]);
      val = (1.0 - th) * values[k - 1] + th * values[k];
    }
    out[i] = std::max(0.0, val);
  }
  return out;
}

}  // namespace chemoflow
