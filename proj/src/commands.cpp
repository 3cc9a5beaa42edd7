#include "chemoflow/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "chemoflow/log.hpp"
#include "chemoflow/mass_system.hpp"
#include "chemoflow/svg.hpp"

namespace chemoflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Extended-precision values outside double range are kept as strings.
json jreal(real x) {
  const long double a = std::fabs(x);
  if (std::isfinite(x) && (a == 0 || (a <= std::numeric_limits<double>::max() && a >= std::numeric_limits<double>::min())))
    return static_cast<double>(x);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.18Lg", x);
  return std::string(buf);
}

json jnum(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

fs::path prepare_out(const std::string& out_dir) {
  const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

json model_json(const ModelParams& m) {
  return {{"n", m.n}, {"R", m.R}, {"p", m.p}, {"q", m.q}, {"kD", m.kD}, {"kS", m.kS}};
}

json region_json(const RegionSummary& r) {
  return {{"samples", r.samples},
          {"worst_P", jnum(r.worst_P)},
          {"worst_P_at", {{"s", r.worst_P_s}, {"t", r.worst_P_t}}},
          {"worst_Q", jnum(r.worst_Q)},
          {"worst_Q_at", {{"s", r.worst_Q_s}, {"t", r.worst_Q_t}}},
          {"worst_estimate", jnum(r.worst_chain)},
          {"worst_gap", jnum(r.worst_gap)},
          {"argument_in_range", r.argument_ok},
          {"pass", r.pass}};
}

json params_json(const SubsolutionParams& P) {
  json j;
  j["exponents"] = {{"delta", P.exps.delta}, {"alpha", P.exps.alpha}, {"beta", P.exps.beta}};
  j["margins"] = {{"growth", jreal(P.margin_growth)}, {"diffusion", jreal(P.margin_diffusion)}};
  j["effective_kD"] = jreal(P.kD);
  j["effective_kS"] = jreal(P.kS);
  j["l"] = jreal(P.l);
  j["y_star"] = jreal(P.y_star);
  json yt = json::array();
  for (real v : P.y_star_terms) yt.push_back(jreal(v));
  j["y_star_terms"] = yt;
  j["c1"] = jreal(P.c1);
  j["c2"] = jreal(P.c2);
  j["c3"] = jreal(P.c3);
  j["c4"] = jreal(P.c4);
  json sb = json::array();
  for (real v : P.s_star_bounds) sb.push_back(jreal(v));
  j["s_star_bounds"] = sb;
  j["s_star"] = jreal(P.s_star);
  j["bracket"] = {jreal(P.bracket_lo), jreal(P.bracket_hi)};
  j["D_max"] = jreal(P.D_max);
  j["S_max"] = jreal(P.S_max);
  j["theta_star_P"] = jreal(P.theta_star_P);
  j["theta_star_Q"] = jreal(P.theta_star_Q);
  j["theta_star"] = jreal(P.theta_star);
  j["theta"] = jreal(P.theta);
  j["kappa"] = jreal(P.kappa);
  j["y0"] = jreal(P.y0);
  j["T"] = jreal(P.T);
  return j;
}

std::vector<double> gaussian_with_mean(const RadialGrid& grid, double a, double rho, double b,
                                       const std::optional<double>& mean) {
  if (!mean) return gaussian_profile(grid, a, rho, b);
  const double base = mean_value(grid, gaussian_profile(grid, 1.0, rho, 0.0));
  return gaussian_profile(grid, (*mean - b) / base, rho, b);
}

std::pair<std::vector<double>, std::vector<double>> read_table(const RunConfig& cfg, const RadialGrid& grid) {
  const fs::path path = fs::path(cfg.base_dir) / cfg.initial.table_path;
  std::ifstream in(path);
  if (!in) throw ValidationError("initial.path: cannot open " + path.string());
  std::vector<double> r, u, w;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    double a, b, c;
    if (!(is >> a >> b >> c)) {
      if (lineno == 1) continue;  // header
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected r,u,w");
    }
    r.push_back(a);
    u.push_back(b);
    w.push_back(c);
  }
  if (r.size() < 2) throw ValidationError(path.string() + ": need at least two rows");
  for (std::size_t k = 1; k < r.size(); ++k)
    if (!(r[k] > r[k - 1])) throw ValidationError(path.string() + ": r must be strictly increasing");
  return {tabulated_profile(grid, r, u), tabulated_profile(grid, r, w)};
}

}  // namespace

// ---- certification -------------------------------------------------------

CertifyResult run_certify(const CertifyRequest& req) {
  req.model.validate();
  check_blowup_hypotheses(req.model.n, req.model.p, req.model.q);
  const Exponents e = req.exponents ? *req.exponents : select_exponents(req.model, req.mu_star, req.mu_min);
  CertifyResult res;
  res.params = build_params(req.model, req.mu_star, req.mu_min, e);
  CertifyOptions opts;
  if (req.dense) opts.s_per_region *= 2;
  opts.workers = req.workers;
  res.certificate = certify(res.params, SensitivityFamily(req.model), opts);
  log::info("certificate {} ({} samples)", res.certificate.pass ? "PASS" : "FAIL", res.certificate.samples);
  return res;
}

std::string certificate_report(const CertifyRequest& req, const CertifyResult& res) {
  const Certificate& c = res.certificate;
  json j;
  j["model"] = model_json(req.model);
  j["means"] = {{"mu_star", req.mu_star}, {"mu_min", req.mu_min}};
  j["sampling"] = req.dense ? "dense" : "normal";
  j["params"] = params_json(res.params);
  j["verdict"] = c.pass ? "PASS" : "FAIL";
  j["failure"] = c.failure;
  j["tolerance"] = c.tol;
  j["samples"] = c.samples;
  j["regions"] = {{"INNER", region_json(c.inner)}, {"MIDDLE", region_json(c.middle)}, {"OUTER", region_json(c.outer)}};
  j["checks"] = {{"T_below_inverse_theta", c.T_below_inverse_theta},
                 {"boundary_values", c.boundary_ok},
                 {"middle_sandwich", c.sandwich_ok},
                 {"monotone_in_s", c.monotone_ok}};
  return j.dump(2) + "\n";
}

// ---- simulation ----------------------------------------------------------

std::pair<double, double> configured_means(const RunConfig& cfg) {
  const auto& d = cfg.initial;
  if (d.kind == InitialData::Kind::DOMINATING) return {d.mean_u.value_or(1.0), d.mean_w.value_or(1.0)};
  if (d.kind == InitialData::Kind::GAUSSIAN && d.mean_u && d.mean_w) return {*d.mean_u, *d.mean_w};
  const RadialGrid g = RadialGrid::uniform(cfg.model.n, cfg.model.R, cfg.grid.N);
  const auto [u, w] = make_initial_data(cfg, g, nullptr);
  return {mean_value(g, u), mean_value(g, w)};
}

SubsolutionParams subsolution_for(const RunConfig& cfg) {
  if (!cfg.subsolution) throw ValidationError("config has no subsolution block");
  const auto [mu, mw] = configured_means(cfg);
  const double mu_star = std::max(mu, mw), mu_min = std::min(mu, mw);
  const Exponents e =
      cfg.subsolution->auto_exponents ? select_exponents(cfg.model, mu_star, mu_min) : cfg.subsolution->exponents;
  return build_params(cfg.model, mu_star, mu_min, e);
}

RadialGrid make_grid(const RunConfig& cfg, const SubsolutionParams* prm) {
  const auto& g = cfg.grid;
  if (!g.graded) return RadialGrid::uniform(cfg.model.n, cfg.model.R, g.N);
  double r_min = g.r_min;
  if (r_min == 0.0) {
    if (prm == nullptr) throw ValidationError("grid.r_min = 0 (automatic) needs subsolution parameters");
    r_min = static_cast<double>(real(1e-3) * std::pow(prm->y0, -real(1) / prm->n));
    if (!(r_min > 0.0)) throw NumericalError("automatic r_min underflows double range");
  }
  return RadialGrid::graded(cfg.model.n, cfg.model.R, g.N, r_min, g.ratio);
}

std::pair<std::vector<double>, std::vector<double>> make_initial_data(const RunConfig& cfg, const RadialGrid& grid,
                                                                      const SubsolutionParams* prm) {
  const auto& d = cfg.initial;
  switch (d.kind) {
    case InitialData::Kind::GAUSSIAN:
      return {gaussian_with_mean(grid, d.a_u, d.rho_u, d.b_u, d.mean_u),
              gaussian_with_mean(grid, d.a_w, d.rho_w, d.b_w, d.mean_w)};
    case InitialData::Kind::TABLE:
      return read_table(cfg, grid);
    case InitialData::Kind::DOMINATING:
      if (prm == nullptr) throw ValidationError("dominating data need subsolution parameters");
      return dominating_profile(*prm, grid, d.lambda, d.mean_u.value_or(1.0), d.mean_w.value_or(1.0));
  }
  throw ValidationError("unknown initial data kind");
}

SimulationResult run_simulation(const RunConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  SimulationResult res;
  const bool needs_prm = cfg.initial.kind == InitialData::Kind::DOMINATING || (cfg.grid.graded && cfg.grid.r_min == 0.0);
  if (needs_prm) res.params = subsolution_for(cfg);
  const SubsolutionParams* prm = res.params ? &*res.params : nullptr;
  res.grid = std::make_shared<RadialGrid>(make_grid(cfg, prm));
  auto [u, w] = make_initial_data(cfg, *res.grid, prm);
  RadialState state = RadialState::from_densities(*res.grid, std::move(u), std::move(w));
  res.report = advance(std::move(state), SensitivityFamily(cfg.model), cfg.step, cfg.horizon, observer);
  return res;
}

std::string run_csv(const RunReport& report) {
  std::string out = "t,u_max,w_max,mass_u,mass_w,dt,F,D_diss";
  for (double k : report.norm_exponents) out += fmt::format(",int_1pu_{:g}", k);
  for (double k : report.norm_exponents) out += fmt::format(",int_w_{:g}", k);
  out += "\n";
  for (const auto& r : report.records) {
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", r.t, r.u_max, r.w_max,
                       r.mass_u, r.mass_w, r.dt, r.F, r.D_diss);
    for (double v : r.norms) out += fmt::format(",{:.17g}", v);
    out += "\n";
  }
  return out;
}

std::string summary_report(const RunConfig& cfg, const SimulationResult& res) {
  const RunReport& rep = res.report;
  json j;
  j["model"] = model_json(cfg.model);
  j["regime"] = std::string(to_string(classify_regime(cfg.model.n, cfg.model.p, cfg.model.q).tag));
  j["grid"] = {{"cells", res.grid->cells()}, {"graded", cfg.grid.graded}, {"min_width", res.grid->min_width()}};
  j["horizon"] = cfg.horizon;
  j["verdict"] = std::string(to_string(rep.verdict));
  j["message"] = rep.message;
  j["steps"] = rep.steps;
  j["rejected_steps"] = rep.rejected;
  j["final_time"] = rep.records.back().t;
  j["final_u_max"] = rep.records.back().u_max;
  j["final_w_max"] = rep.records.back().w_max;
  j["u_cap"] = rep.u_cap;
  j["blowup_estimate"] = {{"valid", rep.blowup.valid},
                          {"time", rep.blowup.time},
                          {"sigma", rep.blowup.sigma},
                          {"fit_residual", rep.blowup.residual}};
  j["conservation"] = {{"max_mass_drift_u", rep.max_mass_drift_u},
                       {"max_mass_drift_w", rep.max_mass_drift_w},
                       {"max_step_drift", rep.max_step_drift},
                       {"max_mean_v", rep.max_mean_v},
                       {"max_mean_z", rep.max_mean_z}};
  j["lyapunov"] = {{"enabled", cfg.step.lyapunov}, {"checks", rep.F_checks}, {"violations", rep.F_violations}};
  if (res.params) j["subsolution"] = params_json(*res.params);
  return j.dump(2) + "\n";
}

// ---- comparison ----------------------------------------------------------

CompareResult run_compare(const RunConfig& cfg) {
  cfg.validate();
  if (!cfg.subsolution) throw ValidationError("compare needs a subsolution block");
  CompareResult res;
  const auto [mu, mw] = configured_means(cfg);
  CertifyRequest req;
  req.model = cfg.model;
  req.mu_star = std::max(mu, mw);
  req.mu_min = std::min(mu, mw);
  req.dense = cfg.subsolution->dense;
  req.workers = cfg.subsolution->workers;
  if (!cfg.subsolution->auto_exponents) req.exponents = cfg.subsolution->exponents;
  res.cert = run_certify(req);
  if (!res.cert.certificate.pass)
    throw NumericalError("certification failed, comparison not run: " + res.cert.certificate.failure);
  const SubsolutionParams& prm = res.cert.params;

  const RadialGrid grid = make_grid(cfg, &prm);
  auto [u, w] = make_initial_data(cfg, grid, &prm);
  const auto [tm_u, tm_w] = threshold_margins(prm, grid, u, w);
  res.threshold_margin_U = tm_u;
  res.threshold_margin_W = tm_w;
  if (tm_u < 0.0 || tm_w < 0.0) {
    // Locate the first face where the ball mass falls short.
    const auto& faces = grid.faces();
    const auto& wt = grid.weights();
    const double omega = unit_sphere_area(cfg.model.n);
    double mu_ball = 0.0, mw_ball = 0.0;
    for (int i = 0; i < grid.cells(); ++i) {
      mu_ball += omega * wt[i] * u[i];
      mw_ball += omega * wt[i] * w[i];
      const auto [M1, M2] = initial_thresholds(prm, faces[i + 1]);
      if (mu_ball < M1 || mw_ball < M2) {
        const bool first = mu_ball < M1;
        throw PreconditionError(fmt::format("initial data below the {} threshold at r = {:.6g} (mass {:.6g} < {:.6g})",
                                            first ? "M1" : "M2", faces[i + 1], first ? mu_ball : mw_ball,
                                            first ? M1 : M2));
      }
    }
    throw PreconditionError("initial data below the mass thresholds");
  }

  const MassGrid mgrid = cfg.grid.J > 0 ? MassGrid::graded(cfg.model.n, cfg.model.R, cfg.grid.J) : MassGrid::from_radial(grid);
  res.mass_nodes = static_cast<int>(mgrid.nodes().size());
  res.scale = req.mu_min * std::pow(cfg.model.R, cfg.model.n) / cfg.model.n;
  const real Rn = prm.Rn();
  res.min_margin_U = res.min_margin_W = std::numeric_limits<double>::infinity();
  res.min_floor_ratio_u = res.min_floor_ratio_w = std::numeric_limits<double>::infinity();

  auto observe = [&](const RadialState& s, const RunRecord*) {
    if (!(s.t < static_cast<double>(prm.T))) return;
    const MassState ms = to_mass(s, mgrid, req.mu_star, req.mu_min);
    const auto& nodes = mgrid.nodes();
    CompareSample cs;
    cs.t = s.t;
    cs.margin_U = cs.margin_W = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const SubsolutionEval ev = eval_subsolution(prm, std::min(static_cast<real>(nodes[j]), Rn), s.t);
      cs.margin_U = std::min(cs.margin_U, static_cast<double>(ms.U[j] - ev.U()));
      cs.margin_W = std::min(cs.margin_W, static_cast<double>(ms.W[j] - ev.W()));
    }
    const auto [fu, fw] = predicted_central_lower_bound(prm, s.t);
    cs.u_center = s.u.front();
    cs.w_center = s.w.front();
    cs.u_floor = fu;
    cs.w_floor = fw;
    res.min_margin_U = std::min(res.min_margin_U, cs.margin_U);
    res.min_margin_W = std::min(res.min_margin_W, cs.margin_W);
    res.min_floor_ratio_u = std::min(res.min_floor_ratio_u, cs.u_center / fu);
    res.min_floor_ratio_w = std::min(res.min_floor_ratio_w, cs.w_center / fw);
    res.samples.push_back(cs);
  };

  StepControl ctrl = cfg.step;
  const double sigma_sub = 1.0 - prm.exps.alpha;
  if (std::find(ctrl.blowup_sigmas.begin(), ctrl.blowup_sigmas.end(), sigma_sub) == ctrl.blowup_sigmas.end())
    ctrl.blowup_sigmas.insert(ctrl.blowup_sigmas.begin(), sigma_sub);
  RadialState state = RadialState::from_densities(grid, std::move(u), std::move(w));
  res.report = advance(std::move(state), SensitivityFamily(cfg.model), ctrl, cfg.horizon, observe);

  const double tol = 1e-4 * res.scale;
  res.ordering_pass = !res.samples.empty() && res.min_margin_U >= -tol && res.min_margin_W >= -tol;
  res.floor_pass = !res.samples.empty() && res.min_floor_ratio_u >= 1.0;
  return res;
}

std::string compare_report(const RunConfig& cfg, const CompareResult& res) {
  json j;
  j["model"] = model_json(cfg.model);
  j["params"] = params_json(res.cert.params);
  j["certificate"] = {{"verdict", res.cert.certificate.pass ? "PASS" : "FAIL"}, {"samples", res.cert.certificate.samples}};
  j["thresholds"] = {{"min_margin_M1", res.threshold_margin_U}, {"min_margin_M2", res.threshold_margin_W}};
  j["run"] = {{"verdict", std::string(to_string(res.report.verdict))},
              {"message", res.report.message},
              {"steps", res.report.steps},
              {"final_time", res.report.records.back().t},
              {"blowup_estimate",
               {{"valid", res.report.blowup.valid},
                {"time", res.report.blowup.time},
                {"sigma", res.report.blowup.sigma},
                {"fit_residual", res.report.blowup.residual}}}};
  j["ordering"] = {{"mass_nodes", res.mass_nodes},
                   {"samples", res.samples.size()},
                   {"scale", res.scale},
                   {"tolerance", 1e-4 * res.scale},
                   {"min_margin_U", jnum(res.min_margin_U)},
                   {"min_margin_W", jnum(res.min_margin_W)},
                   {"pass", res.ordering_pass}};
  j["central_floor"] = {{"min_ratio_u", jnum(res.min_floor_ratio_u)},
                        {"min_ratio_w", jnum(res.min_floor_ratio_w)},
                        {"pass", res.floor_pass}};
  json curve = json::array();
  for (const auto& s : res.samples)
    curve.push_back({{"t", s.t}, {"u_center", s.u_center}, {"u_floor", s.u_floor}, {"w_center", s.w_center},
                     {"w_floor", s.w_floor}, {"margin_U", s.margin_U}, {"margin_W", s.margin_W}});
  j["central_density_curve"] = curve;
  return j.dump(2) + "\n";
}

// ---- phase map -----------------------------------------------------------

const char* to_string(Empirical e) {
  switch (e) {
    case Empirical::BLOWUP: return "BLOWUP";
    case Empirical::BOUNDED: return "BOUNDED";
    case Empirical::INCONCLUSIVE: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

Empirical empirical_verdict(const RunReport& report, double plateau_tol, double growth_tol) {
  if (report.verdict == Verdict::BLOWUP_DETECTED) return Empirical::BLOWUP;
  if (report.verdict != Verdict::COMPLETED_HORIZON || report.records.size() < 8) return Empirical::INCONCLUSIVE;
  const auto& rec = report.records;
  const double t0 = rec.front().t, t1 = rec.back().t;
  const double split = t0 + 0.75 * (t1 - t0);
  double early = 0.0, late = 0.0, peak = 0.0;
  std::vector<double> tail;
  for (const auto& r : rec) {
    peak = std::max(peak, r.u_max);
    if (r.t < split) {
      early = std::max(early, r.u_max);
    } else {
      late = std::max(late, r.u_max);
      tail.push_back(r.u_max);
    }
  }
  if (tail.size() < 2 || early == 0.0) return Empirical::INCONCLUSIVE;
  if (late > (1.0 + plateau_tol) * early) return Empirical::INCONCLUSIVE;
  if (rec.back().u_max > 2.0 * peak) return Empirical::INCONCLUSIVE;
  const bool monotone = std::is_sorted(tail.begin(), tail.end());
  if (monotone && tail.back() > (1.0 + growth_tol) * tail.front()) return Empirical::INCONCLUSIVE;
  return Empirical::BOUNDED;
}

std::string agreement(Regime theory, Empirical empirical) {
  if (theory == Regime::UNCLASSIFIED || empirical == Empirical::INCONCLUSIVE) return "N/A";
  const bool blowup = empirical == Empirical::BLOWUP;
  return (theory == Regime::FTBU) == blowup ? "yes" : "no";
}

namespace {

PhasePoint run_point(const PhaseMapSpec& spec, std::size_t index, const std::string& out_dir) {
  PhasePoint pt;
  pt.p = spec.points[index].first;
  pt.q = spec.points[index].second;
  pt.theory = classify_regime(spec.n, pt.p, pt.q);
  try {
    RunConfig cfg = spec.run;
    cfg.model.n = spec.n;
    cfg.model.p = pt.p;
    cfg.model.q = pt.q;
    if (!cfg.norm_exponents_given) cfg.step.norm_exponents = default_norm_exponents(cfg.model);
    if (pt.theory.tag == Regime::FTBU) {
      // Concentrated data meeting the mass thresholds when the certificate holds.
      RunConfig trial = cfg;
      trial.subsolution = SubsolutionSpec{};
      trial.initial.kind = InitialData::Kind::DOMINATING;
      trial.initial.lambda = spec.blowup_lambda;
      trial.initial.mean_u = cfg.initial.mean_u.value_or(1.0);
      trial.initial.mean_w = cfg.initial.mean_w.value_or(1.0);
      trial.grid.graded = true;
      trial.grid.N = spec.blowup_core_cells;
      trial.grid.ratio = spec.blowup_ratio;
      trial.grid.r_min = 0.0;
      try {
        CertifyRequest req;
        req.model = trial.model;
        req.mu_star = std::max(*trial.initial.mean_u, *trial.initial.mean_w);
        req.mu_min = std::min(*trial.initial.mean_u, *trial.initial.mean_w);
        pt.certified = run_certify(req).certificate.pass;
      } catch (const Error& e) {
        log::warn("point ({}, {}): certification unavailable: {}", pt.p, pt.q, e.what());
      }
      if (pt.certified) cfg = trial;
    }
    pt.data = cfg.initial.kind == InitialData::Kind::DOMINATING ? "dominating" : "gaussian";
    const SimulationResult sim = run_simulation(cfg);
    pt.run_verdict = sim.report.verdict;
    pt.final_time = sim.report.records.back().t;
    for (const auto& r : sim.report.records) pt.peak = std::max(pt.peak, r.u_max);
    pt.empirical = empirical_verdict(sim.report, spec.plateau_tolerance, spec.growth_tolerance);
    if (!out_dir.empty()) {
      const fs::path dir = fs::path(out_dir) / fmt::format("point_{:02d}", index);
      fs::create_directories(dir);
      write_text(dir / "run.csv", run_csv(sim.report));
      write_text(dir / "summary.json", summary_report(cfg, sim));
    }
  } catch (const std::exception& e) {
    pt.error = e.what();
    pt.empirical = Empirical::INCONCLUSIVE;
    log::warn("point ({}, {}) failed: {}", pt.p, pt.q, e.what());
  }
  pt.agreement = agreement(pt.theory.tag, pt.empirical);
  log::info("point ({}, {}): {} vs {} -> {}", pt.p, pt.q, to_string(pt.theory.tag), to_string(pt.empirical),
            pt.agreement);
  return pt;
}

}  // namespace

std::vector<PhasePoint> run_phase_map(const PhaseMapSpec& spec, int workers, const std::string& out_dir) {
  spec.validate();
  std::vector<PhasePoint> out(spec.points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < out.size(); k = next++) out[k] = run_point(spec, k, out_dir);
  };
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(out.size())));
  if (count == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < count; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return out;
}

std::string phase_map_csv(const std::vector<PhasePoint>& points) {
  std::string out = "p,q,theoretical,empirical,agreement\n";
  for (const auto& pt : points)
    out += fmt::format("{:g},{:g},{},{},{}\n", pt.p, pt.q, to_string(pt.theory.tag), to_string(pt.empirical),
                       pt.agreement);
  return out;
}

// ---- command entry points --------------------------------------------------

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  const std::string out = out_dir.empty() ? cfg.out_dir : out_dir;
  SimulationResult res;
  try {
    res = run_simulation(cfg);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  const fs::path dir = prepare_out(out);
  write_text(dir / "run.csv", run_csv(res.report));
  write_text(dir / "summary.json", summary_report(cfg, res));
  if (cfg.plots) {
    PlotSeries su{"sup u", {}, {}}, sw{"sup w", {}, {}}, sf{"F", {}, {}};
    for (const auto& r : res.report.records) {
      su.x.push_back(r.t);
      su.y.push_back(r.u_max);
      sw.x.push_back(r.t);
      sw.y.push_back(r.w_max);
      sf.x.push_back(r.t);
      sf.y.push_back(r.F);
    }
    write_line_plot((dir / "sup_norm.svg").string(), "sup norms", "t", "sup", {su, sw}, true);
    if (cfg.step.lyapunov) write_line_plot((dir / "lyapunov.svg").string(), "Lyapunov functional", "t", "F", {sf});
  }
  std::cout << "verdict " << to_string(res.report.verdict) << " at t = " << res.report.records.back().t << "\n";
  if (res.report.verdict == Verdict::STEP_COLLAPSE) {
    std::cerr << "solver collapse: " << res.report.message << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_certify(const CertifyRequest& req, bool expect_fail, const std::string& out_dir) {
  CertifyResult res;
  try {
    res = run_certify(req);
  } catch (const ValidationError& e) {
    if (expect_fail) {
      std::cout << "expected failure: " << e.what() << "\n";
      return kExitOk;
    }
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    if (expect_fail) {
      std::cout << "expected failure: " << e.what() << "\n";
      return kExitOk;
    }
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  const std::string report = certificate_report(req, res);
  if (!out_dir.empty()) write_text(prepare_out(out_dir) / "certificate.json", report);
  std::cout << report;
  const bool pass = res.certificate.pass;
  if (!pass) std::cerr << "certificate FAIL: " << res.certificate.failure << "\n";
  if (expect_fail) return pass ? kExitRuntime : kExitOk;
  return pass ? kExitOk : kExitRuntime;
}

int cmd_phase_map(const std::string& spec_path, const std::string& out_dir, int workers) {
  PhaseMapSpec spec;
  try {
    spec = load_phase_map_spec(spec_path);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  const fs::path dir = prepare_out(out_dir);
  const auto points = run_phase_map(spec, workers > 0 ? workers : spec.workers, dir.string());
  write_text(dir / "phase_map.csv", phase_map_csv(points));
  json j = json::array();
  for (const auto& pt : points)
    j.push_back({{"p", pt.p},
                 {"q", pt.q},
                 {"theoretical", std::string(to_string(pt.theory.tag))},
                 {"boundedness_margin", pt.theory.boundedness_margin},
                 {"existence_margin", pt.theory.existence_margin},
                 {"certified", pt.certified},
                 {"data", pt.data},
                 {"run_verdict", std::string(to_string(pt.run_verdict))},
                 {"final_time", pt.final_time},
                 {"peak_u", pt.peak},
                 {"empirical", to_string(pt.empirical)},
                 {"agreement", pt.agreement},
                 {"error", pt.error}});
  write_text(dir / "phase_map.json", j.dump(2) + "\n");
  std::cout << phase_map_csv(points);
  return kExitOk;
}

int cmd_compare(const std::string& config_path, const std::string& out_dir) {
  RunConfig cfg;
  CompareResult res;
  try {
    cfg = load_run_config(config_path);
    res = run_compare(cfg);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  const fs::path dir = prepare_out(out_dir.empty() ? cfg.out_dir : out_dir);
  write_text(dir / "compare.json", compare_report(cfg, res));
  write_text(dir / "run.csv", run_csv(res.report));
  std::string csv = "t,margin_U,margin_W,u_center,u_floor,w_center,w_floor\n";
  for (const auto& s : res.samples)
    csv += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.t, s.margin_U, s.margin_W,
                       s.u_center, s.u_floor, s.w_center, s.w_floor);
  write_text(dir / "compare.csv", csv);
  if (cfg.plots) {
    PlotSeries sim{"u(0,t) simulated", {}, {}}, floor{"predicted floor", {}, {}};
    for (const auto& s : res.samples) {
      sim.x.push_back(s.t);
      sim.y.push_back(s.u_center);
      floor.x.push_back(s.t);
      floor.y.push_back(s.u_floor);
    }
    write_line_plot((dir / "central_density.svg").string(), "central density vs floor", "t", "u(0,t)", {sim, floor},
                    true);
  }
  std::cout << "run " << to_string(res.report.verdict) << ", ordering " << (res.ordering_pass ? "PASS" : "FAIL")
            << " (min margins " << res.min_margin_U << ", " << res.min_margin_W << "), central floor "
            << (res.floor_pass ? "PASS" : "FAIL") << "\n";
  return res.ordering_pass && res.floor_pass ? kExitOk : kExitRuntime;
}

}  // namespace chemoflow
