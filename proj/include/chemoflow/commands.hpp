#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chemoflow/config.hpp"
#include "chemoflow/dynamics.hpp"
#include "chemoflow/subsolution.hpp"

namespace chemoflow {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

// ---- certification -------------------------------------------------------

struct CertifyRequest {
  ModelParams model;
  double mu_star = 1.0;
  double mu_min = 1.0;
  bool dense = false;
  int workers = 1;
  std::optional<Exponents> exponents;  ///< empty: select_exponents
};

struct CertifyResult {
  SubsolutionParams params;
  Certificate certificate;
};

/// select_exponents -> build_params -> certify. Throws HypothesisError for
/// inadmissible (p, q) and NumericalError when the parameters degenerate.
CertifyResult run_certify(const CertifyRequest& req);

/// Certificate report as pretty-printed JSON (deterministic).
std::string certificate_report(const CertifyRequest& req, const CertifyResult& res);

// ---- simulation ----------------------------------------------------------

/// Mean densities the subsolution is built for: the configured means when
/// present, otherwise those of the data on a uniform grid of N cells.
std::pair<double, double> configured_means(const RunConfig& cfg);

/// Subsolution parameters for a config with a subsolution block.
SubsolutionParams subsolution_for(const RunConfig& cfg);

RadialGrid make_grid(const RunConfig& cfg, const SubsolutionParams* prm);
std::pair<std::vector<double>, std::vector<double>> make_initial_data(const RunConfig& cfg, const RadialGrid& grid,
                                                                      const SubsolutionParams* prm);

struct SimulationResult {
  std::shared_ptr<RadialGrid> grid;
  std::optional<SubsolutionParams> params;
  RunReport report;
};

SimulationResult run_simulation(const RunConfig& cfg, const StepObserver& observer = {});

/// Run CSV: t,u_max,w_max,mass_u,mass_w,dt,F,D_diss then one column per
/// tracked integral, values printed with 17 significant digits.
std::string run_csv(const RunReport& report);
std::string summary_report(const RunConfig& cfg, const SimulationResult& res);

// ---- comparison ----------------------------------------------------------

struct CompareSample {
  double t = 0.0;
  double margin_U = 0.0;  ///< min over nodes of U - U_sub
  double margin_W = 0.0;
  double u_center = 0.0;
  double u_floor = 0.0;
  double w_center = 0.0;
  double w_floor = 0.0;
};

struct CompareResult {
  CertifyResult cert;
  RunReport report;
  double threshold_margin_U = 0.0;
  double threshold_margin_W = 0.0;
  std::vector<CompareSample> samples;
  double scale = 0.0;  ///< mu_min R^n / n
  double min_margin_U = 0.0;
  double min_margin_W = 0.0;
  double min_floor_ratio_u = 0.0;  ///< min of u(0,t) / floor
  double min_floor_ratio_w = 0.0;
  bool ordering_pass = false;  ///< margins >= -1e-4 scale
  bool floor_pass = false;
  int mass_nodes = 0;
};

/// Thrown by run_compare when the initial data do not dominate the
/// thresholds; a validation failure.
struct PreconditionError : ValidationError {
  using ValidationError::ValidationError;
};

/// Certifies, checks the thresholds, runs the simulation and compares the
/// mass functions against the subsolution after every accepted step.
/// Throws NumericalError when certification fails.
CompareResult run_compare(const RunConfig& cfg);
std::string compare_report(const RunConfig& cfg, const CompareResult& res);

// ---- phase map -----------------------------------------------------------

enum class Empirical { BLOWUP, BOUNDED, INCONCLUSIVE };
const char* to_string(Empirical e);

/// BLOWUP for BLOWUP_DETECTED; BOUNDED for a completed run whose last
/// quarter stays within (1 + plateau_tol) of the earlier maximum, whose
/// final value is at most twice the peak, and which does not grow
/// monotonically by more than growth_tol (relative) over the last quarter;
/// INCONCLUSIVE otherwise.
Empirical empirical_verdict(const RunReport& report, double plateau_tol, double growth_tol);

/// "yes", "no" or "N/A" (unclassified or inconclusive).
std::string agreement(Regime theory, Empirical empirical);

struct PhasePoint {
  double p = 0.0, q = 0.0;
  RegimeVerdict theory{};
  bool certified = false;
  std::string data;  ///< "dominating" or "gaussian"
  Verdict run_verdict = Verdict::COMPLETED_HORIZON;
  double final_time = 0.0;
  double peak = 0.0;
  Empirical empirical = Empirical::INCONCLUSIVE;
  std::string agreement;
  std::string error;
};

/// Runs every lattice point on a pool of `workers` threads. When out_dir is
/// non-empty each point writes point_<k>/run.csv and summary.json.
std::vector<PhasePoint> run_phase_map(const PhaseMapSpec& spec, int workers, const std::string& out_dir = "");
std::string phase_map_csv(const std::vector<PhasePoint>& points);

// ---- command entry points (return the process exit code) -------------------

int cmd_simulate(const std::string& config_path, const std::string& out_dir);
int cmd_certify(const CertifyRequest& req, bool expect_fail, const std::string& out_dir);
int cmd_phase_map(const std::string& spec_path, const std::string& out_dir, int workers);
int cmd_compare(const std::string& config_path, const std::string& out_dir);

}  // namespace chemoflow
