#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chemoflow/dynamics.hpp"
#include "chemoflow/model.hpp"
#include "chemoflow/subsolution.hpp"

namespace chemoflow {

/// Initial densities. GAUSSIAN: a exp(-(r/rho)^2) + b per species; when a
/// mean is given the amplitude is solved for so the discrete mean matches.
/// TABLE: CSV file with columns r,u,w. DOMINATING: profiles whose mass
/// functions are lambda times the subsolution at t = 0 plus a linear term
/// (needs a subsolution block).
struct InitialData {
  enum class Kind { GAUSSIAN, TABLE, DOMINATING };
  Kind kind = Kind::GAUSSIAN;
  double a_u = 1.0, a_w = 1.0;
  double rho_u = 0.1, rho_w = 0.1;
  double b_u = 0.0, b_w = 0.0;
  std::optional<double> mean_u, mean_w;
  std::string table_path;  ///< resolved against the config file's directory
  double lambda = 1.5;
};

/// Radial grid. Uniform with N cells, or graded toward the origin with N
/// core cells after the geometric part. r_min = 0 on a graded grid asks for
/// 1e-3 y0^(-1/n), which needs a subsolution block.
struct GridSpec {
  int N = 512;
  int J = 0;  ///< mass nodes for comparisons; 0 uses the radial faces
  bool graded = false;
  double r_min = 0.0;
  double ratio = 1.05;
};

struct SubsolutionSpec {
  bool auto_exponents = true;
  Exponents exponents;
  bool dense = false;
  int workers = 1;
};

struct RunConfig {
  ModelParams model;
  InitialData initial;
  GridSpec grid;
  StepControl step;
  double horizon = 1.0;
  bool norm_exponents_given = false;  ///< false: defaults derived from (p, q)
  bool plots = true;
  std::string out_dir;  ///< optional; --out takes precedence
  std::optional<SubsolutionSpec> subsolution;
  std::string base_dir;  ///< directory of the config file

  /// Cross-field checks (N >= 32, horizon > 0, table file present, ...).
  void validate() const;
};

/// Throws ValidationError with "<file>:<line>:<col>" for malformed JSON and
/// the dotted field path for bad or unknown fields.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::string& base_dir = ".",
                           const std::string& origin = "<config>");

/// A sweep over (p, q) at fixed n. Points come from a rectangular lattice
/// (inclusive ranges with steps) or an explicit list.
struct PhaseMapSpec {
  int n = 3;
  std::vector<std::pair<double, double>> points;
  RunConfig run;  ///< per-point template, p and q overwritten
  double blowup_lambda = 1.5;  ///< scale of dominating data at certified FTBU points
  int blowup_core_cells = 512;
  double blowup_ratio = 1.05;
  double plateau_tolerance = 0.05;
  double growth_tolerance = 1e-3;
  int workers = 1;

  void validate() const;
};

PhaseMapSpec load_phase_map_spec(const std::string& path);
PhaseMapSpec parse_phase_map_spec(const std::string& text, const std::string& base_dir = ".",
                                  const std::string& origin = "<spec>");

}  // namespace chemoflow
