#pragma once

#include <vector>

#include "chemoflow/mass_system.hpp"
#include "chemoflow/model.hpp"

namespace chemoflow {

/// Settings for the explicit integrator of the transformed system on a
/// uniform s-grid. Boundary rows are pinned to the initial end values.
struct MiniConfig {
  int J = 32;              ///< intervals, at most 128
  double dt = 0.0;         ///< fixed step; 0 picks half the stability limit of the initial pair
  double horizon = 1e-3;
  double mu_star = 1.0;    ///< the constant in both operators
  int snapshot_every = 0;  ///< 0: keep only the initial and final states

  void validate() const;
};

struct MiniPair {
  std::vector<double> U;
  std::vector<double> W;
};

struct MiniTrajectory {
  std::vector<double> s;
  std::vector<double> times;
  std::vector<MiniPair> states;
  double dt = 0.0;
  long steps = 0;
};

/// Largest stable explicit step for `pair`: every update must be a
/// nondecreasing function of the previous node values, which makes the
/// scheme order preserving.
double mini_stability_limit(const std::vector<double>& s, const MiniPair& pair, const SensitivityFamily& sens,
                            int n, double mu_star);

/// Explicit Euler with monotone differences: Kirchhoff form for the nonlinear
/// diffusion and an increasing/decreasing split of S for the first-order
/// term, upwinded by the sign of its coefficient. Throws NumericalError if
/// the fixed step exceeds the stability limit at any step or a profile
/// loses monotonicity in s.
MiniTrajectory mini_advance(const MiniPair& initial, const MiniConfig& cfg, const SensitivityFamily& sens, int n,
                            double R);

/// Several pairs advanced in lockstep with one shared dt (the minimum of the
/// per-pair defaults when cfg.dt is 0), so that ordering comparisons are
/// made at identical times.
std::vector<MiniTrajectory> mini_advance_all(const std::vector<MiniPair>& initial, const MiniConfig& cfg,
                                             const SensitivityFamily& sens, int n, double R);

}  // namespace chemoflow
