#pragma once

#include <vector>

#include "chemoflow/elliptic.hpp"

namespace chemoflow {

/// The four radial fields at one time. v solves the w-driven signal equation
/// and z the u-driven one; refresh() recomputes both from (u, w).
struct RadialState {
  const RadialGrid* grid = nullptr;
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> w;
  SignalSolution v;
  SignalSolution z;
  double mu_u = 0.0;
  double mu_w = 0.0;

  /// Builds a state from densities and solves both signal equations.
  static RadialState from_densities(const RadialGrid& grid, std::vector<double> u, std::vector<double> w,
                                    double t = 0.0);

  void refresh();

  /// omega_n * sum(weights * u).
  double mass_u() const;
  double mass_w() const;
};

}  // namespace chemoflow
