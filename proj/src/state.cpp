#include "chemoflow/state.hpp"

#include <cmath>

#include "chemoflow/model.hpp"

namespace chemoflow {

RadialState RadialState::from_densities(const RadialGrid& grid, std::vector<double> u, std::vector<double> w,
                                        double t) {
  if (static_cast<int>(u.size()) != grid.cells() || static_cast<int>(w.size()) != grid.cells())
    throw ValidationError("state: density size does not match grid");
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(w[i])) throw ValidationError("state: non-finite density");
    if (u[i] < 0.0 || w[i] < 0.0) throw ValidationError("state: densities must be nonnegative");
  }
  RadialState s;
  s.grid = &grid;
  s.t = t;
  s.u = std::move(u);
  s.w = std::move(w);
  s.refresh();
  return s;
}

void RadialState::refresh() {
  mu_u = mean_value(*grid, u);
  mu_w = mean_value(*grid, w);
  v = solve_signal(*grid, w);
  z = solve_signal(*grid, u);
}

namespace {
double weighted_sum(const RadialGrid& grid, const std::vector<double>& f) {
  const auto& w = grid.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * f[i];
  return acc;
}
}  // namespace

double RadialState::mass_u() const { return unit_sphere_area(grid->dim()) * weighted_sum(*grid, u); }
double RadialState::mass_w() const { return unit_sphere_area(grid->dim()) * weighted_sum(*grid, w); }

}  // namespace chemoflow
