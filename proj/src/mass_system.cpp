#include "chemoflow/mass_system.hpp"

#include <algorithm>
#include <cmath>

namespace chemoflow {

MassGrid::MassGrid(int n, double R, std::vector<double> s) : n_(n), R_(R), s_(std::move(s)) {
  if (s_.size() < 3) throw ValidationError("mass grid: need at least two intervals");
  if (s_.front() != 0.0) throw ValidationError("mass grid: first node must be 0");
  for (std::size_t j = 1; j < s_.size(); ++j)
    if (!(s_[j] > s_[j - 1])) throw ValidationError("mass grid: nodes must be strictly increasing");
}

MassGrid MassGrid::graded(int n, double R, int J, double ratio, double first_step) {
  if (J < 2) throw ValidationError("mass grid: J must be >= 2");
  if (!(ratio > 1.0)) throw ValidationError("mass grid: ratio must exceed 1");
  const double Rn = std::pow(R, n);
  std::vector<double> s{0.0};
  if (first_step <= 0.0) {
    const double h0 = Rn * (ratio - 1.0) / (std::pow(ratio, J) - 1.0);
    double h = h0;
    for (int j = 1; j < J; ++j) {
      s.push_back(s.back() + h);
      h *= ratio;
    }
    s.push_back(Rn);
    return MassGrid(n, R, std::move(s));
  }
  const double cap = Rn / J;
  double h = first_step;
  while (h < cap && s.back() + h < Rn) {
    s.push_back(s.back() + h);
    h *= ratio;
  }
  const double rest = Rn - s.back();
  const int m = std::max(1, static_cast<int>(std::ceil(rest / cap - 1e-9)));
  const double start = s.back();
  for (int k = 1; k <= m; ++k) s.push_back(start + rest * static_cast<double>(k) / m);
  s.back() = Rn;
  return MassGrid(n, R, std::move(s));
}

MassGrid MassGrid::uniform(int n, double R, int J) {
  if (J < 2) throw ValidationError("mass grid: J must be >= 2");
  const double Rn = std::pow(R, n);
  std::vector<double> s(J + 1);
  for (int j = 0; j <= J; ++j) s[j] = Rn * static_cast<double>(j) / J;
  s[J] = Rn;
  return MassGrid(n, R, std::move(s));
}

MassGrid MassGrid::from_radial(const RadialGrid& grid) {
  std::vector<double> s(grid.faces().size());
  for (std::size_t f = 0; f < s.size(); ++f) s[f] = std::pow(grid.faces()[f], grid.dim());
  return MassGrid(grid.dim(), grid.radius(), std::move(s));
}

std::vector<double> mass_function(const RadialGrid& rgrid, const std::vector<double>& u, const MassGrid& grid) {
  if (rgrid.dim() != grid.dim()) throw ValidationError("to_mass: dimension mismatch");
  if (static_cast<int>(u.size()) != rgrid.cells()) throw ValidationError("to_mass: size does not match grid");
  const int n = rgrid.dim();
  const auto& faces = rgrid.faces();
  const auto& wt = rgrid.weights();
  const int N = rgrid.cells();
  // Cumulative mass at the radial faces, then exact partial cells.
  std::vector<double> cum(N + 1, 0.0);
  for (int i = 0; i < N; ++i) cum[i + 1] = cum[i] + wt[i] * u[i];
  std::vector<double> face_s(N + 1);
  for (int f = 0; f <= N; ++f) face_s[f] = std::pow(faces[f], n);

  const auto& s = grid.nodes();
  std::vector<double> U(s.size(), 0.0);
  int cell = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j + 1 == s.size()) {
      U[j] = cum[N];
      break;
    }
    while (cell < N - 1 && face_s[cell + 1] <= s[j]) ++cell;
    if (s[j] == face_s[cell]) {
      U[j] = cum[cell];
    } else if (cell + 1 <= N && s[j] == face_s[cell + 1]) {
      U[j] = cum[cell + 1];
    } else {
      U[j] = cum[cell] + u[cell] * (s[j] - face_s[cell]) / n;
    }
  }
  return U;
}

MassState to_mass(const RadialState& state, const MassGrid& grid, double mu_star, double mu_min) {
  MassState ms;
  ms.grid = &grid;
  ms.t = state.t;
  ms.mu_star = mu_star;
  ms.mu_min = mu_min;
  ms.U = mass_function(*state.grid, state.u, grid);
  ms.W = mass_function(*state.grid, state.w, grid);
  return ms;
}

double Residual::min() const {
  const int j = argmin();
  return j < 0 ? 0.0 : value[j];
}

int Residual::argmin() const {
  int best = -1;
  for (std::size_t j = 0; j < value.size(); ++j)
    if (valid[j] && (best < 0 || value[j] < value[best])) best = static_cast<int>(j);
  return best;
}

double first_difference(const std::vector<double>& s, const std::vector<double>& f, int j) {
  const double hm = s[j] - s[j - 1];
  const double hp = s[j + 1] - s[j];
  return (hm * hm * (f[j + 1] - f[j]) + hp * hp * (f[j] - f[j - 1])) / (hm * hp * (hm + hp));
}

double second_difference(const std::vector<double>& s, const std::vector<double>& f, int j) {
  const double hm = s[j] - s[j - 1];
  const double hp = s[j + 1] - s[j];
  return 2.0 * ((f[j + 1] - f[j]) / hp - (f[j] - f[j - 1]) / hm) / (hm + hp);
}

namespace {

std::vector<bool> stencil_mask(const std::vector<double>& s, const std::vector<double>& kinks) {
  const std::size_t J = s.size() - 1;
  std::vector<bool> valid(s.size(), true);
  valid[0] = false;
  valid[J] = false;
  for (double k : kinks) {
    if (!(k > 0.0) || !(k < s[J])) continue;
    for (std::size_t j = 1; j < J; ++j)
      if (s[j - 1] <= k && k <= s[j + 1]) valid[j] = false;
  }
  return valid;
}

void check_sizes(const MassState& ms, const std::vector<double>& dt_values) {
  if (ms.grid == nullptr) throw ValidationError("mass state: no grid");
  const std::size_t m = ms.grid->nodes().size();
  if (ms.U.size() != m || ms.W.size() != m || dt_values.size() != m)
    throw ValidationError("mass state: sizes do not match grid");
}

}  // namespace

Residual eval_P(const MassState& ms, const std::vector<double>& U_t, const SensitivityFamily& sens,
                const std::vector<double>& kinks) {
  check_sizes(ms, U_t);
  const auto& s = ms.grid->nodes();
  const int n = ms.grid->dim();
  Residual r{std::vector<double>(s.size(), 0.0), stencil_mask(s, kinks)};
  for (std::size_t j = 1; j + 1 < s.size(); ++j) {
    if (!r.valid[j]) continue;
    const int jj = static_cast<int>(j);
    const double x = std::max(0.0, n * first_difference(s, ms.U, jj));
    const double Uss = second_difference(s, ms.U, jj);
    r.value[j] = U_t[j] - n * n * std::pow(s[j], 2.0 - 2.0 / n) * sens.D(x) * Uss -
                 sens.S(x) * (ms.W[j] - ms.mu_star * s[j] / n);
  }
  return r;
}

Residual eval_Q(const MassState& ms, const std::vector<double>& W_t, const std::vector<double>& kinks) {
  check_sizes(ms, W_t);
  const auto& s = ms.grid->nodes();
  const int n = ms.grid->dim();
  Residual r{std::vector<double>(s.size(), 0.0), stencil_mask(s, kinks)};
  for (std::size_t j = 1; j + 1 < s.size(); ++j) {
    if (!r.valid[j]) continue;
    const int jj = static_cast<int>(j);
    const double Ws = first_difference(s, ms.W, jj);
    const double Wss = second_difference(s, ms.W, jj);
    r.value[j] = W_t[j] - n * n * std::pow(s[j], 2.0 - 2.0 / n) * Wss - n * Ws * (ms.U[j] - ms.mu_star * s[j] / n);
  }
  return r;
}

OrderingReport check_ordered(const MassState& lower, const MassState& upper, double tol) {
  if (lower.grid == nullptr || upper.grid == nullptr || !lower.grid->same_as(*upper.grid))
    throw ValidationError("check_ordered: states live on different grids");
  if (lower.U.size() != upper.U.size() || lower.W.size() != upper.W.size())
    throw ValidationError("check_ordered: size mismatch");
  OrderingReport rep;
  rep.margin_U = upper.U[0] - lower.U[0];
  rep.margin_W = upper.W[0] - lower.W[0];
  for (std::size_t j = 1; j < lower.U.size(); ++j) {
    const double dU = upper.U[j] - lower.U[j];
    const double dW = upper.W[j] - lower.W[j];
    if (dU < rep.margin_U) {
      rep.margin_U = dU;
      rep.node_U = static_cast<int>(j);
    }
    if (dW < rep.margin_W) {
      rep.margin_W = dW;
      rep.node_W = static_cast<int>(j);
    }
  }
  rep.pass = rep.margin_U >= -tol && rep.margin_W >= -tol;
  return rep;
}

}  // namespace chemoflow
