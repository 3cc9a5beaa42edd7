#pragma once

#include <vector>

#include "chemoflow/model.hpp"
#include "chemoflow/state.hpp"

namespace chemoflow {

/// Nodes 0 = s_0 < s_1 < ... < s_J = R^n in the variable s = r^n.
class MassGrid {
 public:
  /// Increments grow geometrically by `ratio` from the origin until they reach
  /// R^n/J, then stay uniform. With first_step = 0 the first increment is
  /// chosen so exactly J geometric increments fill [0, R^n].
  static MassGrid graded(int n, double R, int J, double ratio = 1.05, double first_step = 0.0);
  static MassGrid uniform(int n, double R, int J);
  /// Nodes at the n-th powers of the faces of a radial grid, so that the
  /// transform of a cell field is exact at every node.
  static MassGrid from_radial(const RadialGrid& grid);

  int dim() const { return n_; }
  double radius() const { return R_; }
  const std::vector<double>& nodes() const { return s_; }
  int intervals() const { return static_cast<int>(s_.size()) - 1; }
  bool same_as(const MassGrid& other) const { return n_ == other.n_ && s_ == other.s_; }

 private:
  MassGrid(int n, double R, std::vector<double> s);
  int n_;
  double R_;
  std::vector<double> s_;
};

/// Mass accumulation functions U(s) = int_0^{s^{1/n}} r^{n-1} u dr and W likewise.
struct MassState {
  const MassGrid* grid = nullptr;
  std::vector<double> U;
  std::vector<double> W;
  double t = 0.0;
  double mu_star = 0.0;  ///< larger of the two initial means
  double mu_min = 0.0;   ///< smaller of the two initial means
};

/// Exact transform of the piecewise-constant densities of `state`.
MassState to_mass(const RadialState& state, const MassGrid& grid, double mu_star, double mu_min);
/// Transform of a single density.
std::vector<double> mass_function(const RadialGrid& rgrid, const std::vector<double>& u, const MassGrid& grid);

/// Pointwise residual with validity mask; boundary and kink-adjacent nodes are invalid.
struct Residual {
  std::vector<double> value;
  std::vector<bool> valid;
  /// Smallest valid value and its node (-1 when none).
  double min() const;
  int argmin() const;
};

/// Centered first and second differences on a nonuniform grid at interior node j.
double first_difference(const std::vector<double>& s, const std::vector<double>& f, int j);
double second_difference(const std::vector<double>& s, const std::vector<double>& f, int j);

/// P[U,W] = U_t - n^2 s^(2-2/n) D(n U_s) U_ss - S(n U_s)(W - mu_star s/n)
/// with U_t supplied per node. Nodes whose stencil straddles any of the
/// registered kinks are skipped; kinks outside (0, R^n) are ignored.
Residual eval_P(const MassState& ms, const std::vector<double>& U_t, const SensitivityFamily& sens,
                const std::vector<double>& kinks = {});
/// Q[U,W] = W_t - n^2 s^(2-2/n) W_ss - n W_s (U - mu_star s/n).
Residual eval_Q(const MassState& ms, const std::vector<double>& W_t, const std::vector<double>& kinks = {});

struct OrderingReport {
  double margin_U = 0.0;  ///< min over nodes of upper.U - lower.U
  double margin_W = 0.0;
  int node_U = 0;
  int node_W = 0;
  bool pass = false;
};

/// Throws ValidationError when the grids differ.
OrderingReport check_ordered(const MassState& lower, const MassState& upper, double tol = 0.0);

}  // namespace chemoflow
