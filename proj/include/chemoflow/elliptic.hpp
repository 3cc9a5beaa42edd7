#pragma once

#include <vector>

#include "chemoflow/errors.hpp"

namespace chemoflow {

/// Cell-centered radial grid on [0, R] for radially symmetric fields in R^n.
///
/// Cell i occupies [faces[i], faces[i+1]]; its volume divided by the
/// unit-sphere area is weights[i] = (faces[i+1]^n - faces[i]^n)/n.
class RadialGrid {
 public:
  /// N equal cells.
  static RadialGrid uniform(int n, double R, int N);

  /// Geometric cells starting at width r_min, each `ratio` times wider than the
  /// previous one, until the width reaches R/N_core; the rest of [0, R] is then
  /// covered uniformly with cells of roughly that width. Used to resolve
  /// concentrated data and collapse toward the origin.
  static RadialGrid graded(int n, double R, int N_core, double r_min, double ratio);

  /// Arbitrary strictly increasing faces with faces.front() == 0.
  static RadialGrid from_faces(int n, std::vector<double> faces);

  int dim() const { return n_; }
  double radius() const { return faces_.back(); }
  int cells() const { return static_cast<int>(centers_.size()); }
  const std::vector<double>& faces() const { return faces_; }
  const std::vector<double>& centers() const { return centers_; }
  const std::vector<double>& weights() const { return weights_; }
  /// faces[f]^(n-1), the flux area factor of face f.
  const std::vector<double>& face_areas() const { return face_areas_; }
  /// R^n / n, the exact sum of the weights.
  double total_weight() const { return total_weight_; }
  /// Smallest cell width.
  double min_width() const;

  bool same_as(const RadialGrid& other) const;

 private:
  RadialGrid(int n, std::vector<double> faces);

  int n_;
  std::vector<double> faces_;
  std::vector<double> centers_;
  std::vector<double> weights_;
  std::vector<double> face_areas_;
  double total_weight_;
};

/// Piecewise-constant field on a RadialGrid.
struct RadialField {
  const RadialGrid* grid = nullptr;
  std::vector<double> values;
  double t = 0.0;

  /// Throws ValidationError if the grid is missing, sizes differ or a value is not finite.
  void validate() const;
};

/// Volume-weighted average sum(w_i f_i) / sum(w_i).
double mean_value(const RadialGrid& grid, const std::vector<double>& values);
double mean_value(const RadialField& field);

/// Solution of 0 = Lap(v) - mean(f) + f with zero flux at r = R and zero mean.
struct SignalSolution {
  std::vector<double> values;        ///< v at cell centers, mean zero
  std::vector<double> face_flux;     ///< r^(n-1) v'(r) at every face, zeros at both ends
  std::vector<double> face_gradient; ///< v'(r) at every face, v'(0) = 0
};

/// Radial quadrature solve. The flux r^(n-1) v' at each face is the exact
/// integral of the piecewise-constant source, v' is integrated with the
/// midpoint rule between centers, and the mean is removed.
SignalSolution solve_signal(const RadialGrid& grid, const std::vector<double>& source);
RadialField solve_signal(const RadialField& source);

}  // namespace chemoflow
