#include "chemoflow/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chemoflow {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

RadialGrid::RadialGrid(int n, std::vector<double> faces) : n_(n), faces_(std::move(faces)) {
  if (n_ < 1) throw ValidationError("grid: dimension must be >= 1");
  if (faces_.size() < 2) throw ValidationError("grid: need at least one cell");
  if (faces_.front() != 0.0) throw ValidationError("grid: first face must be at r = 0");
  const std::size_t N = faces_.size() - 1;
  centers_.resize(N);
  weights_.resize(N);
  face_areas_.resize(N + 1);
  for (std::size_t f = 0; f <= N; ++f) {
    if (!std::isfinite(faces_[f])) throw ValidationError("grid: non-finite face");
    if (f > 0 && !(faces_[f] > faces_[f - 1])) throw ValidationError("grid: faces must be strictly increasing");
    face_areas_[f] = ipow(faces_[f], n_ - 1);
  }
  for (std::size_t i = 0; i < N; ++i) {
    const double a = faces_[i];
    const double b = faces_[i + 1];
    centers_[i] = 0.5 * (a + b);
    // b^n - a^n = (b - a) * sum_k b^k a^(n-1-k), free of cancellation.
    double sum = 0.0;
    for (int k = 0; k < n_; ++k) sum += ipow(b, k) * ipow(a, n_ - 1 - k);
    weights_[i] = (b - a) * sum / n_;
  }
  total_weight_ = ipow(faces_.back(), n_) / n_;
}

RadialGrid RadialGrid::uniform(int n, double R, int N) {
  if (N < 1) throw ValidationError("grid: cell count must be >= 1");
  if (!(R > 0.0) || !std::isfinite(R)) throw ValidationError("grid: radius must be positive");
  std::vector<double> faces(N + 1);
  for (int f = 0; f <= N; ++f) faces[f] = R * static_cast<double>(f) / N;
  faces[N] = R;
  return RadialGrid(n, std::move(faces));
}

RadialGrid RadialGrid::graded(int n, double R, int N_core, double r_min, double ratio) {
  if (N_core < 1) throw ValidationError("grid: cell count must be >= 1");
  if (!(R > 0.0) || !std::isfinite(R)) throw ValidationError("grid: radius must be positive");
  const double h = R / N_core;
  if (!(r_min > 0.0) || r_min >= h) throw ValidationError("grid: r_min must lie in (0, R/N)");
  if (!(ratio > 1.0) || ratio > 2.0) throw ValidationError("grid: ratio must lie in (1, 2]");
  std::vector<double> faces{0.0};
  double width = r_min;
  while (width < h && faces.back() + width < R) {
    faces.push_back(faces.back() + width);
    width *= ratio;
  }
  const double rest = R - faces.back();
  const int m = std::max(1, static_cast<int>(std::ceil(rest / h - 1e-9)));
  const double start = faces.back();
  for (int k = 1; k <= m; ++k) faces.push_back(start + rest * static_cast<double>(k) / m);
  faces.back() = R;
  return RadialGrid(n, std::move(faces));
}

RadialGrid RadialGrid::from_faces(int n, std::vector<double> faces) { return RadialGrid(n, std::move(faces)); }

double RadialGrid::min_width() const {
  double w = faces_[1] - faces_[0];
  for (std::size_t f = 1; f + 1 < faces_.size(); ++f) w = std::min(w, faces_[f + 1] - faces_[f]);
  return w;
}

bool RadialGrid::same_as(const RadialGrid& other) const { return n_ == other.n_ && faces_ == other.faces_; }

void RadialField::validate() const {
  if (grid == nullptr) throw ValidationError("field: no grid attached");
  if (static_cast<int>(values.size()) != grid->cells()) throw ValidationError("field: size does not match grid");
  for (double x : values)
    if (!std::isfinite(x)) throw ValidationError("field: non-finite value");
}

double mean_value(const RadialGrid& grid, const std::vector<double>& values) {
  if (static_cast<int>(values.size()) != grid.cells()) throw ValidationError("mean_value: size does not match grid");
  const auto& w = grid.weights();
  double acc = 0.0;
  double wsum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += w[i] * values[i];
    wsum += w[i];
  }
  return acc / wsum;
}

double mean_value(const RadialField& field) {
  field.validate();
  return mean_value(*field.grid, field.values);
}

SignalSolution solve_signal(const RadialGrid& grid, const std::vector<double>& source) {
  const int N = grid.cells();
  if (static_cast<int>(source.size()) != N) throw ValidationError("solve_signal: size does not match grid");
  for (double x : source)
    if (!std::isfinite(x)) throw ValidationError("solve_signal: non-finite source");

  const auto& w = grid.weights();
  const auto& c = grid.centers();
  const auto& area = grid.face_areas();
  const double mu = mean_value(grid, source);

  SignalSolution sol;
  sol.face_flux.assign(N + 1, 0.0);
  sol.face_gradient.assign(N + 1, 0.0);
  sol.values.assign(N, 0.0);

  // Prefix sums from the center outward and suffix sums from the boundary
  // inward agree in exact arithmetic; using the shorter side keeps the
  // rounding error proportional to the local flux.
  std::vector<double> prefix(N + 1, 0.0);
  for (int i = 0; i < N; ++i) prefix[i + 1] = prefix[i] + w[i] * (mu - source[i]);
  std::vector<double> suffix(N + 1, 0.0);
  for (int i = N - 1; i >= 0; --i) suffix[i] = suffix[i + 1] - w[i] * (mu - source[i]);
  for (int f = 1; f < N; ++f) {
    const double g = (f <= N / 2) ? prefix[f] : suffix[f];
    sol.face_flux[f] = g;
    sol.face_gradient[f] = g / area[f];
  }

  for (int i = 0; i + 1 < N; ++i) sol.values[i + 1] = sol.values[i] + sol.face_gradient[i + 1] * (c[i + 1] - c[i]);
  // Two passes remove the residual mean left by rounding in the first.
  for (int pass = 0; pass < 2; ++pass) {
    const double m = mean_value(grid, sol.values);
    for (double& v : sol.values) v -= m;
  }
  return sol;
}

RadialField solve_signal(const RadialField& source) {
  source.validate();
  RadialField out;
  out.grid = source.grid;
  out.t = source.t;
  out.values = solve_signal(*source.grid, source.values).values;
  return out;
}

}  // namespace chemoflow
