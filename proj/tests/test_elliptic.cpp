#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "chemoflow/elliptic.hpp"

using namespace chemoflow;

namespace {

double manufactured(double r) { return r * r / 10 - std::pow(r, 4) / 20 - 27.0 / 700; }

double manufactured_error(int N) {
  const RadialGrid g = RadialGrid::uniform(3, 1.0, N);
  std::vector<double> f(N);
  for (int i = 0; i < N; ++i) {
    // Cell average of r^2 in three dimensions.
    const double a = g.faces()[i], b = g.faces()[i + 1];
    f[i] = 0.6 * (std::pow(b, 5) - std::pow(a, 5)) / (std::pow(b, 3) - std::pow(a, 3));
  }
  const auto sol = solve_signal(g, f);
  double err = 0;
  for (int i = 0; i < N; ++i) err = std::max(err, std::abs(sol.values[i] - manufactured(g.centers()[i])));
  return err;
}

}  // namespace

TEST_CASE("uniform grid geometry") {
  const RadialGrid g = RadialGrid::uniform(3, 2.0, 64);
  CHECK(g.cells() == 64);
  CHECK(g.faces().front() == 0.0);
  CHECK(g.faces().back() == 2.0);
  double sum = 0;
  for (double w : g.weights()) sum += w;
  CHECK(sum == doctest::Approx(8.0 / 3));
  CHECK(g.total_weight() == doctest::Approx(8.0 / 3));
  CHECK(g.min_width() == doctest::Approx(2.0 / 64));
  CHECK_THROWS_AS(RadialGrid::uniform(3, 1.0, 0), ValidationError);
  CHECK_THROWS_AS(RadialGrid::from_faces(3, {0.0, 0.5, 0.4, 1.0}), ValidationError);
}

TEST_CASE("graded grid resolves the origin") {
  const RadialGrid g = RadialGrid::graded(3, 1.0, 128, 1e-20, 1.05);
  CHECK(g.faces()[1] == doctest::Approx(1e-20));
  CHECK(g.min_width() == doctest::Approx(1e-20));
  CHECK(g.faces().back() == 1.0);
  for (std::size_t f = 1; f < g.faces().size(); ++f) CHECK(g.faces()[f] > g.faces()[f - 1]);
  double sum = 0;
  for (double w : g.weights()) sum += w;
  CHECK(sum == doctest::Approx(1.0 / 3));
  // Widths stop growing once they reach R / N_core.
  double widest = 0;
  for (std::size_t f = 1; f < g.faces().size(); ++f) widest = std::max(widest, g.faces()[f] - g.faces()[f - 1]);
  CHECK(widest <= 1.0 / 128 * 1.06);
  CHECK_THROWS_AS(RadialGrid::graded(3, 1.0, 128, 0.1, 1.05), ValidationError);
}

TEST_CASE("homogeneous source gives zero signal") {
  const RadialGrid g = RadialGrid::uniform(3, 1.0, 50);
  const auto sol = solve_signal(g, std::vector<double>(50, 4.2));
  for (double v : sol.values) CHECK(std::abs(v) < 1e-14);
  for (double q : sol.face_flux) CHECK(std::abs(q) < 1e-14);
}

TEST_CASE("manufactured solution n = 3, f = r^2") {
  CHECK(manufactured_error(128) < 1e-4);
  const double e128 = manufactured_error(128), e256 = manufactured_error(256), e512 = manufactured_error(512);
  CHECK(e128 / e256 >= 3.5);
  CHECK(e256 / e512 >= 3.5);
}

TEST_CASE("face flux is the exact integral of the discrete source") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.0, 5.0);
  for (int n : {3, 4}) {
    const RadialGrid g = RadialGrid::graded(n, 1.3, 40, 1e-6, 1.2);
    std::vector<double> f(g.cells());
    for (double& x : f) x = U(rng);
    const double mu = mean_value(g, f);
    const auto sol = solve_signal(g, f);
    CHECK(sol.face_flux.front() == 0.0);
    CHECK(std::abs(sol.face_flux.back()) < 1e-12);
    for (int i = 0; i < g.cells(); ++i)
      CHECK(sol.face_flux[i + 1] - sol.face_flux[i] == doctest::Approx(g.weights()[i] * (mu - f[i])).epsilon(1e-9));
    CHECK(std::abs(mean_value(g, sol.values)) < 1e-13);
  }
}

TEST_CASE("solve is linear in the source") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const RadialGrid g = RadialGrid::uniform(3, 1.0, 64);
  std::vector<double> a(64), b(64), c(64);
  for (int i = 0; i < 64; ++i) {
    a[i] = U(rng);
    b[i] = U(rng);
    c[i] = 2.0 * a[i] - 3.0 * b[i];
  }
  const auto sa = solve_signal(g, a), sb = solve_signal(g, b), sc = solve_signal(g, c);
  for (int i = 0; i < 64; ++i) CHECK(sc.values[i] == doctest::Approx(2.0 * sa.values[i] - 3.0 * sb.values[i]));
}

TEST_CASE("field validation") {
  const RadialGrid g = RadialGrid::uniform(3, 1.0, 40);
  RadialField f{&g, std::vector<double>(40, 1.0), 0.0};
  CHECK_NOTHROW(f.validate());
  f.values[3] = std::nan("");
  CHECK_THROWS_AS(f.validate(), ValidationError);
  RadialField none;
  CHECK_THROWS_AS(none.validate(), ValidationError);
  CHECK_THROWS_AS(mean_value(g, std::vector<double>(3, 1.0)), ValidationError);
}
