#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "chemoflow/dynamics.hpp"
#include "chemoflow/mass_system.hpp"

using namespace chemoflow;

TEST_CASE("mass grids") {
  const auto g = MassGrid::graded(3, 1.0, 40, 1.1);
  CHECK(g.nodes().front() == 0.0);
  CHECK(g.nodes().back() == 1.0);
  CHECK(g.intervals() == 40);
  for (int j = 2; j <= 40; ++j)
    CHECK(g.nodes()[j] - g.nodes()[j - 1] == doctest::Approx(1.1 * (g.nodes()[j - 1] - g.nodes()[j - 2])));
  const auto h = MassGrid::graded(3, 2.0, 32, 1.2, 1e-9);
  CHECK(h.nodes()[1] == doctest::Approx(1e-9));
  CHECK(h.nodes().back() == 8.0);
  for (std::size_t j = 1; j < h.nodes().size(); ++j) CHECK(h.nodes()[j] > h.nodes()[j - 1]);
  CHECK(MassGrid::uniform(3, 1.0, 8).nodes()[4] == doctest::Approx(0.5));
  CHECK_THROWS_AS(MassGrid::uniform(3, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(MassGrid::graded(3, 1.0, 10, 0.9), ValidationError);
}

TEST_CASE("transform of constant densities is linear in s") {
  const RadialGrid rg = RadialGrid::graded(3, 1.0, 64, 1e-5, 1.1);
  const auto st = RadialState::from_densities(rg, std::vector<double>(rg.cells(), 2.0),
                                              std::vector<double>(rg.cells(), 0.5));
  const auto mg = MassGrid::uniform(3, 1.0, 50);
  const auto ms = to_mass(st, mg, 2.0, 0.5);
  for (int j = 0; j <= 50; ++j) {
    CHECK(ms.U[j] == doctest::Approx(2.0 * mg.nodes()[j] / 3.0).epsilon(1e-13));
    CHECK(ms.W[j] == doctest::Approx(0.5 * mg.nodes()[j] / 3.0).epsilon(1e-13));
  }
  CHECK(ms.mu_star == 2.0);
  CHECK(ms.mu_min == 0.5);
}

TEST_CASE("transform at the radial faces is the cumulative cell mass") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  const RadialGrid rg = RadialGrid::uniform(4, 1.5, 48);
  std::vector<double> u(48);
  for (double& x : u) x = U(rng);
  const auto mg = MassGrid::from_radial(rg);
  const auto M = mass_function(rg, u, mg);
  double cum = 0;
  CHECK(M[0] == 0.0);
  for (int i = 0; i < 48; ++i) {
    cum += rg.weights()[i] * u[i];
    CHECK(M[i + 1] == doctest::Approx(cum).epsilon(1e-13));
  }
  // Total is mass / omega_n on any grid.
  const auto other = mass_function(rg, u, MassGrid::graded(4, 1.5, 30, 1.15));
  CHECK(other.back() == doctest::Approx(cum).epsilon(1e-13));
  for (std::size_t j = 1; j < other.size(); ++j) CHECK(other[j] >= other[j - 1]);
}

TEST_CASE("nonuniform differences are exact on quadratics") {
  const std::vector<double> s{0.0, 0.1, 0.25, 0.3, 0.7, 1.0};
  std::vector<double> f(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) f[j] = 3.0 * s[j] * s[j] - 2.0 * s[j] + 1.0;
  for (int j = 1; j < 5; ++j) {
    CHECK(first_difference(s, f, j) == doctest::Approx(6.0 * s[j] - 2.0));
    CHECK(second_difference(s, f, j) == doctest::Approx(6.0));
  }
}

TEST_CASE("operators vanish on the homogeneous mass state") {
  const auto mg = MassGrid::graded(3, 1.0, 40, 1.08);
  MassState ms;
  ms.grid = &mg;
  ms.mu_star = 1.5;
  ms.U.resize(41);
  ms.W.resize(41);
  for (int j = 0; j <= 40; ++j) {
    ms.U[j] = 1.5 * mg.nodes()[j] / 3.0;
    ms.W[j] = 1.5 * mg.nodes()[j] / 3.0;
  }
  const std::vector<double> zero(41, 0.0);
  const SensitivityFamily f(1.0, 0.5, 1.0, 1.5);
  const auto P = eval_P(ms, zero, f), Q = eval_Q(ms, zero);
  CHECK(!P.valid.front());
  CHECK(!P.valid.back());
  for (int j = 1; j < 40; ++j) {
    CHECK(std::abs(P.value[j]) < 1e-12);
    CHECK(std::abs(Q.value[j]) < 1e-12);
  }
  // A positive time derivative shows up one to one.
  const auto P1 = eval_P(ms, std::vector<double>(41, 0.25), f);
  CHECK(P1.min() == doctest::Approx(0.25));
}

TEST_CASE("kink masking") {
  const auto mg = MassGrid::uniform(3, 1.0, 20);
  MassState ms;
  ms.grid = &mg;
  ms.U.assign(21, 0.0);
  ms.W.assign(21, 0.0);
  const std::vector<double> zero(21, 0.0);
  const SensitivityFamily f(1.0, 0.0, 1.0, 1.0);
  const auto P = eval_P(ms, zero, f, {0.52, 2.0, -1.0});
  // 0.52 lies in (0.5, 0.55): nodes 10 and 11 have stencils across it.
  CHECK(!P.valid[10]);
  CHECK(!P.valid[11]);
  CHECK(P.valid[9]);
  CHECK(P.valid[12]);
  const auto Q = eval_Q(ms, zero, {0.5});
  CHECK(!Q.valid[10]);
  CHECK(Q.valid[12]);
  CHECK_THROWS_AS(eval_P(ms, std::vector<double>(5, 0.0), f), ValidationError);
}

TEST_CASE("check_ordered margins and locations") {
  const auto mg = MassGrid::uniform(3, 1.0, 10);
  MassState lo, hi;
  lo.grid = hi.grid = &mg;
  lo.U.assign(11, 0.0);
  lo.W.assign(11, 0.0);
  hi.U.assign(11, 1.0);
  hi.W.assign(11, 2.0);
  hi.U[0] = hi.W[0] = 0.0;
  auto rep = check_ordered(lo, hi);
  CHECK(rep.pass);
  CHECK(rep.margin_U == 0.0);
  hi.U[7] = -0.5;
  rep = check_ordered(lo, hi);
  CHECK(!rep.pass);
  CHECK(rep.margin_U == -0.5);
  CHECK(rep.node_U == 7);
  CHECK(check_ordered(lo, hi, 0.6).pass);
  const auto other = MassGrid::uniform(3, 1.0, 12);
  MassState elsewhere = hi;
  elsewhere.grid = &other;
  CHECK_THROWS_AS(check_ordered(lo, elsewhere), ValidationError);
}
