#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "chemoflow/dynamics.hpp"

using namespace chemoflow;

namespace {

double sup(const std::vector<double>& x) {
  double m = 0;
  for (double v : x) m = std::max(m, v);
  return m;
}

RadialState bump(const RadialGrid& g, double a = 2.0) {
  return RadialState::from_densities(g, gaussian_profile(g, a, 0.3, 0.5), gaussian_profile(g, 1.0, 0.4, 0.5));
}

RadialState march(RadialState s, const SensitivityFamily& f, double T, int steps) {
  const double dt = T / steps;
  for (int k = 0; k < steps; ++k) s = step(s, f, dt);
  return s;
}

}  // namespace

TEST_CASE("homogeneous state is a fixed point") {
  const RadialGrid g = RadialGrid::uniform(3, 1.0, 64);
  const SensitivityFamily f(1.0, 0.5, 2.0, 1.5);
  RadialState s = RadialState::from_densities(g, std::vector<double>(64, 3.0), std::vector<double>(64, 0.7));
  for (int k = 0; k < 10; ++k) s = step(s, f, 1e-3);
  for (int i = 0; i < 64; ++i) {
    CHECK(s.u[i] == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(s.w[i] == doctest::Approx(0.7).epsilon(1e-13));
  }
  CHECK(s.t == doctest::Approx(1e-2));
}

TEST_CASE("pure diffusion never raises the maximum") {
  const RadialGrid g = RadialGrid::uniform(3, 1.0, 128);
  const SensitivityFamily f(1.0, 0.0, 0.0, 1.0);
  RadialState s = RadialState::from_densities(g, gaussian_profile(g, 5.0, 0.2, 0.1), std::vector<double>(128, 0.0));
  double prev = sup(s.u);
  for (int k = 0; k < 200; ++k) {
    s = step(s, f, 5e-4);
    const double now = sup(s.u);
    CHECK(now <= prev * (1 + 1e-14));
    prev = now;
  }
}

TEST_CASE("steps conserve mass and positivity") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(0.0, 4.0);
  const RadialGrid g = RadialGrid::graded(3, 1.0, 64, 1e-4, 1.1);
  std::vector<double> u(g.cells()), w(g.cells());
  for (int i = 0; i < g.cells(); ++i) {
    u[i] = U(rng);
    w[i] = U(rng);
  }
  const SensitivityFamily f(1.0, 0.0, 1.0, 1.0);
  RadialState s = RadialState::from_densities(g, u, w);
  const double mu = s.mass_u(), mw = s.mass_w();
  for (int k = 0; k < 50; ++k) {
    s = step(s, f, std::min(1e-3, 0.5 * stable_dt(s, f, StepControl{})));
    for (int i = 0; i < g.cells(); ++i) {
      CHECK(s.u[i] >= 0.0);
      CHECK(s.w[i] >= 0.0);
    }
  }
  CHECK(s.mass_u() == doctest::Approx(mu).epsilon(1e-12));
  CHECK(s.mass_w() == doctest::Approx(mw).epsilon(1e-12));
}

TEST_CASE("time stepping converges at first order") {
  const RadialGrid g = RadialGrid::uniform(3, 1.0, 64);
  const SensitivityFamily f(1.0, 0.0, 1.0, 1.0);
  const double T = 0.02;
  const auto a = march(bump(g), f, T, 40), b = march(bump(g), f, T, 80), c = march(bump(g), f, T, 160);
  double dab = 0, dbc = 0;
  for (int i = 0; i < 64; ++i) {
    dab = std::max(dab, std::abs(a.u[i] - b.u[i]));
    dbc = std::max(dbc, std::abs(b.u[i] - c.u[i]));
  }
  const double ratio = dab / dbc;
  CHECK(ratio > 1.7);
  CHECK(ratio < 2.3);
}

TEST_CASE("one step against two half steps is second order locally") {
  const RadialGrid g = RadialGrid::uniform(3, 1.0, 64);
  const SensitivityFamily f(1.0, 0.0, 1.0, 1.0);
  auto gap = [&](double dt) {
    const auto one = march(bump(g), f, dt, 1), two = march(bump(g), f, dt, 2);
    double d = 0;
    for (int i = 0; i < 64; ++i) d = std::max(d, std::abs(one.u[i] - two.u[i]));
    return d;
  };
  const double r1 = gap(1e-3) / gap(5e-4), r2 = gap(5e-4) / gap(2.5e-4);
  CHECK(r1 > 3.4);
  CHECK(r2 > 3.4);
  CHECK(r2 < 4.6);
}

TEST_CASE("advance with zero horizon records the initial state only") {
  const RadialGrid g = RadialGrid::uniform(3, 1.0, 64);
  const SensitivityFamily f(1.0, 0.0, 1.0, 1.0);
  const auto rep = advance(bump(g), f, StepControl{}, 0.0);
  CHECK(rep.records.size() == 1);
  CHECK(rep.steps == 0);
  CHECK(rep.verdict == Verdict::COMPLETED_HORIZON);
  CHECK_THROWS_AS(advance(bump(g), f, StepControl{}, -1.0), ValidationError);
}

TEST_CASE("advance reaches the horizon with conserved mass") {
  const RadialGrid g = RadialGrid::uniform(3, 1.0, 64);
  const SensitivityFamily f(1.0, 1.0, 1.0, 0.0);
  StepControl ctrl;
  ctrl.norm_exponents = {2.0};
  const auto rep = advance(bump(g), f, ctrl, 0.5);
  CHECK(rep.verdict == Verdict::COMPLETED_HORIZON);
  CHECK(rep.records.back().t == doctest::Approx(0.5));
  CHECK(rep.max_mass_drift_u < 1e-10);
  CHECK(rep.max_mass_drift_w < 1e-10);
  CHECK(rep.max_mean_v < 1e-10);
  CHECK(rep.records.back().norms.size() == 2);
  for (std::size_t k = 1; k < rep.records.size(); ++k) CHECK(rep.records[k].t > rep.records[k - 1].t);
}

TEST_CASE("step control validation") {
  StepControl c;
  CHECK_NOTHROW(c.validate());
  c.cfl = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.norm_exponents = {1.0};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  const RadialGrid g = RadialGrid::uniform(3, 1.0, 64);
  CHECK_THROWS_AS(step(bump(g), SensitivityFamily(1.0, 0.0, 1.0, 1.0), 0.0), DomainError);
  CHECK_THROWS_AS(RadialState::from_densities(g, std::vector<double>(64, -1.0), std::vector<double>(64, 1.0)),
                  ValidationError);
}

TEST_CASE("blow-up time from a synthetic 1/(T - t) series") {
  const double T = 0.37;
  std::vector<std::pair<double, double>> series;
  for (int k = 0; k < 30; ++k) {
    const double t = T - 0.1 * std::pow(0.7, k);
    series.push_back({t, 2.5 / (T - t)});
  }
  const auto est = estimate_blowup_time(series, {0.5, 1.0, 2.0});
  CHECK(est.valid);
  CHECK(est.sigma == 1.0);
  CHECK(est.time == doctest::Approx(T).epsilon(1e-9));

  std::vector<std::pair<double, double>> sq;
  for (int k = 0; k < 30; ++k) {
    const double t = T - 0.1 * std::pow(0.7, k);
    sq.push_back({t, std::pow(T - t, -0.5)});
  }
  const auto est2 = estimate_blowup_time(sq, {1.0, 2.0});
  CHECK(est2.sigma == 2.0);
  CHECK(est2.time == doctest::Approx(T).epsilon(1e-9));
}

TEST_CASE("initial profiles") {
  const RadialGrid g = RadialGrid::uniform(3, 1.0, 32);
  const auto prof = gaussian_profile(g, 2.0, 0.5, -0.1);
  for (int i = 0; i < 32; ++i) {
    const double r = g.centers()[i];
    CHECK(prof[i] == doctest::Approx(std::max(0.0, 2.0 * std::exp(-r * r / 0.25) - 0.1)));
  }
  const auto tab = tabulated_profile(g, {0.0, 1.0}, {1.0, 3.0});
  for (int i = 0; i < 32; ++i) CHECK(tab[i] == doctest::Approx(1.0 + 2.0 * g.centers()[i]));
  CHECK_THROWS_AS(tabulated_profile(g, {0.5, 0.2}, {1.0, 2.0}), ValidationError);
}
