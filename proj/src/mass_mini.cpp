#include "chemoflow/mass_mini.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace chemoflow {

void MiniConfig::validate() const {
  if (J < 2 || J > 128) throw ValidationError("mini: J must lie in [2, 128]");
  if (dt < 0.0 || !std::isfinite(dt)) throw ValidationError("mini: dt must be >= 0");
  if (!(horizon > 0.0)) throw ValidationError("mini: horizon must be positive");
  if (!(mu_star >= 0.0)) throw ValidationError("mini: mu_star must be >= 0");
  if (snapshot_every < 0) throw ValidationError("mini: snapshot_every must be >= 0");
}

namespace {

// S = S_inc + S_dec with S_inc nondecreasing and S_dec nonincreasing. For the
// canonical family S increases up to x* = -1/q (q < 0) and decreases after.
struct SplitS {
  const SensitivityFamily& sens;
  double xstar;
  explicit SplitS(const SensitivityFamily& f)
      : sens(f), xstar(f.q() < 0.0 ? -1.0 / f.q() : std::numeric_limits<double>::infinity()) {}
  double inc(double x) const { return sens.S(std::min(x, xstar)); }
  double dec(double x) const { return x <= xstar ? 0.0 : sens.S(x) - sens.S(xstar); }
  double inc_slope(double x) const { return x < xstar ? sens.S_prime(x) : 0.0; }
  double dec_slope(double x) const { return x > xstar ? std::abs(sens.S_prime(x)) : 0.0; }
};

std::vector<double> uniform_nodes(int n, double R, int J) { return MassGrid::uniform(n, R, J).nodes(); }

void check_pair(const MiniPair& p, std::size_t m) {
  if (p.U.size() != m || p.W.size() != m) throw ValidationError("mini: pair size does not match J + 1");
  for (std::size_t j = 0; j < m; ++j)
    if (!std::isfinite(p.U[j]) || !std::isfinite(p.W[j])) throw ValidationError("mini: non-finite initial value");
  if (p.U[0] != 0.0 || p.W[0] != 0.0) throw ValidationError("mini: U(0) and W(0) must vanish");
  for (std::size_t j = 1; j < m; ++j)
    if (p.U[j] < p.U[j - 1] || p.W[j] < p.W[j - 1]) throw ValidationError("mini: initial profiles must be nondecreasing");
}

void euler_step(const std::vector<double>& s, const MiniPair& in, MiniPair& out, const SensitivityFamily& sens,
                const SplitS& split, int n, double mu_star, double dt) {
  const std::size_t m = s.size();
  const double h = s[1] - s[0];
  out = in;
  for (std::size_t j = 1; j + 1 < m; ++j) {
    const double geo = std::pow(s[j], 2.0 - 2.0 / n);
    const double a = std::max(0.0, n * (in.U[j] - in.U[j - 1]) / h);
    const double b = std::max(0.0, n * (in.U[j + 1] - in.U[j]) / h);
    const double diff = n * geo * (sens.D_integral(b) - sens.D_integral(a)) / h;
    const double c = in.W[j] - mu_star * s[j] / n;
    const double adv = c >= 0.0 ? c * (split.inc(b) + split.dec(a)) : c * (split.inc(a) + split.dec(b));
    out.U[j] = in.U[j] + dt * (diff + adv);

    const double cw = in.U[j] - mu_star * s[j] / n;
    const double Wss = (in.W[j + 1] - 2.0 * in.W[j] + in.W[j - 1]) / (h * h);
    const double Ws = cw >= 0.0 ? (in.W[j + 1] - in.W[j]) / h : (in.W[j] - in.W[j - 1]) / h;
    out.W[j] = in.W[j] + dt * (n * n * geo * Wss + n * cw * Ws);
  }
}

}  // namespace

double mini_stability_limit(const std::vector<double>& s, const MiniPair& pair, const SensitivityFamily& sens, int n,
                            double mu_star) {
  const SplitS split(sens);
  const double h = s[1] - s[0];
  double rate = 0.0;
  for (std::size_t j = 1; j + 1 < s.size(); ++j) {
    const double geo = std::pow(s[j], 2.0 - 2.0 / n);
    const double a = std::max(0.0, n * (pair.U[j] - pair.U[j - 1]) / h);
    const double b = std::max(0.0, n * (pair.U[j + 1] - pair.U[j]) / h);
    const double c = pair.W[j] - mu_star * s[j] / n;
    const double lip = c >= 0.0 ? split.inc_slope(b) + split.dec_slope(a) : split.inc_slope(a) + split.dec_slope(b);
    const double ru = n * n * geo * (sens.D(a) + sens.D(b)) / (h * h) + n * std::abs(c) * lip / h;
    const double cw = pair.U[j] - mu_star * s[j] / n;
    const double rw = 2.0 * n * n * geo / (h * h) + n * std::abs(cw) / h;
    rate = std::max({rate, ru, rw});
  }
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

std::vector<MiniTrajectory> mini_advance_all(const std::vector<MiniPair>& initial, const MiniConfig& cfg,
                                             const SensitivityFamily& sens, int n, double R) {
  cfg.validate();
  const std::vector<double> s = uniform_nodes(n, R, cfg.J);
  for (const auto& p : initial) check_pair(p, s.size());
  const SplitS split(sens);

  double dt = cfg.dt;
  if (dt == 0.0) {
    double lim = std::numeric_limits<double>::infinity();
    for (const auto& p : initial) lim = std::min(lim, mini_stability_limit(s, p, sens, n, cfg.mu_star));
    dt = std::isfinite(lim) ? 0.5 * lim : cfg.horizon;
  }
  const long steps = std::max(1L, static_cast<long>(std::ceil(cfg.horizon / dt - 1e-12)));
  dt = cfg.horizon / steps;

  std::vector<MiniTrajectory> out(initial.size());
  std::vector<MiniPair> cur = initial;
  for (std::size_t k = 0; k < initial.size(); ++k) {
    out[k].s = s;
    out[k].dt = dt;
    out[k].times.push_back(0.0);
    out[k].states.push_back(initial[k]);
  }
  MiniPair next;
  for (long it = 1; it <= steps; ++it) {
    for (std::size_t k = 0; k < cur.size(); ++k) {
      const double lim = mini_stability_limit(s, cur[k], sens, n, cfg.mu_star);
      if (dt > lim)
        throw NumericalError("mini: step " + std::to_string(it) + " exceeds the stability limit (dt = " +
                             std::to_string(dt) + ", limit = " + std::to_string(lim) + ")");
      euler_step(s, cur[k], next, sens, split, n, cfg.mu_star, dt);
      for (std::size_t j = 1; j < s.size(); ++j) {
        const double tol = 1e-12 * (std::abs(next.U.back()) + std::abs(next.W.back()));
        if (next.U[j] < next.U[j - 1] - tol || next.W[j] < next.W[j - 1] - tol)
          throw NumericalError("mini: profile lost monotonicity in s at step " + std::to_string(it));
      }
      cur[k] = next;
      out[k].steps = it;
      const bool snap = (cfg.snapshot_every > 0 && it % cfg.snapshot_every == 0) || it == steps;
      if (snap) {
        out[k].times.push_back(it * dt);
        out[k].states.push_back(cur[k]);
      }
    }
  }
  return out;
}

MiniTrajectory mini_advance(const MiniPair& initial, const MiniConfig& cfg, const SensitivityFamily& sens, int n,
                            double R) {
  return mini_advance_all({initial}, cfg, sens, n, R).front();
}

}  // namespace chemoflow
