#include "chemoflow/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace chemoflow {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ValidationError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON (" +
                          e.what() + ")");
  }
}

// Typed access to one JSON object that remembers which keys were read, so
// that misspelled fields are reported instead of silently ignored.
class Fields {
 public:
  Fields(const json& obj, std::string path, std::string origin)
      : obj_(obj), path_(std::move(path)), origin_(std::move(origin)) {
    if (!obj_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return as_number(obj_.at(key), key);
  }
  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }
  long long_integer(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long>();
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key) {
    const json& v = obj_.at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(as_number(x, key));
    return out;
  }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }
  Fields sub(const std::string& key) {
    seen_.insert(key);
    return Fields(obj_.at(key), dotted(key), origin_);
  }

  /// Throws on any key that was never asked for.
  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) throw ValidationError(origin_ + ": unknown field '" + dotted(key) + "'");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const std::string where = key.empty() ? (path_.empty() ? std::string("document") : path_) : dotted(key);
    throw ValidationError(origin_ + ": field '" + where + "': " + what);
  }

  std::string dotted(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  double as_number(const json& v, const std::string& key) const {
    if (!v.is_number()) fail(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    return x;
  }

  const json& obj_;
  std::string path_;
  std::string origin_;
  std::set<std::string> seen_;
};

void read_model(Fields f, ModelParams& m) {
  m.n = f.integer("n", m.n);
  m.R = f.number("R", m.R);
  m.p = f.number("p", m.p);
  m.q = f.number("q", m.q);
  m.kD = f.number("kD", m.kD);
  m.kS = f.number("kS", m.kS);
  f.finish();
}

void read_initial(Fields f, InitialData& d) {
  const std::string kind = f.string("kind", "gaussian");
  if (kind == "gaussian") d.kind = InitialData::Kind::GAUSSIAN;
  else if (kind == "table") d.kind = InitialData::Kind::TABLE;
  else if (kind == "dominating") d.kind = InitialData::Kind::DOMINATING;
  else f.fail("kind", "expected gaussian, table or dominating");
  d.a_u = f.number("a_u", d.a_u);
  d.a_w = f.number("a_w", d.a_w);
  d.rho_u = f.number("rho_u", d.rho_u);
  d.rho_w = f.number("rho_w", d.rho_w);
  d.b_u = f.number("b_u", d.b_u);
  d.b_w = f.number("b_w", d.b_w);
  if (f.has("mean_u")) d.mean_u = f.number("mean_u", 0.0);
  if (f.has("mean_w")) d.mean_w = f.number("mean_w", 0.0);
  d.table_path = f.string("path", d.table_path);
  d.lambda = f.number("lambda", d.lambda);
  f.finish();
}

void read_grid(Fields f, GridSpec& g) {
  g.N = f.integer("N", g.N);
  g.J = f.integer("J", g.J);
  g.graded = f.boolean("graded", g.graded);
  g.r_min = f.number("r_min", g.r_min);
  g.ratio = f.number("ratio", g.ratio);
  f.finish();
}

void read_step(Fields f, StepControl& c) {
  c.dt_init = f.number("dt_init", c.dt_init);
  c.dt_min = f.number("dt_min", c.dt_min);
  c.dt_max = f.number("dt_max", c.dt_max);
  c.cfl = f.number("cfl", c.cfl);
  c.growth = f.number("growth", c.growth);
  c.max_rel_change = f.number("max_rel_change", c.max_rel_change);
  c.diffusion_number = f.number("diffusion_number", c.diffusion_number);
  c.u_cap = f.number("u_cap", c.u_cap);
  c.max_retries = f.integer("max_retries", c.max_retries);
  c.max_steps = f.long_integer("max_steps", c.max_steps);
  c.record_interval = f.number("record_interval", c.record_interval);
  if (f.has("blowup_sigmas")) c.blowup_sigmas = f.numbers("blowup_sigmas");
  f.finish();
}

void read_diagnostics(Fields f, StepControl& c, bool& norms_given) {
  c.lyapunov = f.boolean("lyapunov", c.lyapunov);
  c.anchor = f.number("anchor", c.anchor);
  if (f.has("norm_exponents")) {
    c.norm_exponents = f.numbers("norm_exponents");
    norms_given = true;
  }
  f.finish();
}

void read_subsolution(Fields f, SubsolutionSpec& s) {
  if (f.has("exponents")) {
    const json& e = f.raw("exponents");
    if (e.is_string()) {
      if (e.get<std::string>() != "auto") f.fail("exponents", "expected \"auto\" or an object");
      s.auto_exponents = true;
    } else {
      Fields ef = f.sub("exponents");
      s.auto_exponents = false;
      s.exponents.delta = ef.number("delta", 0.0);
      s.exponents.alpha = ef.number("alpha", 0.0);
      s.exponents.beta = ef.number("beta", 0.0);
      ef.finish();
    }
  }
  const std::string sampling = f.string("sampling", "normal");
  if (sampling != "normal" && sampling != "dense") f.fail("sampling", "expected normal or dense");
  s.dense = sampling == "dense";
  s.workers = f.integer("workers", s.workers);
  f.finish();
}

void read_run(Fields& f, RunConfig& cfg, bool allow_pq) {
  if (f.has("model")) {
    Fields mf = f.sub("model");
    if (!allow_pq && (mf.has("p") || mf.has("q"))) mf.fail("p", "set by the lattice, not the template");
    read_model(std::move(mf), cfg.model);
  }
  if (f.has("initial")) read_initial(f.sub("initial"), cfg.initial);
  if (f.has("grid")) read_grid(f.sub("grid"), cfg.grid);
  if (f.has("step")) read_step(f.sub("step"), cfg.step);
  bool norms_given = false;
  if (f.has("diagnostics")) read_diagnostics(f.sub("diagnostics"), cfg.step, norms_given);
  cfg.norm_exponents_given = norms_given;
  if (!norms_given) cfg.step.norm_exponents = default_norm_exponents(cfg.model);
  cfg.horizon = f.number("horizon", cfg.horizon);
  cfg.plots = f.boolean("plots", cfg.plots);
  cfg.out_dir = f.string("out", cfg.out_dir);
  if (f.has("subsolution")) {
    SubsolutionSpec s;
    read_subsolution(f.sub("subsolution"), s);
    cfg.subsolution = s;
  }
  f.finish();
}

std::string dir_of(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  return parent.empty() ? std::string(".") : parent.string();
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  step.validate();
  if (grid.N < 32) throw ValidationError("grid.N must be at least 32 (got " + std::to_string(grid.N) + ")");
  if (grid.J != 0 && grid.J < 2) throw ValidationError("grid.J must be 0 or at least 2");
  if (grid.graded && !(grid.ratio > 1.0)) throw ValidationError("grid.ratio must exceed 1");
  if (grid.graded && grid.r_min < 0.0) throw ValidationError("grid.r_min must be >= 0");
  if (grid.graded && grid.r_min == 0.0 && !subsolution)
    throw ValidationError("grid.r_min = 0 (automatic) needs a subsolution block");
  if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
  for (double k : step.norm_exponents)
    if (!(k > 1.0)) throw ValidationError("diagnostics.norm_exponents must exceed 1");
  switch (initial.kind) {
    case InitialData::Kind::GAUSSIAN:
      if (!(initial.rho_u > 0.0) || !(initial.rho_w > 0.0)) throw ValidationError("initial.rho_u/rho_w must be positive");
      if (initial.b_u < 0.0 || initial.b_w < 0.0) throw ValidationError("initial.b_u/b_w must be >= 0");
      if (initial.mean_u && !(*initial.mean_u > initial.b_u))
        throw ValidationError("initial.mean_u must exceed b_u");
      if (initial.mean_w && !(*initial.mean_w > initial.b_w))
        throw ValidationError("initial.mean_w must exceed b_w");
      break;
    case InitialData::Kind::TABLE: {
      const auto p = std::filesystem::path(base_dir) / initial.table_path;
      if (initial.table_path.empty() || !std::filesystem::exists(p))
        throw ValidationError("initial.path: file not found: " + p.string());
      break;
    }
    case InitialData::Kind::DOMINATING:
      if (!subsolution) throw ValidationError("initial.kind = dominating needs a subsolution block");
      if (!(initial.lambda > 0.0)) throw ValidationError("initial.lambda must be positive");
      if (initial.mean_u && !(*initial.mean_u > 0.0)) throw ValidationError("initial.mean_u must be positive");
      if (initial.mean_w && !(*initial.mean_w > 0.0)) throw ValidationError("initial.mean_w must be positive");
      break;
  }
  if (subsolution && subsolution->workers < 1) throw ValidationError("subsolution.workers must be >= 1");
}

RunConfig parse_run_config(const std::string& text, const std::string& base_dir, const std::string& origin) {
  const json doc = parse_json(text, origin);
  RunConfig cfg;
  cfg.base_dir = base_dir;
  Fields f(doc, "", origin);
  read_run(f, cfg, true);
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path), dir_of(path), path); }

void PhaseMapSpec::validate() const {
  if (n < 3) throw ValidationError("n must be at least 3");
  if (points.empty()) throw ValidationError("lattice is empty");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (!(blowup_lambda > 0.0)) throw ValidationError("blowup_data.lambda must be positive");
  if (blowup_core_cells < 32) throw ValidationError("blowup_data.N_core must be at least 32");
  if (!(blowup_ratio > 1.0)) throw ValidationError("blowup_data.ratio must exceed 1");
  if (!(plateau_tolerance >= 0.0) || !(growth_tolerance >= 0.0))
    throw ValidationError("plateau tolerances must be >= 0");
  run.validate();
}

PhaseMapSpec parse_phase_map_spec(const std::string& text, const std::string& base_dir, const std::string& origin) {
  const json doc = parse_json(text, origin);
  PhaseMapSpec spec;
  Fields f(doc, "", origin);
  spec.n = f.integer("n", spec.n);
  if (f.has("points")) {
    const json& pts = f.raw("points");
    if (!pts.is_array()) f.fail("points", "expected an array of [p, q] pairs");
    for (const auto& pq : pts) {
      if (!pq.is_array() || pq.size() != 2 || !pq[0].is_number() || !pq[1].is_number())
        f.fail("points", "expected an array of [p, q] pairs");
      spec.points.emplace_back(pq[0].get<double>(), pq[1].get<double>());
    }
  }
  if (f.has("lattice")) {
    Fields lf = f.sub("lattice");
    auto axis = [&](const std::string& key) {
      if (!lf.has(key)) lf.fail(key, "missing [from, to, step]");
      const auto v = lf.numbers(key);
      if (v.size() != 3 || !(v[2] > 0.0) || v[1] < v[0]) lf.fail(key, "expected [from, to, step] with step > 0");
      std::vector<double> out;
      const long count = std::lround(std::floor((v[1] - v[0]) / v[2] + 1e-9)) + 1;
      for (long k = 0; k < count; ++k) out.push_back(v[0] + k * v[2]);
      return out;
    };
    const auto ps = axis("p");
    const auto qs = axis("q");
    lf.finish();
    for (double p : ps)
      for (double q : qs) spec.points.emplace_back(p, q);
  }
  if (f.has("template")) {
    Fields tf = f.sub("template");
    spec.run.base_dir = base_dir;
    read_run(tf, spec.run, false);
  } else {
    spec.run.step.norm_exponents = default_norm_exponents(spec.run.model);
  }
  spec.run.model.n = spec.n;
  if (f.has("blowup_data")) {
    Fields bf = f.sub("blowup_data");
    spec.blowup_lambda = bf.number("lambda", spec.blowup_lambda);
    spec.blowup_core_cells = bf.integer("N_core", spec.blowup_core_cells);
    spec.blowup_ratio = bf.number("ratio", spec.blowup_ratio);
    bf.finish();
  }
  if (f.has("plateau")) {
    Fields pf = f.sub("plateau");
    spec.plateau_tolerance = pf.number("tolerance", spec.plateau_tolerance);
    spec.growth_tolerance = pf.number("growth_tolerance", spec.growth_tolerance);
    pf.finish();
  }
  spec.workers = f.integer("workers", spec.workers);
  f.finish();
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  return spec;
}

PhaseMapSpec load_phase_map_spec(const std::string& path) {
  return parse_phase_map_spec(read_file(path), dir_of(path), path);
}

}  // namespace chemoflow
