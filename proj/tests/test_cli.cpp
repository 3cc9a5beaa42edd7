#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "chemoflow/commands.hpp"
#include "chemoflow/config.hpp"

using namespace chemoflow;
namespace fs = std::filesystem;

namespace {

const std::string kSource = CHEMOFLOW_SOURCE_DIR;

std::string config_path(const std::string& name) { return kSource + "/configs/" + name; }

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chemoflow_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CHEMOFLOW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

const char* kSmall = R"({
  "model": {"n": 3, "p": 1.0, "q": 0.0},
  "initial": {"kind": "gaussian", "a_u": 2.0, "rho_u": 0.3, "b_u": 0.2, "a_w": 1.0, "rho_w": 0.3, "b_w": 0.2},
  "grid": {"N": 64},
  "diagnostics": {"lyapunov": true},
  "horizon": 0.05
})";

}  // namespace

TEST_CASE("shipped configs load and validate") {
  for (const char* name : {"bounded_p1_q0.json", "existence_pm2_qm1.json", "blowup_p0_q1.json"}) {
    CAPTURE(name);
    const auto cfg = load_run_config(config_path(name));
    CHECK_NOTHROW(cfg.validate());
  }
  const auto spec = load_phase_map_spec(config_path("phase_map_n3.json"));
  CHECK(spec.points.size() == 12);
  CHECK(spec.workers == 4);
}

TEST_CASE("config validation messages") {
  CHECK(error_of(R"({"grid": {"N": 8}})").find("grid.N") != std::string::npos);
  CHECK(error_of(R"({"grid": {"N": 64, "colour": 1}})").find("unknown field 'grid.colour'") != std::string::npos);
  CHECK(error_of(R"({"horizon": -1})").find("horizon") != std::string::npos);
  CHECK(error_of(R"({"model": {"p": "one"}})").find("model.p") != std::string::npos);
  const std::string bad = error_of("{\n  \"horizon\": 1.0,\n  \"grid\": {\"N\": }\n}");
  CHECK(bad.find("<config>:3:") != std::string::npos);
  CHECK(bad.find("malformed JSON") != std::string::npos);
  CHECK(error_of(R"({"initial": {"kind": "table", "path": "no/such/file.csv"}})").find("no/such/file.csv") !=
        std::string::npos);
  CHECK_THROWS_AS(load_run_config("/no/such/config.json"), ValidationError);
}

TEST_CASE("phase map spec validation") {
  CHECK_THROWS_AS(parse_phase_map_spec(R"({"n": 3, "points": []})"), ValidationError);
  CHECK_THROWS_AS(parse_phase_map_spec(R"({"n": 3, "lattice": {"p": [1, 0, 0.5], "q": [0, 1, 0.5]}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_phase_map_spec(R"({"n": 3, "points": [[0, 1]], "template": {"model": {"p": 1}}})"),
                  ValidationError);
  const auto s = parse_phase_map_spec(R"({"n": 3, "lattice": {"p": [0, 1, 0.5], "q": [-1, 0, 1]}})");
  CHECK(s.points.size() == 6);
}

TEST_CASE("identical runs write identical CSV") {
  const auto cfg = parse_run_config(kSmall);
  const auto a = run_simulation(cfg), b = run_simulation(cfg);
  const std::string ca = run_csv(a.report), cb = run_csv(b.report);
  CHECK(ca == cb);
  CHECK(ca.rfind("t,u_max,w_max,mass_u,mass_w,dt,F,D_diss,", 0) == 0);
  CHECK(summary_report(cfg, a) == summary_report(cfg, b));
}

TEST_CASE("empirical verdicts and agreement") {
  RunReport rep;
  for (int k = 0; k <= 100; ++k) {
    RunRecord r;
    r.t = k;
    r.u_max = 1.0 + 0.02 * k;
    rep.records.push_back(r);
  }
  CHECK(empirical_verdict(rep, 0.05, 1e-3) == Empirical::INCONCLUSIVE);  // no plateau
  for (auto& r : rep.records) r.u_max = 1.0 + 1e-4 * r.t;
  CHECK(empirical_verdict(rep, 0.05, 1e-3) == Empirical::INCONCLUSIVE);  // plateau but still creeping up
  for (auto& r : rep.records) r.u_max = 3.0 + std::exp(-0.3 * r.t);
  CHECK(empirical_verdict(rep, 0.05, 1e-3) == Empirical::BOUNDED);
  rep.verdict = Verdict::BLOWUP_DETECTED;
  CHECK(empirical_verdict(rep, 0.05, 1e-3) == Empirical::BLOWUP);
  rep.verdict = Verdict::STEP_COLLAPSE;
  CHECK(empirical_verdict(rep, 0.05, 1e-3) == Empirical::INCONCLUSIVE);

  CHECK(agreement(Regime::FTBU, Empirical::BLOWUP) == "yes");
  CHECK(agreement(Regime::GB, Empirical::BOUNDED) == "yes");
  CHECK(agreement(Regime::GE, Empirical::BOUNDED) == "yes");
  CHECK(agreement(Regime::GB, Empirical::BLOWUP) == "no");
  CHECK(agreement(Regime::UNCLASSIFIED, Empirical::BOUNDED) == "N/A");
  CHECK(agreement(Regime::FTBU, Empirical::INCONCLUSIVE) == "N/A");
}

TEST_CASE("a point on a critical line is reported as N/A") {
  auto spec = parse_phase_map_spec(R"({
    "n": 3, "points": [[0.0, 0.5], [1.0, 0.0]],
    "template": {"grid": {"N": 64}, "horizon": 0.5, "diagnostics": {"lyapunov": false},
                 "initial": {"kind": "gaussian", "mean_u": 1.0, "mean_w": 1.0, "b_u": 0.1, "b_w": 0.1}}
  })");
  const auto pts = run_phase_map(spec, 2);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].theory.tag == Regime::UNCLASSIFIED);
  CHECK(pts[0].agreement == "N/A");
  CHECK(pts[1].theory.tag == Regime::GB);
  const std::string csv = phase_map_csv(pts);
  CHECK(csv.rfind("p,q,theoretical,empirical,agreement", 0) == 0);
}

TEST_CASE("compare refuses data below the thresholds") {
  auto cfg = load_run_config(config_path("blowup_p0_q1.json"));
  cfg.initial.lambda = 0.01;
  CHECK_THROWS_AS(run_compare(cfg), PreconditionError);
}

TEST_CASE("certification through the library") {
  CertifyRequest req;
  req.model.p = 0.0;
  req.model.q = 1.0;
  req.workers = 4;
  const auto a = run_certify(req);
  CHECK(a.certificate.pass);
  CHECK(certificate_report(req, a) == certificate_report(req, run_certify(req)));
  req.dense = true;
  const auto d = run_certify(req);
  CHECK(d.certificate.pass);
  CHECK(d.certificate.samples > a.certificate.samples);
  req.model.p = 2.0;
  CHECK_THROWS_AS(run_certify(req), HypothesisError);
}

TEST_CASE("command line exit codes") {
  CHECK(run_cli("certify --n 3 --p 0 --q 1 --workers 4") == 0);
  CHECK(run_cli("certify --n 3 --p 2 --q 1") == 2);
  CHECK(run_cli("certify --n 3 --p 2 --q 1 --expect-fail") == 0);
  CHECK(run_cli("certify --n 3 --p 0 --q 1 --workers 4 --expect-fail") == 1);
  CHECK(run_cli("certify --n 3 --p 0 --q 1 --sampling sparse") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("simulate --config /no/such.json --out /tmp/x") == 2);

  const fs::path dir = scratch_dir("simulate");
  {
    std::ofstream(dir / "small.json") << kSmall;
  }
  CHECK(run_cli("simulate --config " + (dir / "small.json").string() + " --out " + (dir / "a").string()) == 0);
  CHECK(run_cli("simulate --config " + (dir / "small.json").string() + " --out " + (dir / "b").string()) == 0);
  CHECK(fs::exists(dir / "a" / "summary.json"));
  CHECK(fs::exists(dir / "a" / "sup_norm.svg"));
  CHECK(slurp(dir / "a" / "run.csv") == slurp(dir / "b" / "run.csv"));
  CHECK(!slurp(dir / "a" / "run.csv").empty());
}

TEST_CASE("tabulated initial data relative to the config directory") {
  const fs::path dir = scratch_dir("table");
  std::ofstream(dir / "data.csv") << "r,u,w\n0.0,2.0,1.0\n0.5,1.0,1.0\n1.0,0.5,1.0\n";
  auto cfg = parse_run_config(R"({"initial": {"kind": "table", "path": "data.csv"}, "grid": {"N": 32}, "horizon": 0.01})",
                              dir.string());
  const auto grid = make_grid(cfg, nullptr);
  const auto [u, w] = make_initial_data(cfg, grid, nullptr);
  CHECK(u[0] == doctest::Approx(2.0 - 2.0 * grid.centers()[0]));
  CHECK(w[31] == doctest::Approx(1.0));
  std::ofstream(dir / "bad.csv") << "r,u,w\n0.0,2.0\n";
  cfg.initial.table_path = "bad.csv";
  CHECK_THROWS_AS(make_initial_data(cfg, grid, nullptr), ValidationError);
}
