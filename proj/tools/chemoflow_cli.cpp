#include <iostream>

#include <CLI11.hpp>

#include "chemoflow/commands.hpp"
#include "chemoflow/log.hpp"

int main(int argc, char** argv) {
  using namespace chemoflow;
  log::init_from_env();

  CLI::App app{"Radial simulator and blow-up certificate for a two-species chemotaxis system"};
  app.require_subcommand(1);

  std::string sim_config, sim_out;
  auto* sim = app.add_subcommand("simulate", "run a configured simulation");
  sim->add_option("--config", sim_config, "run config (JSON)")->required();
  sim->add_option("--out", sim_out, "output directory");

  CertifyRequest req;
  std::string sampling = "normal", cert_out;
  bool expect_fail = false;
  auto* cert = app.add_subcommand("certify", "build and check the blow-up subsolution");
  cert->add_option("--n", req.model.n, "space dimension")->required();
  cert->add_option("--p", req.model.p, "diffusion exponent")->required();
  cert->add_option("--q", req.model.q, "sensitivity exponent")->required();
  cert->add_option("--R", req.model.R, "ball radius");
  cert->add_option("--mu-star", req.mu_star, "larger of the two means");
  cert->add_option("--mu-min", req.mu_min, "smaller of the two means");
  cert->add_option("--kD", req.model.kD, "diffusion coefficient");
  cert->add_option("--kS", req.model.kS, "sensitivity coefficient");
  cert->add_option("--sampling", sampling, "normal or dense")->check(CLI::IsMember({"normal", "dense"}));
  cert->add_option("--workers", req.workers, "threads for sampling")->check(CLI::PositiveNumber);
  cert->add_option("--out", cert_out, "directory for certificate.json");
  cert->add_flag("--expect-fail", expect_fail, "succeed only if the pipeline fails");

  std::string pm_spec, pm_out;
  int pm_workers = 0;
  auto* pm = app.add_subcommand("phase-map", "sweep a (p, q) lattice");
  pm->add_option("--spec", pm_spec, "phase-map spec (JSON)")->required();
  pm->add_option("--out", pm_out, "output directory")->required();
  pm->add_option("--workers", pm_workers, "worker threads (default from spec)");

  std::string cmp_config, cmp_out;
  auto* cmp = app.add_subcommand("compare", "compare a blow-up run with the subsolution");
  cmp->add_option("--config", cmp_config, "run config with a subsolution block")->required();
  cmp->add_option("--out", cmp_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*sim) return cmd_simulate(sim_config, sim_out);
    if (*cert) {
      req.dense = sampling == "dense";
      return cmd_certify(req, expect_fail, cert_out);
    }
    if (*pm) return cmd_phase_map(pm_spec, pm_out, pm_workers);
    if (*cmp) return cmd_compare(cmp_config, cmp_out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}
