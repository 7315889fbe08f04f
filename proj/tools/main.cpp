#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rayleigh/config.hpp"
#include "rayleigh/errors.hpp"
#include "rayleigh/harness.hpp"
#include "rayleigh/io.hpp"
#include "rayleigh/operator_cache.hpp"
#include "rayleigh/parallel.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kNumerical = 2, kAcceptance = 3 };

struct Options {
  std::string config;
  std::string out;
  std::string mode;
  std::string backend;
  std::optional<double> epsilon;
  std::optional<int> workers;
  double beta = 0.125;
  std::string report;
};

rayleigh::RunConfig load(const Options& o) {
  rayleigh::RunConfig cfg = o.config.empty() ? rayleigh::RunConfig{} : rayleigh::parse_config(o.config);
  if (!o.mode.empty()) cfg.slab.mode = o.mode;
  if (!o.backend.empty()) cfg.collision.backend = o.backend;
  if (o.epsilon) cfg.slab.epsilon = *o.epsilon;
  if (!o.out.empty()) cfg.output.directory = o.out;
  if (cfg.collision.cache_dir.empty()) cfg.collision.cache_dir = rayleigh::cache_dir_from_env();
  rayleigh::validate(cfg);
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
  rayleigh::set_workers(o.workers ? *o.workers : rayleigh::workers_from_env());
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic slab simulator for the diffusive limit around the Rayleigh shear profile"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "INI or JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", o.out, "output directory (overrides output.directory)");
    sub->add_option("--backend", o.backend, "collision backend: bgk | hardsphere");
    sub->add_option("--workers", o.workers, "worker threads (overrides RAYLEIGH_WORKERS)");
  };
  auto* check = app.add_subcommand("check", "run the invariant suites");
  auto* kappa = app.add_subcommand("kappa", "viscosity of the configured operator");
  auto* profile = app.add_subcommand("profile", "shear profile norms");
  auto* expansion = app.add_subcommand("expansion", "expansion terms and wall gaps");
  auto* run = app.add_subcommand("run", "one slab run");
  auto* sweep = app.add_subcommand("sweep", "slab runs over the epsilon list with a rate fit");
  auto* stationary = app.add_subcommand("stationary", "stationary half-space construction");
  for (auto* s : {check, kappa, profile, expansion, run, sweep, stationary}) common(s);
  for (auto* s : {run, sweep, expansion}) {
    s->add_option("--mode", o.mode, "remainder | direct_bgk | direct_hs");
    s->add_option("--epsilon", o.epsilon, "Knudsen number for single runs");
  }
  check->add_option("--beta", o.beta, "weight exponent exercised by the weight suite");
  check->add_option("--report", o.report, "write the JSON report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    const rayleigh::RunConfig cfg = load(o);
    const std::filesystem::path out = cfg.output.directory;
    if (*check) {
      rayleigh::CheckOptions opt;
      opt.beta = o.beta;
      const rayleigh::CheckReport r = rayleigh::cmd_check(cfg, opt, std::cerr);
      const std::string js = rayleigh::check_report_json(r);
      if (!o.report.empty()) rayleigh::write_file_atomic(o.report, js);
      std::cout << js;
      return r.passed() ? kOk : kAcceptance;
    }
    if (*kappa) std::cout << rayleigh::cmd_kappa(cfg, out);
    if (*profile) std::cout << rayleigh::cmd_profile(cfg, out);
    if (*expansion) std::cout << rayleigh::cmd_expansion(cfg, out);
    if (*run) std::cout << rayleigh::cmd_run(cfg, out, std::cerr);
    if (*stationary) std::cout << rayleigh::cmd_stationary(cfg, out);
    if (*sweep) {
      const rayleigh::SweepResult r = rayleigh::cmd_sweep(cfg, out, std::cerr);
      for (const auto& row : r.rows)
        std::cout << rayleigh::format_double(row.epsilon) << " E=" << rayleigh::format_double(row.E)
                  << " M=" << rayleigh::format_double(row.M_norm) << " N=" << rayleigh::format_double(row.N_norm)
                  << (row.ok ? "" : " FAILED: " + row.error) << "\n";
      if (r.fit.degenerate)
        std::cout << "rate: degenerate (" << r.fit.reason << ")\n";
      else
        std::cout << "rate p = " << rayleigh::format_double(r.fit.p) << "\n";
      for (const auto& row : r.rows)
        if (!row.ok) return kNumerical;
    }
    return kOk;
  } catch (const rayleigh::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kValidation;
  } catch (const rayleigh::BackendUnsupported& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}
