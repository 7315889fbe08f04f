#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "rayleigh/errors.hpp"
#include "rayleigh/harness.hpp"
#include "rayleigh/io.hpp"
#include "rayleigh/parallel.hpp"
#include "rayleigh/slab.hpp"

namespace rayleigh {

using nlohmann::json;

RateFit fit_rate(const std::vector<std::pair<double, double>>& eps_E) {
  if (eps_E.size() < 3) throw ConfigError("rate fit needs at least 3 (eps, E) pairs");
  std::vector<double> sorted;
  for (const auto& pr : eps_E) sorted.push_back(pr.first);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError("rate fit needs distinct eps values");
  RateFit f;
  for (const auto& [eps, E] : eps_E) {
    if (!(eps > 0.0)) throw ConfigError("rate fit needs eps > 0");
    if (!(E > 0.0)) {
      f.degenerate = true;
      f.reason = E == 0.0 ? "E = 0 for some eps" : "non-positive or non-finite E";
      return f;
    }
  }
  const double n = static_cast<double>(eps_E.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [eps, E] : eps_E) {
    sx += std::log(eps);
    sy += std::log(E);
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [eps, E] : eps_E) {
    const double dx = std::log(eps) - mx;
    sxy += dx * (std::log(E) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw ConfigError("rate fit needs distinct eps values");
  f.p = sxy / sxx;
  for (std::size_t i = 1; i < eps_E.size(); ++i) {
    const auto& [e0, E0] = eps_E[i - 1];
    const auto& [e1, E1] = eps_E[i];
    f.pairwise.push_back(std::log(E0 / E1) / std::log(e0 / e1));
  }
  return f;
}

namespace {

std::string eps_tag(double eps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

}  // namespace

SweepResult cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  const auto& list = cfg.sweep.epsilons;
  if (list.size() < 3) throw ConfigError("sweep.epsilons needs at least 3 values");
  const SlabMode mode = slab_mode_from_string(cfg.slab.mode);
  const Model m = build_model(cfg, true, mode == SlabMode::Remainder);

  SweepResult res;
  std::vector<std::pair<double, double>> fit_pairs;
  std::vector<std::string> warnings;
  // Runs are sequential; every run uses the configured worker count internally.
  for (const double eps : list) {
    SweepRow row;
    row.epsilon = eps;
    const auto start = std::chrono::steady_clock::now();
    try {
      const SlabSolver solver(slab_config(cfg, eps), m.profile, m.terms);
      const SlabRun run = solver.run();
      std::vector<std::vector<double>> rows;
      for (const auto& r : run.norms) rows.push_back(norm_csv_values(r));
      write_file_atomic(out_dir / ("norms_eps" + eps_tag(eps) + ".csv"), csv_table(norm_csv_header(), rows));
      const EnergyNorms en = energy_norms(run.norms);
      row.E = run.E;
      row.M_norm = en.M;
      row.N_norm = en.N;
      row.ok = true;
      for (const auto& w : run.warnings) warnings.push_back("eps " + eps_tag(eps) + ": " + w);
      fit_pairs.emplace_back(eps, run.E);
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
      log << "eps " << eps_tag(eps) << " failed: " << e.what() << "\n";
    }
    row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log << "eps " << eps_tag(eps) << ": E = " << format_double(row.E) << ", " << row.runtime_s << " s\n";
    res.rows.push_back(row);
  }

  json jf;
  if (fit_pairs.size() >= 3) {
    res.fit = fit_rate(fit_pairs);
    jf["degenerate"] = res.fit.degenerate;
    if (res.fit.degenerate) {
      jf["p"] = "degenerate";
      jf["reason"] = res.fit.reason;
    } else {
      jf["p"] = res.fit.p;
      jf["pairwise"] = res.fit.pairwise;
    }
  } else {
    res.fit.degenerate = true;
    res.fit.reason = "fewer than 3 successful runs";
    jf["degenerate"] = true;
    jf["p"] = "degenerate";
    jf["reason"] = res.fit.reason;
  }

  // runtime_s stays out of the CSV so that repeated sweeps compare byte for byte.
  std::string csv = "epsilon,E,M_norm,N_norm,ok\n";
  for (const auto& r : res.rows)
    csv += format_double(r.epsilon) + "," + format_double(r.E) + "," + format_double(r.M_norm) + "," +
           format_double(r.N_norm) + "," + (r.ok ? "1" : "0") + "\n";
  write_file_atomic(out_dir / "sweep.csv", csv);

  json js;
  js["rows"] = json::array();
  for (const auto& r : res.rows) {
    json x{{"epsilon", r.epsilon}, {"E", r.E},           {"M_norm", r.M_norm},
           {"N_norm", r.N_norm},   {"runtime_s", r.runtime_s}, {"ok", r.ok}};
    if (!r.ok) x["error"] = r.error;
    js["rows"].push_back(x);
  }
  js["fit"] = jf;
  js["warnings"] = warnings;
  write_file_atomic(out_dir / "sweep.json", js.dump(2) + "\n");

  json man;
  man["command"] = "sweep";
  man["config"] = json::object();
  for (const auto& [k, v] : config_entries(cfg)) man["config"][k] = v;
  man["kappa_used"] = m.profile.kappa;
  man["workers"] = current_workers();
  man["code_version"] = code_version();
  write_file_atomic(out_dir / "run_manifest.json", man.dump(2) + "\n");
  return res;
}

}  // namespace rayleigh
