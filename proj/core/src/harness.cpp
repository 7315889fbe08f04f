#include "rayleigh/harness.hpp"

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "rayleigh/errors.hpp"
#include "rayleigh/io.hpp"
#include "rayleigh/parallel.hpp"
#include "rayleigh/slab.hpp"
#include "rayleigh/stationary.hpp"

namespace rayleigh {

using nlohmann::json;

namespace {

json config_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : config_entries(cfg)) j[k] = v;
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

Model build_model(const RunConfig& cfg, bool with_terms, bool with_gamma) {
  Model m;
  m.grid = build_grid(cfg.grid.n_v, cfg.grid.v_max);
  m.op = CollisionOperator::build(m.grid, collision_settings(cfg));
  double kappa = 0.0;
  if (with_terms) {
    m.terms = std::make_shared<const ExpansionTerms>(m.op, with_gamma);
    kappa = m.terms->kappa();
  } else {
    kappa = build_burnett(*m.op).kappa;
  }
  if (cfg.profile.kappa_mode == "fixed" && std::abs(cfg.profile.kappa - kappa) > 1e-6 * kappa)
    throw ConfigError("profile.kappa = " + format_double(cfg.profile.kappa) +
                      " disagrees with the operator viscosity " + format_double(kappa));
  m.profile = make_profile(cfg.profile.u_b, kappa, cfg.profile.delta);
  return m;
}

std::string cmd_kappa(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const GridPtr grid = build_grid(cfg.grid.n_v, cfg.grid.v_max);
  const OperatorPtr op = CollisionOperator::build(grid, collision_settings(cfg));
  const KappaReport k = compute_kappa(*op);
  json j;
  j["backend"] = cfg.collision.backend;
  j["kappa_inverse_form"] = k.kappa_inverse;
  j["kappa_direct_form"] = k.kappa_direct;
  j["tensor_fit_constant"] = k.fit_constant;
  j["tensor_residual"] = k.tensor_residual;
  j["off_pattern_ratio"] = k.off_pattern;
  j["inverse_tensor_residual"] = k.inverse_fit_residual;
  const std::string s = dump(j);
  write_file_atomic(out_dir / "kappa.json", s);
  return s;
}

std::string cmd_profile(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  double kappa = cfg.profile.kappa;
  if (cfg.profile.kappa_mode == "computed") {
    const GridPtr grid = build_grid(cfg.grid.n_v, cfg.grid.v_max);
    kappa = build_burnett(*CollisionOperator::build(grid, collision_settings(cfg))).kappa;
  }
  const RayleighProfile p = make_profile(cfg.profile.u_b, kappa, cfg.profile.delta);
  std::vector<std::vector<double>> rows;
  double max_ratio = 0.0;
  const int n = 20;
  for (int i = 0; i <= n; ++i) {
    const double t = cfg.slab.t_final * i / n;
    const FluidNormReport r = fluid_norm_oracles(p, t);
    rows.push_back({t, r.l2_u, r.l2_dt, r.l2_dx, r.l2_dtdx, r.l2_dxx, r.l2_dtt, r.linf_u, r.linf_dt, r.linf_dx,
                    r.linf_dtdx, r.linf_dxx, r.linf_dtt, r.ratio_l2_u, r.ratio_l2_sum, r.ratio_linf_sum});
    max_ratio = std::max(max_ratio, r.ratio_linf_sum);
  }
  write_file_atomic(out_dir / "profile.csv",
                    csv_table({"t", "l2_u", "l2_dt", "l2_dx", "l2_dtdx", "l2_dxx", "l2_dtt", "linf_u", "linf_dt",
                               "linf_dx", "linf_dtdx", "linf_dxx", "linf_dtt", "ratio_l2_u", "ratio_l2_sum",
                               "ratio_linf_sum"},
                              rows));
  json j;
  j["u_b"] = p.u_b;
  j["kappa"] = p.kappa;
  j["delta"] = p.delta;
  j["kappa_mode"] = cfg.profile.kappa_mode;
  j["max_ratio_linf_sum"] = max_ratio;
  const std::string s = dump(j);
  write_file_atomic(out_dir / "profile.json", s);
  return s;
}

std::string cmd_expansion(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const Model m = build_model(cfg);
  const KappaReport k = compute_kappa(*m.op);
  const VelocityGrid& g = *m.grid;
  const double eps = cfg.slab.epsilon;
  const double x_max = cfg.slab.x_max > 0.0
                           ? cfg.slab.x_max
                           : 8.0 * std::sqrt(4.0 * m.profile.kappa * (cfg.slab.t_final + m.profile.delta));
  std::vector<double> xs;
  for (int i = 0; i < cfg.slab.n_x; ++i) xs.push_back((i + 0.5) * x_max / cfg.slab.n_x);
  const double t = 0.0;
  const Eigen::MatrixXd f1 = m.terms->build_f1(m.profile, t, xs);
  const Eigen::MatrixXd f2 = m.terms->build_f2(m.profile, t, xs);
  const Eigen::MatrixXd cross = m.terms->build_f2_micro_cross(m.profile, t, xs);
  const Sources src = m.terms->build_sources(m.profile, t, xs, eps);
  const auto m1 = moments_exact(g, f1);
  const auto m2 = moments_exact(g, f2);
  const Eigen::MatrixXd Ph1 = project_P_exact(g, src.h1);

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    rows.push_back({xs[i], eval_u1(m.profile, t, xs[i]), m1(1, c), m2(0, c), m2(1, c), m2(3, c), m2(4, c),
                    std::sqrt(g.weight()) * src.h1.col(c).norm(), std::sqrt(g.weight()) * Ph1.col(c).norm()});
  }
  write_file_atomic(out_dir / "expansion.csv",
                    csv_table({"x3", "u1", "b1_f1", "a_f2", "b1_f2", "b3_f2", "c_f2", "h1_l2v", "Ph1_l2v"}, rows));

  const Eigen::VectorXd f2_wall = m.terms->build_f2(m.profile, t, {0.0}).col(0);
  const WallData wall = build_wall_data(m.profile, m.grid, eps, f2_wall, Weight(cfg.slab.beta));
  const Eigen::MatrixXd micro = f2 - project_P_exact(g, f2);
  json j;
  j["kappa_inverse_form"] = k.kappa_inverse;
  j["kappa_direct_form"] = k.kappa_direct;
  j["tensor_residual"] = k.tensor_residual;
  j["off_pattern_ratio"] = k.off_pattern;
  j["epsilon"] = eps;
  j["taylor_gap_1"] = wall.taylor_gap_1;
  j["taylor_gap_2"] = wall.taylor_gap_2;
  j["linf_w_r"] = wall.linf_w_r;
  j["Ph1_ratio"] = Ph1.norm() / src.h1.norm();
  j["cross_form_defect"] = (micro - cross).norm() / micro.norm();
  j["gamma_terms_included"] = m.terms->gamma_included();
  const std::string s = dump(j);
  write_file_atomic(out_dir / "expansion.json", s);
  return s;
}

std::string cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const SlabMode mode = slab_mode_from_string(cfg.slab.mode);
  const Model m = build_model(cfg, true, mode == SlabMode::Remainder);
  const SlabSolver solver(slab_config(cfg, cfg.slab.epsilon), m.profile, m.terms);
  std::vector<std::vector<double>> rows;
  auto flush = [&] { write_file_atomic(out_dir / "norms.csv", csv_table(norm_csv_header(), rows)); };
  SlabRun run;
  try {
    run = solver.run([&](const NormRow& r) { rows.push_back(norm_csv_values(r)); });
  } catch (...) {
    flush();
    throw;
  }
  flush();
  for (const auto& w : run.warnings) log << "warning: " << w << "\n";

  json mon = json::object();
  for (const auto& e : run.monitor) {
    json x;
    x["lhs"] = e.lhs;
    x["rhs"] = e.rhs;
    if (e.vacuous)
      x["ratio"] = "vacuous";
    else
      x["ratio"] = e.ratio;
    mon[e.id] = x;
  }
  write_file_atomic(out_dir / "monitor.json", dump(mon));

  std::vector<std::vector<double>> dev;
  for (const auto& [t, e] : run.deviation) dev.push_back({t, e});
  write_file_atomic(out_dir / "deviation.csv", csv_table({"t", "deviation"}, dev));

  const double wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json man;
  man["config"] = config_json(cfg);
  man["backend"] = cfg.collision.backend;
  man["mode"] = cfg.slab.mode;
  man["kappa_used"] = m.profile.kappa;
  man["toggles"] = {{"include_Ltilde", solver.config().include_Ltilde},
                    {"include_GammaRR", solver.config().include_GammaRR},
                    {"gamma_terms_in_sources", m.terms->gamma_included()}};
  man["x_max"] = solver.config().x_max;
  man["dt"] = run.dt;
  man["E"] = run.E;
  man["max_wall_flux_defect"] = run.max_wall_flux_defect;
  man["workers"] = current_workers();
  man["code_version"] = code_version();
  man["wall_clock_s"] = wall_clock;
  man["warnings"] = run.warnings;
  const std::string s = dump(man);
  write_file_atomic(out_dir / "run_manifest.json", s);
  return s;
}

std::string cmd_stationary(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const GridPtr grid = build_grid(cfg.grid.n_v, cfg.grid.v_max);
  const OperatorPtr op = CollisionOperator::build(grid, collision_settings(cfg));
  const std::vector<double> alphas = {0.01, 0.02, 0.04};
  json j;
  const StationaryProblem pb = make_stationary(alphas.front(), grid);
  j["backend"] = cfg.collision.backend;
  j["residual"] = residual_G1(pb, *op);
  j["boundary_trace_max"] = boundary_trace_max(pb);
  j["U_at_y_max"] = pb.U[pb.U.size() - 1];
  json table = json::array();
  for (const auto& r : farfield_mismatch(*grid, alphas))
    table.push_back({{"alpha", r.alpha}, {"m", r.m}, {"m_over_alpha", r.m_over_alpha}, {"gap2", r.gap2},
                     {"gap2_over_alpha2", r.gap2_over_alpha2}});
  j["mismatch_table"] = table;
  const std::string s = dump(j);
  write_file_atomic(out_dir / "stationary.json", s);
  return s;
}

}  // namespace rayleigh
