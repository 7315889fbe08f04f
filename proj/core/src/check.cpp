#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "rayleigh/errors.hpp"
#include "rayleigh/harness.hpp"
#include "rayleigh/io.hpp"
#include "rayleigh/operator_cache.hpp"
#include "rayleigh/quadrature.hpp"
#include "rayleigh/stationary.hpp"

namespace rayleigh {

bool CheckReport::passed() const {
  for (const auto& i : items)
    if (!i.passed) return false;
  return true;
}

namespace {

class Suite {
 public:
  Suite(CheckReport& r, std::string name, std::ostream& log) : r_(r), name_(std::move(name)), log_(log) {}

  /// value <= limit passes.
  void below(const std::string& item, double value, double limit) {
    add(item, std::isfinite(value) && value <= limit, value, limit, "");
  }
  void add(const std::string& item, bool ok, double value, double limit, const std::string& msg) {
    r_.items.push_back({name_, item, ok, value, limit, msg});
    log_ << (ok ? "PASS " : "FAIL ") << name_ << "." << item << " value=" << format_double(value)
         << " limit=" << format_double(limit) << (msg.empty() ? "" : " (" + msg + ")") << "\n";
  }
  /// Runs body; an exception becomes a failed item.
  template <class F>
  void guard(const std::string& item, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(item, false, 0.0, 0.0, e.what());
    }
  }

 private:
  CheckReport& r_;
  std::string name_;
  std::ostream& log_;
};

Eigen::MatrixXd random_block(const CounterRng& rng, Eigen::Index rows, Eigen::Index cols, std::uint64_t stream) {
  Eigen::MatrixXd b(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      b(i, j) = rng.normal(stream, 2 * static_cast<std::uint64_t>(j * rows + i));
  return b;
}

void grid_suite(const RunConfig& cfg, CheckReport& r, std::ostream& log) {
  Suite s(r, "grid", log);
  s.guard("build", [&] {
    const GridPtr g = build_grid(cfg.grid.n_v, cfg.grid.v_max);
    const auto N = static_cast<Eigen::Index>(g->size());
    const Eigen::VectorXd& mu = g->mu();
    double m0 = 0.0, m2 = 0.0;
    for (Eigen::Index k = 0; k < N; ++k) {
      const double v1 = g->node(static_cast<std::size_t>(k))[0];
      m0 += mu[k];
      m2 += v1 * v1 * mu[k];
    }
    s.below("mass_defect", std::abs(g->weight() * m0 - 1.0), 1e-6);
    s.below("second_moment_defect", std::abs(g->weight() * m2 - 1.0), 1e-6);
    const Eigen::MatrixXd& q = g->kernel_basis();
    const Eigen::MatrixXd gram = g->weight() * q.transpose() * q;
    s.below("kernel_basis_orthonormal", (gram - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-12);
    const Eigen::MatrixXd chi = g->invariants();
    s.below("projection_idempotent",
            (project_P_exact(*g, project_P_exact(*g, chi)) - chi).norm() / chi.norm(), 1e-12);
  });
}

void weight_suite(const RunConfig& cfg, const CheckOptions& opt, CheckReport& r, std::ostream& log) {
  Suite s(r, "weight", log);
  try {
    const Weight w(opt.beta);
    const GridPtr g = build_grid(cfg.grid.n_v, cfg.grid.v_max);
    const VelocityField f = apply_weight(VelocityField(g, g->sqrt_mu()), w);
    double defect = 0.0, outer = 0.0;
    const double c = std::pow(2.0 * std::numbers::pi, -0.75);
    for (std::size_t i = 0; i < g->size(); ++i) {
      const Vec3& v = g->node(i);
      const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
      const double expect = c * std::exp((opt.beta - 0.25) * v2);
      defect = std::max(defect, std::abs(f[i] - expect) / expect);
      if (std::abs(v[0]) > g->v_max() - g->spacing()) outer = std::max(outer, f[i]);
    }
    s.below("weighted_sqrt_mu_defect", defect, 1e-12);
    s.below("weighted_sqrt_mu_decays", outer / c, 0.05);
    s.add("beta_admissible", true, opt.beta, 0.125, "");
  } catch (const ConfigError& e) {
    s.add("beta_admissible", false, opt.beta, 0.125, e.what());
  }
}

void operator_suite(const RunConfig& cfg, Backend backend, const CheckOptions& opt, CheckReport& r,
                    std::ostream& log) {
  Suite s(r, "operator_" + to_string(backend), log);
  s.guard("build", [&] {
    const GridPtr g = build_grid(cfg.grid.n_v, cfg.grid.v_max);
    CollisionSettings cs = collision_settings(cfg);
    cs.backend = backend;
    const OperatorPtr op = CollisionOperator::build(g, cs);
    const auto N = static_cast<Eigen::Index>(g->size());
    const double w = g->weight();

    const Eigen::MatrixXd chi = g->invariants();
    const Eigen::MatrixXd Lchi = op->apply(chi);
    double kernel = 0.0;
    for (Eigen::Index k = 0; k < 5; ++k) kernel = std::max(kernel, Lchi.col(k).norm() / chi.col(k).norm());
    s.below("kernel_annihilation", kernel, 1e-12);

    const CounterRng rng(opt.seed);
    const Eigen::Index pairs = 100;
    const Eigen::MatrixXd f = random_block(rng, N, pairs, 1), h = random_block(rng, N, pairs, 2);
    const Eigen::MatrixXd Lf = op->apply(f), Lh = op->apply(h);
    double sym = 0.0, pos = 0.0;
    for (Eigen::Index j = 0; j < pairs; ++j) {
      const double a = w * Lf.col(j).dot(h.col(j)), b = w * f.col(j).dot(Lh.col(j));
      sym = std::max(sym, std::abs(a - b) / (w * Lf.col(j).norm() * h.col(j).norm()));
      const double q = w * Lf.col(j).dot(f.col(j));
      pos = std::max(pos, -q / (w * f.col(j).squaredNorm()));
    }
    s.below("self_adjoint_defect", sym, 1e-12);
    s.below("negative_quadratic_form", pos, 1e-12);
    const double gap = op->spectral_gap();
    s.add("spectral_gap_positive", gap > 0.0, gap, 0.0, "");
  });
}

void profile_suite(const RunConfig& cfg, CheckReport& r, std::ostream& log) {
  Suite s(r, "profile", log);
  s.guard("build", [&] {
    const double u_b = cfg.profile.u_b > 0.0 ? cfg.profile.u_b : 0.05;
    const RayleighProfile p = make_profile(u_b, cfg.profile.kappa_mode == "fixed" ? cfg.profile.kappa : 1.0,
                                           cfg.profile.delta);
    s.below("wall_value_defect", std::abs(eval_u1(p, 0.3, 0.0) - u_b), 0.0);
    double worst = 0.0;
    for (int k = 0; k <= 4; ++k) {
      const double t = 0.125 * k;
      const double L = std::sqrt(4.0 * p.kappa * (t + p.delta));
      // composite Simpson on [0, 12 L]; the integrand is below 1e-60 beyond
      const int n = 4000;
      const double h = 12.0 * L / n;
      double sum = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double u = eval_u1(p, t, i * h);
        const double c = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += c * u * u;
      }
      const double quad = std::sqrt(sum * h / 3.0);
      worst = std::max(worst, std::abs(fluid_norm_oracles(p, t).l2_u - quad) / quad);
    }
    s.below("l2_closed_form_vs_quadrature", worst, 1e-8);
  });
}

void expansion_suite(const RunConfig& cfg, CheckReport& r, std::ostream& log) {
  Suite s(r, "expansion", log);
  s.guard("build", [&] {
    RunConfig c = cfg;
    if (c.profile.u_b <= 0.0) c.profile.u_b = 0.05;
    c.profile.kappa_mode = "computed";
    const Model m = build_model(c, true, false);
    const VelocityGrid& g = *m.grid;
    std::vector<double> xs;
    for (int i = 0; i < 16; ++i) xs.push_back(0.25 * i);
    const double t = 0.2;
    const Sources src = m.terms->build_sources(m.profile, t, xs, c.slab.epsilon);
    s.below("Ph1_ratio", project_P_exact(g, src.h1).norm() / src.h1.norm(), 1e-2);
    const Eigen::MatrixXd f2 = m.terms->build_f2(m.profile, t, xs);
    const Eigen::MatrixXd micro = f2 - project_P_exact(g, f2);
    s.below("f2_cross_form_defect", (micro - m.terms->build_f2_micro_cross(m.profile, t, xs)).norm() / micro.norm(),
            1e-8);
    const auto mom = moments_exact(g, f2);
    s.below("f2_b_moment", mom.block(1, 0, 3, mom.cols()).cwiseAbs().maxCoeff(), 1e-10);
  });
}

void stationary_suite(const RunConfig& cfg, CheckReport& r, std::ostream& log) {
  Suite s(r, "stationary", log);
  s.guard("build", [&] {
    const GridPtr g = build_grid(cfg.grid.n_v, cfg.grid.v_max);
    CollisionSettings cs = collision_settings(cfg);
    cs.backend = Backend::BGK;
    const OperatorPtr op = CollisionOperator::build(g, cs);
    Eigen::VectorXd v1v2 = g->invariants().col(1);
    for (std::size_t i = 0; i < g->size(); ++i) v1v2[static_cast<Eigen::Index>(i)] *= g->node(i)[1];
    const StationaryProblem pb = make_stationary(0.01, g);
    s.below("G1_residual", residual_G1(pb, *op), 1e-10 * norm_l2_v(*g, v1v2));
    s.below("boundary_trace", boundary_trace_max(pb), 0.0);
    const auto rows = farfield_mismatch(*g, {0.01, 0.02, 0.04});
    double lo = rows[0].m_over_alpha, hi = lo, glo = rows[0].gap2_over_alpha2, ghi = glo;
    for (const auto& x : rows) {
      lo = std::min(lo, x.m_over_alpha);
      hi = std::max(hi, x.m_over_alpha);
      glo = std::min(glo, x.gap2_over_alpha2);
      ghi = std::max(ghi, x.gap2_over_alpha2);
    }
    s.below("mismatch_over_alpha_spread", (hi - lo) / hi, 1e-10);
    s.below("gap2_over_alpha2_ratio", ghi / glo, 2.0);
  });
}

void cache_suite(const RunConfig& cfg, CheckReport& r, std::ostream& log) {
  Suite s(r, "cache", log);
  const std::string dir = cfg.collision.cache_dir.empty() ? cache_dir_from_env() : cfg.collision.cache_dir;
  if (dir.empty() || !std::filesystem::is_directory(dir)) {
    s.add("directory", true, 0.0, 0.0, "no cache directory configured");
    return;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".bin") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::size_t bad = 0;
  for (const auto& f : files) {
    try {
      const CacheHeader h = read_cache_header(f);
      (void)read_matrix_cache(f, h.key);
    } catch (const std::exception& e) {
      ++bad;
      s.add(f.filename().string(), false, 0.0, 0.0, e.what());
    }
  }
  s.add("files_intact", bad == 0, static_cast<double>(bad), 0.0, std::to_string(files.size()) + " files read");
}

}  // namespace

CheckReport cmd_check(const RunConfig& cfg, const CheckOptions& opt, std::ostream& log) {
  CheckReport r;
  grid_suite(cfg, r, log);
  weight_suite(cfg, opt, r, log);
  operator_suite(cfg, Backend::BGK, opt, r, log);
  Backend b = Backend::BGK;
  try {
    b = backend_from_string(cfg.collision.backend);
  } catch (const ConfigError&) {
  }
  if (b != Backend::BGK) operator_suite(cfg, b, opt, r, log);
  profile_suite(cfg, r, log);
  expansion_suite(cfg, r, log);
  stationary_suite(cfg, r, log);
  cache_suite(cfg, r, log);
  return r;
}

std::string check_report_json(const CheckReport& r) {
  nlohmann::json j;
  j["passed"] = r.passed();
  j["items"] = nlohmann::json::array();
  for (const auto& i : r.items)
    j["items"].push_back({{"suite", i.suite},
                          {"name", i.name},
                          {"passed", i.passed},
                          {"value", i.value},
                          {"limit", i.limit},
                          {"message", i.message}});
  return j.dump(2) + "\n";
}

}  // namespace rayleigh
