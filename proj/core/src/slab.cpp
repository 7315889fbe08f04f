#include "rayleigh/slab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rayleigh/errors.hpp"

namespace rayleigh {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

inline double minmod(double a, double b) {
  if (a > 0.0 && b > 0.0) return std::min(a, b);
  if (a < 0.0 && b < 0.0) return std::max(a, b);
  return 0.0;
}

Eigen::MatrixXd moment_basis(const VelocityGrid& g) {
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(g.size()), 5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3& v = g.node(i);
    const auto e = static_cast<Eigen::Index>(i);
    phi(e, 0) = 1.0;
    phi(e, 1) = v[0];
    phi(e, 2) = v[1];
    phi(e, 3) = v[2];
    phi(e, 4) = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  }
  return phi;
}

}  // namespace

std::string to_string(SlabMode m) {
  switch (m) {
    case SlabMode::Remainder: return "remainder";
    case SlabMode::DirectBGK: return "direct_bgk";
    case SlabMode::DirectHS: return "direct_hs";
  }
  return "unknown";
}

SlabMode slab_mode_from_string(const std::string& s) {
  if (s == "remainder") return SlabMode::Remainder;
  if (s == "direct_bgk" || s == "direct") return SlabMode::DirectBGK;
  if (s == "direct_hs") return SlabMode::DirectHS;
  throw ConfigError("unknown slab mode '" + s + "' (expected remainder, direct_bgk or direct_hs)");
}

Eigen::VectorXd discrete_maxwellian(const VelocityGrid& grid, const Vec5& alpha) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3& v = grid.node(i);
    m[static_cast<Eigen::Index>(i)] = std::exp(alpha[0] + alpha[1] * v[0] + alpha[2] * v[1] + alpha[3] * v[2] +
                                               alpha[4] * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  }
  return m;
}

Vec5 discrete_maxwellian_exponents(const VelocityGrid& grid, const Eigen::VectorXd& F, const Vec5* warm) {
  const Eigen::MatrixXd phi = moment_basis(grid);
  const Vec5 target = grid.weight() * (phi.transpose() * F);
  const double rho = target[0];
  if (!(rho > 0.0)) throw NumericalError("non-realisable moments: density " + std::to_string(rho));
  const Eigen::Vector3d u = target.segment<3>(1) / rho;
  const double T = (target[4] / rho - u.squaredNorm()) / 3.0;
  if (!(T > 0.0)) throw NumericalError("non-realisable moments: temperature " + std::to_string(T));

  Vec5 a;
  if (warm != nullptr && warm->allFinite()) {
    a = *warm;
  } else {
    a[4] = -0.5 / T;
    a.segment<3>(1) = u / T;
    a[0] = std::log(rho / std::pow(2.0 * std::numbers::pi * T, 1.5)) - 0.5 * u.squaredNorm() / T;
  }
  const double scale = target.cwiseAbs().maxCoeff();
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd m = discrete_maxwellian(grid, a);
    const Vec5 resid = grid.weight() * (phi.transpose() * m) - target;
    if (resid.cwiseAbs().maxCoeff() <= 4e-16 * scale && it > 0) return a;
    const Mat5 J = grid.weight() * (phi.transpose() * m.asDiagonal() * phi);
    const Vec5 step = J.ldlt().solve(resid);
    a -= step;
    if (!a.allFinite()) break;
    if (step.cwiseAbs().maxCoeff() < 1e-15 * (1.0 + a.cwiseAbs().maxCoeff())) return a;
  }
  const Eigen::VectorXd m = discrete_maxwellian(grid, a);
  const Vec5 resid = grid.weight() * (phi.transpose() * m) - target;
  if (a.allFinite() && resid.cwiseAbs().maxCoeff() <= 1e-12 * scale) return a;
  throw NumericalError("discrete Maxwellian solve did not converge");
}

SlabSolver::SlabSolver(SlabConfig cfg, RayleighProfile profile, std::shared_ptr<const ExpansionTerms> terms)
    : cfg_(std::move(cfg)), profile_(profile), terms_(std::move(terms)) {
  if (!terms_) throw ConfigError("slab solver needs expansion terms");
  op_ = terms_->op_ptr();
  grid_ = op_->grid_ptr();
  if (!(cfg_.eps > 0.0) || !(cfg_.eps < 1.0)) throw ConfigError("eps must lie in (0, 1)");
  if (cfg_.n_x < 4) throw ConfigError("slab needs at least 4 spatial cells");
  if (!(cfg_.t_final > 0.0)) throw ConfigError("t_final must be positive");
  if (!(cfg_.cfl > 0.0) || cfg_.cfl > 1.0) throw ConfigError("cfl must lie in (0, 1]");
  if (cfg_.transport_order != 1 && cfg_.transport_order != 2) throw ConfigError("transport_order must be 1 or 2");
  if (!(cfg_.output_interval > 0.0)) throw ConfigError("output_interval must be positive");
  if (std::llround(cfg_.t_final / cfg_.output_interval) < 2)
    throw ConfigError("t_final must cover at least two output intervals");
  if (!(cfg_.node_offset > 0.0) || cfg_.node_offset > 1.0) throw ConfigError("node_offset must lie in (0, 1]");
  (void)Weight(cfg_.beta);
  if (std::abs(profile_.kappa - terms_->kappa()) > 1e-12 * terms_->kappa())
    throw ConfigError("profile kappa differs from the operator's viscosity");

  const Backend b = op_->backend();
  if (cfg_.mode == SlabMode::DirectBGK && b != Backend::BGK) throw ConfigError("direct_bgk mode needs the bgk backend");
  if (cfg_.mode == SlabMode::DirectHS && b != Backend::HardSphere)
    throw ConfigError("direct_hs mode needs the hard_sphere backend");

  const double x_min = 8.0 * std::sqrt(4.0 * profile_.kappa * (cfg_.t_final + profile_.delta));
  if (cfg_.x_max == 0.0) cfg_.x_max = x_min;
  if (cfg_.x_max < x_min * (1.0 - 1e-12))
    throw ConfigError("x_max " + std::to_string(cfg_.x_max) + " below the far-field bound " + std::to_string(x_min));
  dx_ = cfg_.x_max / cfg_.n_x;
  for (int i = 0; i < cfg_.n_x; ++i) xs_.push_back((i + cfg_.node_offset) * dx_);

  const auto N = static_cast<Eigen::Index>(grid_->size());
  v3pos_.resize(N);
  v3neg_.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double v3 = grid_->node(static_cast<std::size_t>(i))[2];
    v3pos_[i] = std::max(v3, 0.0);
    v3neg_[i] = std::min(v3, 0.0);
  }
  if (cfg_.R0.size() != 0 && (cfg_.R0.rows() != N || cfg_.R0.cols() != cfg_.n_x))
    throw GridMismatch("initial remainder has the wrong shape");

  wall0_ = wall_data(0.0);
  if (cfg_.mode == SlabMode::Remainder) {
    if (!(wall0_.taylor_gap_1 < 0.5))
      throw ConfigError("wall Maxwellian gap " + std::to_string(wall0_.taylor_gap_1) + " too large for the remainder boundary condition");
    if (b != Backend::HardSphere) {
      cfg_.include_Ltilde = false;
      cfg_.include_GammaRR = false;
    } else if (cfg_.include_Ltilde) {
      dict_ = build_gamma_dictionary(*op_, terms_->basis());
    }
  }
}

double SlabSolver::dt_max() const { return cfg_.cfl * cfg_.eps * dx_ / grid_->v_max(); }

double SlabSolver::dt() const {
  const long n_out = std::llround(cfg_.t_final / cfg_.output_interval);
  const double interval = cfg_.t_final / static_cast<double>(n_out);
  const double k = std::ceil(interval / dt_max() - 1e-9);
  return interval / k;
}

WallData SlabSolver::wall_data(double t) const {
  const Eigen::MatrixXd f2w = terms_->build_f2(profile_, t, {0.0});
  return build_wall_data(profile_, grid_, cfg_.eps, f2w.col(0), Weight(cfg_.beta));
}

SlabState SlabSolver::init_state() const {
  const VelocityGrid& g = *grid_;
  const auto N = static_cast<Eigen::Index>(g.size());
  const double eps = cfg_.eps;
  SlabState s;
  Eigen::MatrixXd R0 = cfg_.R0.size() ? cfg_.R0 : Eigen::MatrixXd::Zero(N, cfg_.n_x);
  if (cfg_.mode == SlabMode::Remainder) {
    s.values = R0;
    return s;
  }
  const Eigen::MatrixXd g0 = eps * terms_->build_expansion(profile_, 0.0, xs_, eps) + eps * std::sqrt(eps) * R0;
  const Eigen::MatrixXd F0 = (g0.array().colwise() * g.sqrt_mu().array()).matrix().colwise() + g.mu();
  s.min_F = F0.minCoeff();
  if (s.min_F < 0.0) throw ConfigError("negative initial distribution (min " + std::to_string(s.min_F) + "); u_b / eps too large for the grid");
  if (cfg_.mode == SlabMode::DirectHS) {
    s.values = g0;
    return s;
  }
  s.values = F0;
  s.alpha.resize(5, cfg_.n_x);
  for (int i = 0; i < cfg_.n_x; ++i) s.alpha.col(i) = discrete_maxwellian_exponents(g, F0.col(i));
  return s;
}

Eigen::MatrixXd SlabSolver::transport_increment(const Eigen::MatrixXd& U, const Eigen::VectorXd& ghost_wall,
                                                const Eigen::VectorXd& ghost_far, double dt) const {
  const int n = cfg_.n_x;
  const Eigen::Index N = U.rows();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N, n);
  if (cfg_.transport_order == 2) {
#pragma omp parallel for schedule(static)
    for (int i = 1; i < n - 1; ++i)
      for (Eigen::Index k = 0; k < N; ++k) S(k, i) = 0.5 * minmod(U(k, i) - U(k, i - 1), U(k, i + 1) - U(k, i));
  }
  // flux through face j (between cells j-1 and j), j = 0..n
  Eigen::MatrixXd flux(N, n + 1);
#pragma omp parallel for schedule(static)
  for (int j = 0; j <= n; ++j) {
    Eigen::ArrayXd left, right;
    if (j == 0)
      left = ghost_wall.array();
    else
      left = (U.col(j - 1) + S.col(j - 1)).array();
    if (j == n)
      right = ghost_far.array();
    else
      right = (U.col(j) - S.col(j)).array();
    flux.col(j) = (v3pos_ * left + v3neg_ * right).matrix();
  }
  const double c = -dt / (cfg_.eps * dx_);
  Eigen::MatrixXd inc(N, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) inc.col(i) = c * (flux.col(i + 1) - flux.col(i));
  return inc;
}

double SlabSolver::wall_defect(const Eigen::MatrixXd& U, const Eigen::VectorXd& ghost_wall,
                               const Eigen::VectorXd& density) const {
  const Eigen::ArrayXd out = v3pos_ * ghost_wall.array() + v3neg_ * U.col(0).array();
  return std::abs(grid_->weight() * (out * density.array()).sum());
}

void SlabSolver::check_finite(const Eigen::MatrixXd& U, double t) const {
  if (U.allFinite()) return;
  for (Eigen::Index i = 0; i < U.cols(); ++i)
    for (Eigen::Index k = 0; k < U.rows(); ++k)
      if (!std::isfinite(U(k, i))) {
        std::ostringstream os;
        os << "non-finite value at t = " << t << ", x cell " << i << ", velocity node " << k;
        throw NumericalError(os.str());
      }
}

StepStats SlabSolver::step(SlabState& s, double dt) const {
  if (!(dt > 0.0) || dt > dt_max() * (1.0 + 1e-12))
    throw ConfigError("time step " + std::to_string(dt) + " violates the CFL bound " + std::to_string(dt_max()));
  StepStats st;
  switch (cfg_.mode) {
    case SlabMode::Remainder: st = step_remainder(s, dt); break;
    case SlabMode::DirectBGK: st = step_direct_bgk(s, dt); break;
    case SlabMode::DirectHS: st = step_direct_hs(s, dt); break;
  }
  check_finite(s.values, s.t + dt);
  s.t += dt;
  ++s.steps;
  return st;
}

StepStats SlabSolver::step_remainder(SlabState& s, double dt) const {
  const VelocityGrid& g = *grid_;
  const double eps = cfg_.eps;
  const Eigen::MatrixXd& R = s.values;
  const auto N = R.rows();

  const WallData wall = wall_data(s.t);
  const double jR = wall_bound_flux(g, R.col(0));
  Eigen::VectorXd ghost_wall = Eigen::VectorXd::Zero(N);
  for (Eigen::Index k = 0; k < N; ++k)
    if (v3pos_[k] > 0.0) ghost_wall[k] = wall.M_w[k] / g.sqrt_mu()[k] * jR + wall.r[k];
  const Eigen::VectorXd ghost_far = Eigen::VectorXd::Zero(N);

  StepStats st;
  st.wall_flux_defect = wall_defect(R, ghost_wall, g.sqrt_mu());

  Eigen::MatrixXd next = R + transport_increment(R, ghost_wall, ghost_far, dt);
  if (profile_.u_b != 0.0) next += dt * terms_->build_sources(profile_, s.t, xs_, eps).h;
  if (cfg_.include_Ltilde && profile_.u_b != 0.0) {
    Eigen::Matrix<double, 4, Eigen::Dynamic> c(4, cfg_.n_x);
    for (int i = 0; i < cfg_.n_x; ++i) c.col(i) = expansion_coefficients(profile_, s.t, xs_[static_cast<std::size_t>(i)], eps);
    next += (dt / eps) * apply_Ltilde(dict_, c, R);
  }
  if (cfg_.include_GammaRR) {
    const GammaKernel& gk = op_->gamma_kernel();
    const double c = dt / std::sqrt(eps);
    for (int i = 0; i < cfg_.n_x; ++i) {
      if (R.col(i).isZero(0.0)) continue;
      next.col(i) += c * gk.apply(R.col(i), R.col(i));
    }
  }
  op_->solve_shifted(dt / (eps * eps), next);
  s.values = std::move(next);
  return st;
}

StepStats SlabSolver::step_direct_bgk(SlabState& s, double dt) const {
  const VelocityGrid& g = *grid_;
  const double eps = cfg_.eps;
  const Eigen::MatrixXd& F = s.values;
  const auto N = F.rows();

  double jF = 0.0;
  for (Eigen::Index k = 0; k < N; ++k) jF -= v3neg_[k] * F(k, 0);
  jF *= g.weight();
  const Eigen::VectorXd ghost_wall = wall0_.M_w * jF;
  StepStats st;
  st.wall_flux_defect = wall_defect(F, ghost_wall, Eigen::VectorXd::Ones(N));

  Eigen::MatrixXd next = F + transport_increment(F, ghost_wall, g.mu(), dt);
  const double lambda = dt * op_->settings().nu0 / (eps * eps);
  std::vector<std::string> failures(static_cast<std::size_t>(cfg_.n_x));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < cfg_.n_x; ++i) {
    try {
      const Vec5 warm = s.alpha.col(i);
      const Vec5 a = discrete_maxwellian_exponents(g, next.col(i), &warm);
      s.alpha.col(i) = a;
      next.col(i) = (next.col(i) + lambda * discrete_maxwellian(g, a)) / (1.0 + lambda);
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (int i = 0; i < cfg_.n_x; ++i)
    if (!failures[static_cast<std::size_t>(i)].empty())
      throw NumericalError("x cell " + std::to_string(i) + ": " + failures[static_cast<std::size_t>(i)]);
  st.min_F = next.minCoeff();
  s.min_F = std::min(s.min_F, st.min_F);
  s.values = std::move(next);
  return st;
}

StepStats SlabSolver::step_direct_hs(SlabState& s, double dt) const {
  const VelocityGrid& g = *grid_;
  const double eps = cfg_.eps;
  const Eigen::MatrixXd& G = s.values;
  const auto N = G.rows();

  // M_w j(F) - mu split as (M_w - c_mu mu) j(mu) + M_w j(G) with c_mu j(mu) = 1, so that
  // zero data gives an exactly zero ghost
  const double jG = wall_bound_flux(g, G.col(0));
  const double jmu = 1.0 / wall0_.c_mu;
  Eigen::VectorXd ghost_wall = Eigen::VectorXd::Zero(N);
  for (Eigen::Index k = 0; k < N; ++k)
    if (v3pos_[k] > 0.0)
      ghost_wall[k] = ((wall0_.M_w[k] - wall0_.c_mu_mu[k]) * jmu + wall0_.M_w[k] * jG) / g.sqrt_mu()[k];
  StepStats st;
  st.wall_flux_defect = wall_defect(G, ghost_wall, g.sqrt_mu());

  Eigen::MatrixXd next = G + transport_increment(G, ghost_wall, Eigen::VectorXd::Zero(N), dt);
  const GammaKernel& gk = op_->gamma_kernel();
  const double c = dt / (eps * eps);
  for (int i = 0; i < cfg_.n_x; ++i) {
    if (G.col(i).isZero(0.0)) continue;
    next.col(i) += c * gk.apply(G.col(i), G.col(i));
  }
  op_->solve_shifted(c, next);
  st.min_F = ((next.array().colwise() * g.sqrt_mu().array()).colwise() + g.mu().array()).minCoeff();
  s.min_F = std::min(s.min_F, st.min_F);
  s.values = std::move(next);
  return st;
}

Eigen::MatrixXd SlabSolver::remainder_of(const SlabState& s) const {
  const double eps = cfg_.eps;
  if (cfg_.mode == SlabMode::Remainder) return s.values;
  const VelocityGrid& g = *grid_;
  const Eigen::MatrixXd ex = terms_->build_expansion(profile_, s.t, xs_, eps);
  Eigen::MatrixXd gpert;
  if (cfg_.mode == SlabMode::DirectHS)
    gpert = s.values;
  else
    gpert = ((s.values.colwise() - g.mu()).array().colwise() / g.sqrt_mu().array()).matrix();
  return (gpert - eps * ex) / (eps * std::sqrt(eps));
}

double SlabSolver::deviation(const SlabState& s) const {
  const double eps = cfg_.eps;
  const VelocityGrid& g = *grid_;
  switch (cfg_.mode) {
    case SlabMode::Remainder:
      return expansion_deviation_remainder(g, terms_->build_f2(profile_, s.t, xs_), s.values, eps, dx_);
    case SlabMode::DirectBGK:
      return expansion_deviation_direct(g, s.values, terms_->build_f1(profile_, s.t, xs_), eps, dx_);
    case SlabMode::DirectHS:
      return norm_l2_xv(g, s.values / eps - terms_->build_f1(profile_, s.t, xs_), dx_);
  }
  return 0.0;
}

SlabRun SlabSolver::run(const std::function<void(const NormRow&)>& on_row) const {
  SlabRun out;
  const double dt = this->dt();
  out.dt = dt;
  const long n_out = std::llround(cfg_.t_final / cfg_.output_interval);
  const long per_out = std::llround(cfg_.t_final / static_cast<double>(n_out) / dt);
  if (profile_.u_b * std::sqrt(cfg_.t_final) >= 0.2)
    out.warnings.push_back("u_b sqrt(t_final) >= 0.2: outside the small-data regime");
  if (cfg_.mode == SlabMode::Remainder && op_->backend() == Backend::BGK)
    out.warnings.push_back("bgk backend: Gamma terms dropped from sources, Ltilde and Gamma(R,R)");

  WallData wall = wall0_;
  NormAccumulator acc(grid_, op_->backend() == Backend::BGK
                                 ? Eigen::VectorXd(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid_->size()),
                                                                             op_->settings().nu0))
                                 : op_->nu(),
                      cfg_.eps, dx_, Weight(cfg_.beta), &wall);
  auto emit = [&](const std::optional<NormRow>& r) {
    if (!r) return;
    out.norms.push_back(*r);
    if (on_row) on_row(*r);
  };

  SlabState s = init_state();
  emit(acc.add_snapshot(0.0, remainder_of(s)));
  out.deviation.emplace_back(0.0, deviation(s));
  for (long o = 1; o <= n_out; ++o) {
    for (long k = 0; k < per_out; ++k) {
      acc.accumulate_step(remainder_of(s), dt);
      const StepStats st = step(s, dt);
      out.max_wall_flux_defect = std::max(out.max_wall_flux_defect, st.wall_flux_defect);
      if (cfg_.mode != SlabMode::Remainder && st.min_F < -cfg_.positivity_tolerance) {
        std::ostringstream os;
        os << "negative distribution " << st.min_F << " at t = " << s.t;
        out.warnings.push_back(os.str());
      }
    }
    s.t = static_cast<double>(o * per_out) * dt;
    if (cfg_.mode == SlabMode::Remainder) wall = wall_data(s.t);
    emit(acc.add_snapshot(s.t, remainder_of(s)));
    out.deviation.emplace_back(s.t, deviation(s));
  }
  emit(acc.finish());
  for (const auto& d : out.deviation) out.E = std::max(out.E, d.second);

  // estimate monitor
  const NormRow& last = out.norms.back();
  const double energy = last.M_norm + last.N_norm;
  MacroscopicL6 l6;
  for (const auto& r : out.norms) {
    l6.a = std::max(l6.a, r.l6.a);
    l6.b = std::max(l6.b, r.l6.b);
    l6.c = std::max(l6.c, r.l6.c);
  }
  const double ub = profile_.u_b;
  out.monitor.push_back(monitor_ratio("l6_bound_a", l6.a, energy));
  out.monitor.push_back(monitor_ratio("l6_bound_b", l6.b, energy));
  out.monitor.push_back(monitor_ratio("l6_bound_c", l6.c, energy));
  out.monitor.push_back(monitor_ratio("taylor_first", wall0_.taylor_gap_1, cfg_.eps * ub));
  out.monitor.push_back(monitor_ratio("taylor_second", wall0_.taylor_gap_2, cfg_.eps * cfg_.eps * ub));
  const FluidNormReport fl = fluid_norm_oracles(profile_, cfg_.t_final);
  const double tau = cfg_.t_final + profile_.delta;
  out.monitor.push_back(monitor_ratio("fluid_l2_u", fl.l2_u, ub * std::pow(tau, 0.25)));
  out.monitor.push_back(monitor_ratio("fluid_l2_sum", fl.l2_dt + fl.l2_dx + fl.l2_dtdx + fl.l2_dxx + fl.l2_dtt, ub));
  out.monitor.push_back(monitor_ratio(
      "fluid_linf_sum", fl.linf_u + fl.linf_dt + fl.linf_dx + fl.linf_dtdx + fl.linf_dxx + fl.linf_dtt, ub));
  out.monitor.push_back(monitor_ratio("remainder_energy", energy, ub * std::sqrt(cfg_.t_final)));
  out.final_state = std::move(s);
  return out;
}

}  // namespace rayleigh
