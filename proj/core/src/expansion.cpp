#include "rayleigh/expansion.hpp"

#include <algorithm>
#include <cmath>

#include "rayleigh/errors.hpp"

namespace rayleigh {

namespace {

constexpr int kPairs[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};

Eigen::VectorXd times_v(const VelocityGrid& g, const Eigen::VectorXd& f, int axis) {
  Eigen::VectorXd out(f.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    out[e] = g.node(i)[static_cast<std::size_t>(axis)] * f[e];
  }
  return out;
}

double pattern(int i, int j, int k, int l) {
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  return d(i, k) * d(j, l) + d(i, l) * d(j, k) - 2.0 / 3.0 * d(i, j) * d(k, l);
}

struct Fit {
  double constant = 0.0, residual = 0.0, off = 0.0;
};

Fit fit_isotropic(const Eigen::Matrix<double, 6, 6>& T) {
  double ti = 0.0, ii = 0.0;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      const double I = pattern(kPairs[a][0], kPairs[a][1], kPairs[b][0], kPairs[b][1]);
      ti += T(a, b) * I;
      ii += I * I;
    }
  Fit f;
  f.constant = ti / ii;
  double res = 0.0, off = 0.0;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      const double I = pattern(kPairs[a][0], kPairs[a][1], kPairs[b][0], kPairs[b][1]);
      res += std::pow(T(a, b) - f.constant * I, 2);
      if (I == 0.0) off = std::max(off, std::abs(T(a, b)));
    }
  f.residual = std::sqrt(res) / T.norm();
  f.off = off / std::abs(T(1, 1));
  return f;
}

}  // namespace

int burnett_column(int i, int j) {
  if (i > j) std::swap(i, j);
  for (int c = 0; c < 6; ++c)
    if (kPairs[c][0] == i && kPairs[c][1] == j) return c;
  throw ConfigError("Burnett index out of range");
}

BurnettFields build_burnett(const CollisionOperator& op) {
  const VelocityGrid& g = op.grid();
  const auto N = static_cast<Eigen::Index>(g.size());
  BurnettFields b;
  b.A.resize(N, 6);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec3& v = g.node(n);
    const double r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    const double s = g.sqrt_mu()[static_cast<Eigen::Index>(n)];
    for (int c = 0; c < 6; ++c) {
      const int i = kPairs[c][0], j = kPairs[c][1];
      b.A(static_cast<Eigen::Index>(n), c) = (v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)] -
                                              (i == j ? r2 / 3.0 : 0.0)) * s;
    }
  }
  Eigen::MatrixXd rhs(N, 2);
  rhs.col(0) = b.A.col(1);
  rhs.col(1) = b.A.col(2);
  const Eigen::MatrixXd sol = op.solve_Linv(rhs);
  b.kappa = g.weight() * b.A.col(1).dot(sol.col(0));
  b.phi13 = sol.col(1);
  return b;
}

KappaReport compute_kappa(const CollisionOperator& op) {
  const VelocityGrid& g = op.grid();
  const BurnettFields b = build_burnett(op);
  const Eigen::MatrixXd LA = op.apply(b.A);
  const Eigen::MatrixXd LinvA = op.solve_Linv(b.A);
  const Eigen::Matrix<double, 6, 6> T = g.weight() * (b.A.transpose() * LA);
  const Eigen::Matrix<double, 6, 6> Ti = g.weight() * (b.A.transpose() * LinvA);
  KappaReport r;
  r.kappa_inverse = b.kappa;
  r.kappa_direct = T(1, 1);
  const Fit direct = fit_isotropic(T);
  r.fit_constant = direct.constant;
  r.tensor_residual = direct.residual;
  r.off_pattern = direct.off;
  r.inverse_fit_residual = fit_isotropic(Ti).residual;
  return r;
}

Coeffs f1_coefficients(const RayleighProfile& p, double t, double x3) {
  return {0.0, eval_u1(p, t, x3), 0.0, 0.0};
}

Coeffs f2_coefficients(const RayleighProfile& p, double t, double x3) {
  const double u = eval_u1(p, t, x3);
  const ProfileDerivatives d = eval_derivatives(p, t, x3);
  return {u * u / 3.0, 0.0, u * u / 2.0, -d.du_dx3};
}

Coeffs expansion_coefficients(const RayleighProfile& p, double t, double x3, double eps) {
  return f1_coefficients(p, t, x3) + eps * f2_coefficients(p, t, x3);
}

Coeffs expansion_dt_coefficients(const RayleighProfile& p, double t, double x3, double eps) {
  const double u = eval_u1(p, t, x3);
  const ProfileDerivatives d = eval_derivatives(p, t, x3);
  return {eps * 2.0 * u * d.du_dt / 3.0, d.du_dt, eps * u * d.du_dt, -eps * d.d2u_dtdx3};
}

ExpansionTerms::ExpansionTerms(OperatorPtr op, bool include_gamma) : op_(std::move(op)) {
  const VelocityGrid& g = op_->grid();
  const auto N = static_cast<Eigen::Index>(g.size());
  burnett_ = build_burnett(*op_);
  basis_.resize(N, 4);
  basis_.col(0) = g.sqrt_mu();
  basis_.col(1) = g.invariants().col(1);
  basis_.col(2) = burnett_.A.col(0);
  basis_.col(3) = burnett_.phi13;

  gamma_included_ = include_gamma && op_->backend() == Backend::HardSphere;
  if (gamma_included_) pairs_ = op_->gamma_kernel().apply_pairs(basis_);

  h1_fields_ = Eigen::MatrixXd::Zero(N, 7);
  h1_fields_.col(0) = basis_.col(1);
  h1_fields_.col(1) = times_v(g, basis_.col(0), 2);
  h1_fields_.col(2) = times_v(g, basis_.col(2), 2);
  h1_fields_.col(3) = times_v(g, basis_.col(3), 2);
  h2_fields_ = Eigen::MatrixXd::Zero(N, 9);
  h2_fields_.col(0) = basis_.col(0);
  h2_fields_.col(1) = basis_.col(2);
  h2_fields_.col(2) = basis_.col(3);
  if (gamma_included_) {
    auto G = [&](std::size_t a, std::size_t b) { return pairs_[GammaKernel::pair_index(a, b, 4)]; };
    h1_fields_.col(4) = G(0, 1);
    h1_fields_.col(5) = G(1, 2);
    h1_fields_.col(6) = G(1, 3);
    h2_fields_.col(3) = G(0, 0);
    h2_fields_.col(4) = G(0, 2);
    h2_fields_.col(5) = G(0, 3);
    h2_fields_.col(6) = G(2, 2);
    h2_fields_.col(7) = G(2, 3);
    h2_fields_.col(8) = G(3, 3);
  }
}

Eigen::MatrixXd ExpansionTerms::build_f1(const RayleighProfile& p, double t, const std::vector<double>& xs) const {
  Eigen::MatrixXd out(basis_.rows(), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = basis_ * f1_coefficients(p, t, xs[k]);
  return out;
}

Eigen::MatrixXd ExpansionTerms::build_f2(const RayleighProfile& p, double t, const std::vector<double>& xs) const {
  Eigen::MatrixXd out(basis_.rows(), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = basis_ * f2_coefficients(p, t, xs[k]);
  return out;
}

Eigen::MatrixXd ExpansionTerms::build_expansion(const RayleighProfile& p, double t, const std::vector<double>& xs,
                                                double eps) const {
  Eigen::MatrixXd out(basis_.rows(), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = basis_ * expansion_coefficients(p, t, xs[k], eps);
  return out;
}

Eigen::MatrixXd ExpansionTerms::build_f2_micro_cross(const RayleighProfile& p, double t,
                                                     const std::vector<double>& xs) const {
  const VelocityGrid& g = op_->grid();
  const Eigen::VectorXd e1 = g.invariants().col(1);
  // v3 d3 f1 = u' v1 v3 sqrt mu and f1^2 / (2 sqrt mu) = u^2 v1^2 sqrt mu / 2.
  Eigen::MatrixXd shapes(e1.size(), 2);
  shapes.col(0) = times_v(g, e1, 2);
  shapes.col(1) = times_v(g, e1, 0);
  const Eigen::VectorXd transport = op_->solve_Linv(Eigen::MatrixXd(shapes.col(0))).col(0);
  const Eigen::MatrixXd sq = shapes.col(1) - project_P_exact(g, Eigen::MatrixXd(shapes.col(1)));
  Eigen::MatrixXd out(e1.size(), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double u = eval_u1(p, t, xs[k]);
    const double ux = eval_derivatives(p, t, xs[k]).du_dx3;
    out.col(static_cast<Eigen::Index>(k)) = -ux * transport + 0.5 * u * u * sq.col(0);
  }
  return out;
}

Sources ExpansionTerms::build_sources(const RayleighProfile& p, double t, const std::vector<double>& xs,
                                      double eps) const {
  const auto nx = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(7, nx), c2 = Eigen::MatrixXd::Zero(9, nx);
  for (Eigen::Index k = 0; k < nx; ++k) {
    const double x = xs[static_cast<std::size_t>(k)];
    const double u = eval_u1(p, t, x);
    const ProfileDerivatives d = eval_derivatives(p, t, x);
    const Coeffs f2 = f2_coefficients(p, t, x);
    // h1 = -dt f1 - v3 d3 f2 + 2 Gamma(f1, f2)
    c1(0, k) = -d.du_dt;
    c1(1, k) = -2.0 * u * d.du_dx3 / 3.0;
    c1(2, k) = -u * d.du_dx3;
    c1(3, k) = d.d2u_dx3x3;
    c1(4, k) = 2.0 * u * f2[0];
    c1(5, k) = 2.0 * u * f2[2];
    c1(6, k) = 2.0 * u * f2[3];
    // h2 = -dt f2 + Gamma(f2, f2)
    c2(0, k) = -2.0 * u * d.du_dt / 3.0;
    c2(1, k) = -u * d.du_dt;
    c2(2, k) = d.d2u_dtdx3;
    c2(3, k) = f2[0] * f2[0];
    c2(4, k) = 2.0 * f2[0] * f2[2];
    c2(5, k) = 2.0 * f2[0] * f2[3];
    c2(6, k) = f2[2] * f2[2];
    c2(7, k) = 2.0 * f2[2] * f2[3];
    c2(8, k) = f2[3] * f2[3];
  }
  Sources s;
  s.h1 = h1_fields_ * c1;
  s.h2 = h2_fields_ * c2;
  s.h = s.h1 / std::sqrt(eps) + std::sqrt(eps) * s.h2;
  return s;
}

double discrete_c_mu(const VelocityGrid& grid) {
  double flux = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v3 = grid.node(i)[2];
    if (v3 < 0.0) flux -= v3 * grid.mu()[static_cast<Eigen::Index>(i)];
  }
  return 1.0 / (grid.weight() * flux);
}

namespace {

/// exp(-|v - (s,0,0)|^2 / 2) normalised to unit discrete flux over v3 > 0.
Eigen::VectorXd unit_flux_maxwellian(const VelocityGrid& g, double shift) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(g.size()));
  double flux = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3& v = g.node(i);
    const double d0 = v[0] - shift;
    const double val = std::exp(-0.5 * (d0 * d0 + v[1] * v[1] + v[2] * v[2]));
    m[static_cast<Eigen::Index>(i)] = val;
    if (v[2] > 0.0) flux += v[2] * val;
  }
  return m / (g.weight() * flux);
}

}  // namespace

WallData build_wall_data(const RayleighProfile& p, const GridPtr& grid, double eps, const Eigen::VectorXd& f2_at_wall,
                         const Weight& w) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw ConfigError("Knudsen number eps must lie in (0, 1)");
  const VelocityGrid& g = *grid;
  if (static_cast<std::size_t>(f2_at_wall.size()) != g.size()) throw GridMismatch("f2 trace does not match the grid");
  WallData d;
  d.eps = eps;
  d.u_b = p.u_b;
  d.M_w = unit_flux_maxwellian(g, eps * p.u_b);
  d.c_mu_mu = unit_flux_maxwellian(g, 0.0);
  d.c_mu = discrete_c_mu(g);

  const int n = g.n_per_axis();
  double shell = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto m = g.multi_index(i);
    if (std::any_of(m.begin(), m.end(), [n](int k) { return k == 0 || k == n - 1; }))
      shell = std::max(shell, d.M_w[static_cast<Eigen::Index>(i)]);
  }
  d.tail_ratio = shell / d.M_w.maxCoeff();
  if (d.tail_ratio > 1e-3)
    throw ConfigError("wall Maxwellian not resolved by the velocity grid (tail ratio " + std::to_string(d.tail_ratio) +
                      ")");

  double j2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    const double v3 = g.node(i)[2];
    if (v3 < 0.0) j2 -= v3 * f2_at_wall[e] * g.sqrt_mu()[e];
  }
  j2 *= g.weight();

  const double se = std::sqrt(eps);
  d.r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3& v = g.node(i);
    if (v[2] <= 0.0) continue;
    const auto e = static_cast<Eigen::Index>(i);
    const double sm = g.sqrt_mu()[e];
    const double mu = g.mu()[e];
    const double first = d.M_w[e] - d.c_mu_mu[e];
    const double second = first - d.c_mu_mu[e] * eps * p.u_b * v[0];
    const double quarter = std::pow(mu, -0.75);
    d.taylor_gap_1 = std::max(d.taylor_gap_1, std::abs(first) * quarter);
    d.taylor_gap_2 = std::max(d.taylor_gap_2, std::abs(second) * quarter);
    d.r[e] = se * d.M_w[e] / sm * j2 - se * f2_at_wall[e] + second / (d.c_mu * eps * se * sm);
    d.linf_w_r = std::max(d.linf_w_r, std::abs(w(v) * d.r[e]));
  }
  return d;
}

Eigen::MatrixXd apply_Ltilde(const GammaDictionary& dict, const Eigen::Matrix<double, 4, Eigen::Dynamic>& coeffs,
                             const Eigen::MatrixXd& R) {
  if (dict.M.size() != 4) throw BackendUnsupported("Ltilde needs the four-field Gamma dictionary");
  if (coeffs.cols() != 1 && coeffs.cols() != R.cols()) throw GridMismatch("one coefficient set per column expected");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(R.rows(), R.cols());
  for (std::size_t k = 0; k < 4; ++k) {
    const Eigen::MatrixXd Y = dict.M[k] * R;
    const auto kk = static_cast<Eigen::Index>(k);
    if (coeffs.cols() == 1)
      out.noalias() += (2.0 * coeffs(kk, 0)) * Y;
    else
      out.noalias() += Y * (2.0 * coeffs.row(kk).transpose()).asDiagonal();
  }
  return out;
}

VelocityField apply_Ltilde(const GammaDictionary& dict, const Coeffs& coeffs, const VelocityField& R) {
  const Eigen::Matrix<double, 4, Eigen::Dynamic> c = coeffs;
  return VelocityField(R.grid_ptr(), apply_Ltilde(dict, c, Eigen::MatrixXd(R.values())).col(0));
}

VelocityField apply_Ltilde_t(const GammaDictionary& dict, const Coeffs& dt_coeffs, const VelocityField& R) {
  return apply_Ltilde(dict, dt_coeffs, R);
}

}  // namespace rayleigh
