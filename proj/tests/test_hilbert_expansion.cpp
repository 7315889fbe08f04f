#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rayleigh/errors.hpp"
#include "rayleigh/expansion.hpp"
#include "rayleigh/gamma.hpp"
#include "support.hpp"

using namespace rayleigh;

namespace {

OperatorPtr make_op(Backend b, int n, double v_max = 6.0, double nu0 = 1.0) {
  CollisionSettings s;
  s.backend = b;
  s.nu0 = nu0;
  s.gamma_angular_order = 4;
  return CollisionOperator::build(build_grid(n, v_max), s);
}

const ExpansionTerms& bgk_terms() {
  static const ExpansionTerms t(make_op(Backend::BGK, 12), false);
  return t;
}

std::vector<double> x_nodes(int n, double dx) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back((i + 0.5) * dx);
  return xs;
}

}  // namespace

TEST_CASE("BGK viscosity is 1/nu0") {
  for (double nu0 : {0.5, 1.0, 2.0}) {
    const KappaReport k = compute_kappa(*make_op(Backend::BGK, 12, 6.0, nu0));
    CHECK(test::rel(k.kappa_inverse, 1.0 / nu0) < 1e-3);
    CHECK(test::rel(k.kappa_direct, nu0) < 1e-3);
  }
}

TEST_CASE("hard-sphere Burnett tensor pattern") {
  const KappaReport k = compute_kappa(*make_op(Backend::HardSphere, 12));
  MESSAGE("HS n=12: kappa_inverse " << k.kappa_inverse << ", residual " << k.tensor_residual << ", off-pattern "
                                    << k.off_pattern);
  CHECK(k.kappa_inverse > 0.0);
  CHECK(k.off_pattern < 0.02);
  CHECK(k.tensor_residual < 0.02);
}

TEST_CASE("f1 moments") {
  const ExpansionTerms& T = bgk_terms();
  const GridPtr g = T.op().grid_ptr();
  const RayleighProfile p = make_profile(0.05, T.kappa(), 0.5);
  const std::vector<double> xs = {0.0, 0.5, 1.0, 3.0, 12.0};
  const Eigen::MatrixXd f1 = T.build_f1(p, 0.2, xs);
  const auto m = moments_exact(*g, f1);
  CHECK(std::abs(m(1, 0) - 0.05) < 1e-14);
  for (Eigen::Index c = 0; c < f1.cols(); ++c) {
    CHECK(std::abs(m(1, c) - eval_u1(p, 0.2, xs[static_cast<std::size_t>(c)])) < 1e-14);
    CHECK(std::abs(m(0, c)) < 1e-15);
    CHECK(std::abs(m(2, c)) < 1e-15);
    CHECK(std::abs(m(3, c)) < 1e-15);
    CHECK(std::abs(m(4, c)) < 1e-15);
  }
  // far field follows the erfc tail
  CHECK(norm_l2_v(*g, f1.col(4)) < 1e-12);
  CHECK(norm_l2_v(*g, f1.col(3)) < norm_l2_v(*g, f1.col(2)));
}

TEST_CASE("f2 moments and zero data") {
  const ExpansionTerms& T = bgk_terms();
  const VelocityGrid& g = T.op().grid();
  const RayleighProfile p = make_profile(0.05, T.kappa(), 0.5);
  const std::vector<double> xs = x_nodes(20, 0.3);
  const Eigen::MatrixXd f2 = T.build_f2(p, 0.1, xs);
  const auto m = moments_exact(g, f2);
  for (Eigen::Index c = 0; c < f2.cols(); ++c) {
    const double u = eval_u1(p, 0.1, xs[static_cast<std::size_t>(c)]);
    CHECK(std::abs(m(0, c) - u * u / 3.0) < 1e-12);
    CHECK(m.block(1, c, 3, 1).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(m(4, c)) < 1e-12);
  }
  const RayleighProfile zero = make_profile(0.0, T.kappa(), 0.5);
  CHECK(T.build_f2(zero, 0.1, xs).norm() == 0.0);
  const Sources s0 = T.build_sources(zero, 0.1, xs, 0.2);
  CHECK(s0.h1.norm() == 0.0);
  CHECK(s0.h2.norm() == 0.0);
}

TEST_CASE("cross-form consistency at random (t, x3) (property)") {
  for (const ExpansionTerms* T : {&bgk_terms()}) {
    const VelocityGrid& g = T->op().grid();
    const RayleighProfile p = make_profile(0.05, T->kappa(), 0.5);
    const CounterRng rng(test::kSeed);
    for (std::uint64_t k = 0; k < 20; ++k) {
      const double t = 0.5 * rng.uniform(3, k), x = 4.0 * rng.uniform(4, k);
      const Eigen::MatrixXd f2 = T->build_f2(p, t, {x});
      const Eigen::MatrixXd micro = f2 - project_P_exact(g, f2);
      const Eigen::MatrixXd cross = T->build_f2_micro_cross(p, t, {x});
      CHECK((micro - cross).norm() <= 1e-8 * micro.norm());
    }
  }
}

TEST_CASE("h1 is microscopic and bounded in time") {
  const ExpansionTerms& T = bgk_terms();
  const VelocityGrid& g = T.op().grid();
  const RayleighProfile p = make_profile(0.05, T.kappa(), 0.5);
  const double dx = 0.05;
  const std::vector<double> xs = x_nodes(300, dx);
  double lo = 1e300, hi = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.05 * k;
    const Sources s = T.build_sources(p, t, xs, 0.2);
    CHECK(project_P_exact(g, s.h1).norm() < 1e-2 * s.h1.norm());
    const double l2 = std::sqrt(g.weight() * dx) * s.h1.norm();
    const double r = l2 / (p.u_b * std::pow(t + p.delta, 0.25));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  MESSAGE("|h1| / (u_b (t+delta)^{1/4}) in [" << lo << ", " << hi << "]");
  CHECK(hi / lo < 5.0);
}

TEST_CASE("weighted sup norms of f1, f2 stay within a factor 5 in time") {
  const ExpansionTerms& T = bgk_terms();
  const VelocityGrid& g = T.op().grid();
  const RayleighProfile p = make_profile(0.05, T.kappa(), 0.5);
  const Eigen::ArrayXd quarter = g.mu().array().pow(-0.25);
  const std::vector<double> xs = x_nodes(100, 0.1);
  double lo[2] = {1e300, 1e300}, hi[2] = {0, 0};
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.05 * k;
    const Eigen::MatrixXd f[2] = {T.build_f1(p, t, xs), T.build_f2(p, t, xs)};
    for (int j = 0; j < 2; ++j) {
      const double s = (f[j].array().colwise() * quarter).abs().maxCoeff() / p.u_b;
      lo[j] = std::min(lo[j], s);
      hi[j] = std::max(hi[j], s);
    }
  }
  for (int j = 0; j < 2; ++j) CHECK(hi[j] / lo[j] < 5.0);
}

TEST_CASE("wall Maxwellian has unit outgoing flux and eps-scaled Taylor gaps") {
  const ExpansionTerms& T = bgk_terms();
  const GridPtr g = T.op().grid_ptr();
  const RayleighProfile p = make_profile(0.05, T.kappa(), 0.5);
  const Eigen::VectorXd f2w = T.build_f2(p, 0.0, {0.0}).col(0);
  double lo1 = 1e300, hi1 = 0, lo2 = 1e300, hi2 = 0;
  for (double eps : {0.4, 0.2, 0.1, 0.05}) {
    const WallData w = build_wall_data(p, g, eps, f2w);
    double flux = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i)
      if (g->node(i)[2] > 0.0) flux += g->weight() * g->node(i)[2] * w.M_w[static_cast<Eigen::Index>(i)];
    CHECK(std::abs(flux - 1.0) < 1e-14);
    double half = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i)
      if (g->node(i)[2] < 0.0) half -= g->weight() * g->node(i)[2] * g->mu()[static_cast<Eigen::Index>(i)];
    CHECK(test::rel(w.c_mu, 1.0 / half) < 1e-13);
    CHECK(test::rel(w.c_mu, std::sqrt(2.0 * std::numbers::pi)) < 0.05);
    lo1 = std::min(lo1, w.taylor_gap_1 / eps);
    hi1 = std::max(hi1, w.taylor_gap_1 / eps);
    lo2 = std::min(lo2, w.taylor_gap_2 / (eps * eps));
    hi2 = std::max(hi2, w.taylor_gap_2 / (eps * eps));
  }
  CHECK(hi1 / lo1 < 3.0);
  CHECK(hi2 / lo2 < 3.0);
  CHECK_THROWS_AS(build_wall_data(p, g, 1.5, f2w), ConfigError);
  const RayleighProfile zero = make_profile(0.0, T.kappa(), 0.5);
  const WallData w0 = build_wall_data(zero, g, 0.2, Eigen::VectorXd::Zero(f2w.size()));
  CHECK((w0.M_w - w0.c_mu_mu).cwiseAbs().maxCoeff() == 0.0);
  CHECK(w0.r.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unresolved wall Maxwellian is rejected") {
  const OperatorPtr op = make_op(Backend::BGK, 6, 2.5);
  const ExpansionTerms T(op, false);
  const RayleighProfile p = make_profile(0.05, T.kappa(), 0.5);
  CHECK_THROWS_AS(build_wall_data(p, op->grid_ptr(), 0.2, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(op->grid().size()))),
                  ConfigError);
}

TEST_CASE("Ltilde: dictionary form against direct Gamma") {
  const OperatorPtr op = make_op(Backend::HardSphere, 8, 6.0);
  const ExpansionTerms T(op, true);
  const GridPtr g = op->grid_ptr();
  const GammaDictionary dict = build_gamma_dictionary(*op, T.basis());
  const RayleighProfile p = make_profile(0.05, T.kappa(), 0.5);
  const auto N = static_cast<Eigen::Index>(g->size());
  const VelocityField R(g, test::normal_vector(N, 61).cwiseProduct(g->sqrt_mu()));
  const CounterRng rng(test::kSeed);
  const double t = 0.5 * rng.uniform(5, 0), x = 2.0 * rng.uniform(6, 0), eps = 0.2;
  const Coeffs c = expansion_coefficients(p, t, x, eps);
  const VelocityField f(g, T.basis() * c);
  const Eigen::VectorXd direct = 2.0 * apply_Gamma(*op, f, R).values();
  const Eigen::VectorXd via = apply_Ltilde(dict, c, R).values();
  CHECK((via - direct).norm() <= 1e-8 * direct.norm());

  const VelocityField R3(g, 3.0 * R.values());
  CHECK((apply_Ltilde(dict, c, R3).values() - 3.0 * via).norm() <= 1e-13 * via.norm());
  CHECK(apply_Ltilde(dict, Coeffs::Zero(), R).values().norm() == 0.0);

  // time derivative: at the wall only eps d_t f2 contributes
  const Coeffs dt0 = expansion_dt_coefficients(p, t, 0.0, eps);
  CHECK(dt0[1] == 0.0);
  const Coeffs dtx = expansion_dt_coefficients(p, t, x, eps);
  const VelocityField Rt = apply_Ltilde_t(dict, dtx, R);
  CHECK((apply_Ltilde_t(dict, dtx, R3).values() - 3.0 * Rt.values()).norm() <= 1e-13 * Rt.values().norm());
  const RayleighProfile zero = make_profile(0.0, T.kappa(), 0.5);
  CHECK(apply_Ltilde_t(dict, expansion_dt_coefficients(zero, t, x, eps), R).values().norm() == 0.0);
  CHECK(apply_Ltilde(dict, expansion_coefficients(zero, t, x, eps), R).values().norm() == 0.0);
}

TEST_CASE("BGK terms drop the Gamma fields") {
  const OperatorPtr op = make_op(Backend::BGK, 8, 6.0);
  const ExpansionTerms T(op, true);
  CHECK_FALSE(T.gamma_included());
  CHECK(T.gamma_pairs().empty());
  CHECK_THROWS_AS(build_gamma_dictionary(*op, T.basis()), BackendUnsupported);
}
