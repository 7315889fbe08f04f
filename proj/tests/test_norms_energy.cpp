#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "rayleigh/errors.hpp"
#include "rayleigh/expansion.hpp"
#include "rayleigh/norms.hpp"
#include "support.hpp"

using namespace rayleigh;

namespace {

Eigen::VectorXd v_times_sqrt_mu(const VelocityGrid& g, int axis) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i)
    f[static_cast<Eigen::Index>(i)] = g.node(i)[static_cast<std::size_t>(axis)] * g.sqrt_mu()[static_cast<Eigen::Index>(i)];
  return f;
}

/// Feed R(t_k) for t_k = k h, k = 0..n, through an accumulator with `sub` steps per snapshot.
std::vector<NormRow> series(const GridPtr& g, double eps, double dx, int n, double h,
                            const std::function<Eigen::MatrixXd(double)>& R, int sub = 4) {
  NormAccumulator acc(g, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g->size())), eps, dx, Weight(0.125));
  std::vector<NormRow> rows;
  auto keep = [&](const std::optional<NormRow>& r) {
    if (r) rows.push_back(*r);
  };
  keep(acc.add_snapshot(0.0, R(0.0)));
  for (int k = 1; k <= n; ++k) {
    for (int s = 0; s < sub; ++s) {
      const double t = (k - 1) * h + s * h / sub;
      acc.accumulate_step(R(t), h / sub);
    }
    keep(acc.add_snapshot(k * h, R(k * h)));
  }
  keep(acc.finish());
  return rows;
}

}  // namespace

TEST_CASE("P_gamma examples") {
  const GridPtr g = build_grid(12, 6.0);
  const Eigen::VectorXd s = g->sqrt_mu();
  CHECK((P_gamma(*g, s) - s).cwiseAbs().maxCoeff() < 1e-14);
  // odd in v1: no net flux
  CHECK(P_gamma(*g, v_times_sqrt_mu(*g, 0)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(wall_bound_flux(*g, Eigen::VectorXd::Zero(5)), GridMismatch);

  const auto N = static_cast<Eigen::Index>(g->size());
  for (std::uint64_t k = 0; k < 10; ++k) {
    const Eigen::VectorXd f = test::normal_vector(N, 300 + k);
    const Eigen::VectorXd pf = P_gamma(*g, f);
    CHECK((P_gamma(*g, pf) - pf).norm() <= 1e-13 * pf.norm());
    CHECK(std::abs(wall_bound_flux(*g, f - pf)) <= 1e-14 * f.cwiseAbs().maxCoeff());
    CHECK(std::abs(wall_bound_flux(*g, pf) - wall_bound_flux(*g, f)) <= 1e-14 * f.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("norms of sqrt(mu)") {
  const GridPtr g = build_grid(24, 6.0);
  const Eigen::MatrixXd s = g->sqrt_mu();
  CHECK(norm_l2_xv(*g, s, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(norm_l2_nu(*g, Eigen::VectorXd::Constant(s.rows(), 4.0), s, 1.0) == doctest::Approx(2.0).epsilon(1e-6));
  const double half = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  CHECK(half == doctest::Approx(0.398942).epsilon(1e-6));
  // the midpoint grid integrates the kink of |v3| at second order
  double prev = 1.0;
  for (int n : {12, 24, 48}) {
    const GridPtr gn = build_grid(n, 6.0);
    const double err = std::abs(std::pow(norm_gamma(*gn, gn->sqrt_mu(), 2.0, GammaSide::Plus), 2) - half);
    CHECK(err < 0.3 * prev);
    prev = err;
  }
  CHECK(prev < 2e-3);
  // both sides agree by symmetry
  CHECK(norm_gamma(*g, g->sqrt_mu(), 2.0, GammaSide::Plus) ==
        doctest::Approx(norm_gamma(*g, g->sqrt_mu(), 2.0, GammaSide::Minus)).epsilon(1e-14));
  CHECK(norm_linf_w(*g, s, Weight(0.125)) == doctest::Approx(std::pow(2.0 * std::numbers::pi, -0.75) *
                                                             std::exp(-0.125 * 3.0 * 0.0625)).epsilon(1e-14));
}

TEST_CASE("norm axioms on random fields (property)") {
  const GridPtr g = build_grid(8, 5.0);
  const auto N = static_cast<Eigen::Index>(g->size());
  const Weight w(0.125);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Eigen::MatrixXd f = test::normal_block(N, 6, 400 + k), h = test::normal_block(N, 6, 500 + k);
    const double a = 1.0 + 3.0 * CounterRng(test::kSeed).uniform(9, k);
    auto chk = [&](auto&& norm) {
      CHECK(norm(Eigen::MatrixXd(-a * f)) == doctest::Approx(a * norm(f)).epsilon(1e-13));
      CHECK(norm(Eigen::MatrixXd(f + h)) <= (norm(f) + norm(h)) * (1.0 + 1e-14));
    };
    chk([&](const Eigen::MatrixXd& x) { return norm_l2_xv(*g, x, 0.1); });
    chk([&](const Eigen::MatrixXd& x) { return norm_linf_w(*g, x, w); });
    chk([&](const Eigen::MatrixXd& x) { return l6_macroscopic(*g, x, 0.1); });
    chk([&](const Eigen::MatrixXd& x) { return norm_gamma(*g, x.col(0), 4.0, GammaSide::Minus); });
    chk([&](const Eigen::MatrixXd& x) { return norm_gamma(*g, x.col(0), 2.0, GammaSide::Plus); });
  }
}

TEST_CASE("the two boundary sides add up to the full flux-weighted norm (property)") {
  const GridPtr g = build_grid(8, 5.0);
  const auto N = static_cast<Eigen::Index>(g->size());
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Eigen::VectorXd f = test::normal_vector(N, 800 + k);
    double full = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i)
      full += std::abs(g->node(i)[2]) * f[static_cast<Eigen::Index>(i)] * f[static_cast<Eigen::Index>(i)];
    full *= g->weight();
    const double plus = norm_gamma(*g, f, 2.0, GammaSide::Plus), minus = norm_gamma(*g, f, 2.0, GammaSide::Minus);
    CHECK(plus * plus + minus * minus == doctest::Approx(full).epsilon(1e-13));
  }
}

TEST_CASE("L6 examples") {
  const GridPtr g = build_grid(12, 6.0);
  const int n = 10;
  const double dx = 0.3, scale = std::pow(n * dx, 1.0 / 6.0);
  const Eigen::MatrixXd a = g->sqrt_mu().replicate(1, n);
  CHECK(l6_macroscopic(*g, a, dx) == doctest::Approx(scale).epsilon(1e-13));
  const Eigen::MatrixXd b = (2.0 * v_times_sqrt_mu(*g, 1)).replicate(1, n);
  CHECK(l6_macroscopic(*g, b, dx) == doctest::Approx(2.0 * scale).epsilon(1e-13));
  const MacroscopicL6 m = l6_moments(*g, a + b, dx);
  CHECK(m.a == doctest::Approx(scale).epsilon(1e-13));
  CHECK(m.b == doctest::Approx(2.0 * scale).epsilon(1e-13));
  CHECK(m.c < 1e-13);
  // microscopic fields are invisible
  Eigen::VectorXd v1v2(static_cast<Eigen::Index>(g->size()));
  for (std::size_t i = 0; i < g->size(); ++i)
    v1v2[static_cast<Eigen::Index>(i)] = g->node(i)[0] * g->node(i)[1] * g->sqrt_mu()[static_cast<Eigen::Index>(i)];
  CHECK(l6_macroscopic(*g, v1v2.replicate(1, n), dx) < 1e-14);
}

TEST_CASE("energy norms of zero, scaled and linear series") {
  const GridPtr g = build_grid(8, 5.0);
  const auto N = static_cast<Eigen::Index>(g->size());
  const Eigen::MatrixXd R1 = test::normal_block(N, 5, 600), R2 = test::normal_block(N, 5, 601);
  auto curve = [&](double c) {
    return [&, c](double t) { return Eigen::MatrixXd(c * (std::cos(3.0 * t) * R1 + t * R2)); };
  };

  const auto zero = series(g, 0.2, 0.1, 6, 0.05, [&](double) { return Eigen::MatrixXd::Zero(N, 5).eval(); });
  const EnergyNorms e0 = energy_norms(zero);
  CHECK(e0.M == 0.0);
  CHECK(e0.N == 0.0);

  const auto one = series(g, 0.2, 0.1, 6, 0.05, curve(1.0));
  const auto two = series(g, 0.2, 0.1, 6, 0.05, curve(2.0));
  REQUIRE(one.size() == 7);
  REQUIRE(two.size() == 7);
  CHECK(energy_norms(two).M == doctest::Approx(2.0 * energy_norms(one).M).epsilon(1e-13));
  CHECK(energy_norms(two).N == doctest::Approx(2.0 * energy_norms(one).N).epsilon(1e-13));

  for (std::size_t k = 1; k < one.size(); ++k) {
    CHECK(one[k].t > one[k - 1].t);
    CHECK(one[k].l2_IP_R_nu_cum >= one[k - 1].l2_IP_R_nu_cum);
    CHECK(one[k].gamma_1mPg_cum >= one[k - 1].gamma_1mPg_cum);
    CHECK(one[k].l2_IP_dtR_nu_cum >= one[k - 1].l2_IP_dtR_nu_cum);
    CHECK(one[k].M_norm >= one[k - 1].M_norm);
    CHECK(one[k].N_norm >= one[k - 1].N_norm);
  }

  // the differences are exact on a linear series
  const auto lin = series(g, 0.2, 0.1, 5, 0.1, [&](double t) { return Eigen::MatrixXd(R1 + t * R2); });
  for (const NormRow& r : lin) CHECK(r.l2_dtR == doctest::Approx(norm_l2_xv(*g, R2, 0.1)).epsilon(1e-12));

  // the micro dissipation of a constant series is t |(I-P)R|_nu^2 / eps^2
  const auto cst = series(g, 0.25, 0.1, 4, 0.1, [&](double) { return R1; });
  const double micro = norm_l2_xv(*g, R1 - project_P_exact(*g, R1), 0.1);
  CHECK(cst.back().l2_IP_R_nu_cum == doctest::Approx(std::sqrt(0.4) * micro / 0.25).epsilon(1e-12));
  CHECK(cst.back().l2_dtR == 0.0);
}

TEST_CASE("accumulator guards") {
  const GridPtr g = build_grid(6, 5.0);
  const auto N = static_cast<Eigen::Index>(g->size());
  NormAccumulator acc(g, Eigen::VectorXd::Ones(N), 0.2, 0.1, Weight(0.125));
  CHECK_FALSE(acc.add_snapshot(0.0, Eigen::MatrixXd::Zero(N, 3)).has_value());
  CHECK(acc.add_snapshot(0.1, Eigen::MatrixXd::Zero(N, 3)).has_value());
  CHECK_THROWS_AS(acc.finish(), NumericalError);
  CHECK_THROWS_AS(acc.add_snapshot(0.1, Eigen::MatrixXd::Zero(N, 3)), NumericalError);
  CHECK_THROWS_AS(energy_norms({NormRow{}, NormRow{}}), NumericalError);
  CHECK(norm_csv_header().size() == 11);
  CHECK(norm_csv_values(NormRow{}).size() == norm_csv_header().size());
}

TEST_CASE("deviation from a remainder matches the direct form") {
  const GridPtr g = build_grid(10, 6.0);
  const auto N = static_cast<Eigen::Index>(g->size());
  const double eps = 0.1, dx = 0.2;
  const Eigen::MatrixXd f1 = 0.05 * (test::normal_block(N, 4, 700).array().colwise() * g->sqrt_mu().array()).matrix();
  const Eigen::MatrixXd f2 = 0.05 * (test::normal_block(N, 4, 701).array().colwise() * g->sqrt_mu().array()).matrix();
  const Eigen::MatrixXd R = 0.05 * (test::normal_block(N, 4, 702).array().colwise() * g->sqrt_mu().array()).matrix();
  const Eigen::MatrixXd pert = f1 + eps * f2 + std::sqrt(eps) * R;
  const Eigen::MatrixXd F = (eps * (pert.array().colwise() * g->sqrt_mu().array())).matrix().colwise() + g->mu();
  const double direct = expansion_deviation_direct(*g, F, f1, eps, dx);
  const double viaR = expansion_deviation_remainder(*g, f2, R, eps, dx);
  CHECK(direct == doctest::Approx(viaR).epsilon(1e-10));
  CHECK(expansion_deviation_remainder(*g, f2 * 0.0, R * 0.0, eps, dx) == 0.0);
}

TEST_CASE("monitor ratios") {
  const MonitorEntry v = monitor_ratio("zero", 0.0, 0.0);
  CHECK(v.vacuous);
  CHECK(v.ratio == 0.0);
  const MonitorEntry h = monitor_ratio("half", 1.0, 2.0);
  CHECK_FALSE(h.vacuous);
  CHECK(h.ratio == 0.5);
  CHECK(monitor_ratio("inf", 1.0, 0.0).ratio == std::numeric_limits<double>::infinity());
  CHECK(monitor_ratio("lhs zero", 0.0, 3.0).ratio == 0.0);
  CHECK_FALSE(monitor_ratio("lhs zero", 0.0, 3.0).vacuous);
}
