#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rayleigh/errors.hpp"
#include "rayleigh/velocity_grid.hpp"
#include "support.hpp"

using namespace rayleigh;

namespace {

double quad(const VelocityGrid& g, auto&& fn) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += fn(g.node(i)) * g.mu()[static_cast<Eigen::Index>(i)];
  return g.weight() * s;
}

}  // namespace

TEST_CASE("two-node grid is the unit cube corners") {
  const GridPtr g = build_grid(2, 1.0);
  CHECK(g->size() == 8);
  CHECK(g->weight() == 1.0);
  for (const Vec3& v : g->nodes())
    for (double c : v) CHECK(std::abs(c) == 0.5);
}

TEST_CASE("weights sum to the cube volume") {
  const GridPtr g = build_grid(24, 6.0);
  CHECK(g->size() == 24 * 24 * 24);
  CHECK(g->weight() * static_cast<double>(g->size()) == doctest::Approx(1728.0).epsilon(1e-15));
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(build_grid(1, 6.0), ConfigError);
  CHECK_THROWS_AS(build_grid(8, 0.0), ConfigError);
  CHECK_THROWS_AS(build_grid(8, -1.0), ConfigError);
}

TEST_CASE("Gaussian moments on the 24 node grid") {
  const GridPtr g = build_grid(24, 6.0);
  CHECK(std::abs(quad(*g, [](const Vec3&) { return 1.0; }) - 1.0) < 1e-6);
  CHECK(std::abs(quad(*g, [](const Vec3& v) { return v[0] * v[0]; }) - 1.0) < 1e-6);
  CHECK(std::abs(quad(*g, [](const Vec3& v) { return v[0] * v[0] * v[1] * v[1]; }) - 1.0) < 1e-5);
}

TEST_CASE("moment errors shrink as the grid doubles") {
  auto err = [](int n) {
    const GridPtr g = build_grid(n, 6.0);
    return std::array<double, 4>{
        std::abs(quad(*g, [](const Vec3&) { return 1.0; }) - 1.0),
        std::abs(quad(*g, [](const Vec3& v) { return v[1] * v[1]; }) - 1.0),
        std::abs(quad(*g, [](const Vec3& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }) - 3.0),
        std::abs(quad(*g, [](const Vec3& v) { return v[0] * v[0] * v[1] * v[1]; }) - 1.0)};
  };
  const auto e6 = err(6), e12 = err(12), e24 = err(24);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(e12[k] < e6[k]);
    // at 24 nodes the truncation at v_max = 6 dominates and the error stays at its floor
    CHECK(e24[k] <= std::max(e12[k], 1e-7));
  }
}

TEST_CASE("maxwellian formula and constant") {
  const GridPtr g = build_grid(7, 6.0);
  const VelocityField mu = maxwellian(g);
  const double c = std::pow(2.0 * std::numbers::pi, -1.5);
  CHECK(c == doctest::Approx(6.3494e-2).epsilon(1e-4));
  const std::size_t center = g->index(3, 3, 3);
  CHECK(std::abs(g->node(center)[0]) < 1e-15);
  CHECK(mu[center] == doctest::Approx(c).epsilon(1e-15));
  for (std::size_t i = 0; i < g->size(); i += 17) {
    const Vec3& v = g->node(i);
    CHECK(mu[i] == doctest::Approx(c * std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))).epsilon(1e-14));
  }
}

TEST_CASE("grid closed under reflections and permutations") {
  const GridPtr g = build_grid(6, 3.0);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Vec3& v = g->node(i);
    for (int a = 0; a < 3; ++a) {
      const Vec3& r = g->node(g->reflect(i, a));
      CHECK(r[static_cast<std::size_t>(a)] == -v[static_cast<std::size_t>(a)]);
    }
    const auto m = g->multi_index(i);
    const Vec3& p = g->node(g->index(m[1], m[2], m[0]));
    CHECK(p[0] == v[1]);
    CHECK(p[2] == v[0]);
  }
}

TEST_CASE("quadrature is invariant under v -> -v (property, fixed seed)") {
  const GridPtr g = build_grid(8, 5.0);
  const auto N = static_cast<Eigen::Index>(g->size());
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Eigen::VectorXd f = test::normal_vector(N, 100 + s);
    Eigen::VectorXd fr(N);
    for (std::size_t i = 0; i < g->size(); ++i)
      fr[static_cast<Eigen::Index>(i)] = f[static_cast<Eigen::Index>(g->reflect(g->reflect(g->reflect(i, 0), 1), 2))];
    CHECK(std::abs(f.sum() - fr.sum()) <= 1e-12 * f.cwiseAbs().sum());
  }
}

TEST_CASE("projection examples") {
  const GridPtr g = build_grid(24, 6.0);
  const auto N = static_cast<Eigen::Index>(g->size());
  const Projection p0 = project_P(VelocityField(g, g->sqrt_mu()));
  CHECK(std::abs(p0.moments.a - 1.0) < 1e-6);
  CHECK(std::abs(p0.moments.c) < 1e-6);
  CHECK(std::abs(p0.moments.b[0]) < 1e-15);

  Eigen::VectorXd v1v3(N), v2(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const Vec3& v = g->node(static_cast<std::size_t>(k));
    v1v3[k] = v[0] * v[2] * g->sqrt_mu()[k];
    v2[k] = v[1] * g->sqrt_mu()[k];
  }
  CHECK(project_P(VelocityField(g, v1v3)).Pf.values().norm() < 1e-14);
  const Projection pb = project_P(VelocityField(g, v2));
  CHECK(std::abs(pb.moments.b[1] - 1.0) < 1e-6);
  CHECK(std::abs(pb.moments.b[0]) < 1e-15);
  CHECK(std::abs(pb.moments.b[2]) < 1e-15);
}

TEST_CASE("exact projection is idempotent and self-adjoint (property)") {
  const GridPtr g = build_grid(8, 5.0);
  const auto N = static_cast<Eigen::Index>(g->size());
  const Eigen::MatrixXd F = test::normal_block(N, 10, 1), G = test::normal_block(N, 10, 2);
  const Eigen::MatrixXd PF = project_P_exact(*g, F), PG = project_P_exact(*g, G);
  CHECK((project_P_exact(*g, PF) - PF).norm() <= 1e-12 * PF.norm());
  for (Eigen::Index j = 0; j < 10; ++j) {
    const double a = inner(*g, PF.col(j), G.col(j)), b = inner(*g, F.col(j), PG.col(j));
    CHECK(std::abs(a - b) <= 1e-12 * norm_l2_v(*g, F.col(j)) * norm_l2_v(*g, G.col(j)));
  }
}

TEST_CASE("weight application") {
  const GridPtr g = build_grid(10, 6.0);
  const VelocityField f = apply_weight(VelocityField(g, g->sqrt_mu()), Weight(0.125));
  const double c = std::pow(2.0 * std::numbers::pi, -0.75);
  double prev = 1e300;
  for (int k = 5; k < 10; ++k) {
    const std::size_t i = g->index(k, 5, 5);
    const Vec3& v = g->node(i);
    const double expect = c * std::exp(-0.125 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
    CHECK(f[i] == doctest::Approx(expect).epsilon(1e-14));
    CHECK(f[i] < prev);
    prev = f[i];
  }
  CHECK_THROWS_AS(Weight(0.2), ConfigError);
  CHECK_THROWS_AS(Weight(0.0), ConfigError);
  const VelocityField z = apply_weight(VelocityField(g), Weight(0.1));
  CHECK(z.values().norm() == 0.0);
}
