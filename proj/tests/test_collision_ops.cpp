#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "rayleigh/collision_operator.hpp"
#include "rayleigh/errors.hpp"
#include "rayleigh/gamma.hpp"
#include "rayleigh/operator_cache.hpp"
#include "support.hpp"

using namespace rayleigh;

namespace {

OperatorPtr make_op(Backend b, int n, double v_max = 6.0, double nu0 = 1.0, const std::string& cache = "") {
  CollisionSettings s;
  s.backend = b;
  s.nu0 = nu0;
  s.gamma_angular_order = 4;
  s.cache_dir = cache;
  return CollisionOperator::build(build_grid(n, v_max), s);
}

const OperatorPtr& hs12() {
  static const OperatorPtr op = make_op(Backend::HardSphere, 12);
  return op;
}

Eigen::VectorXd invariant(const VelocityGrid& g, int k) { return g.invariants().col(k); }

Eigen::VectorXd v1v3_sqrt_mu(const VelocityGrid& g) {
  Eigen::VectorXd f = g.sqrt_mu();
  for (std::size_t i = 0; i < g.size(); ++i) f[static_cast<Eigen::Index>(i)] *= g.node(i)[0] * g.node(i)[2];
  return f;
}

/// E|v + Z| for a standard normal Z in R^3 with |v| = s.
double mean_distance(double s) {
  if (s == 0.0) return 2.0 * std::sqrt(2.0 / std::numbers::pi);
  return std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * s * s) + (s + 1.0 / s) * std::erf(s / std::sqrt(2.0));
}

}  // namespace

TEST_CASE("backend names") {
  CHECK(backend_from_string("bgk") == Backend::BGK);
  CHECK(backend_from_string("hardsphere") == Backend::HardSphere);
  CHECK(backend_from_string("hard_sphere") == Backend::HardSphere);
  CHECK_THROWS_AS(backend_from_string("maxwell"), ConfigError);
}

TEST_CASE("hard-sphere collision frequency") {
  const OperatorPtr& op = hs12();
  const VelocityGrid& g = op->grid();
  const Eigen::VectorXd& nu = op->nu();
  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3& v = g.node(i);
    const double r = nu[static_cast<Eigen::Index>(i)] / std::sqrt(1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    CHECK(nu[static_cast<Eigen::Index>(i)] > 0.0);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  MESSAGE("nu / sqrt(1+|v|^2) in [" << lo << ", " << hi << "]");
  CHECK(hi / lo < 10.0);

  // closed form: nu(v) = 2 pi E|v - u| over u ~ mu (the sphere integral of |z.omega| is 2 pi |z|)
  const std::size_t c = g.index(6, 6, 6);
  const Vec3& v = g.node(c);
  const double s = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  const double oracle = 2.0 * std::numbers::pi * mean_distance(s);
  MESSAGE("nu near 0: " << nu[static_cast<Eigen::Index>(c)] << " oracle " << oracle);
  CHECK(test::rel(nu[static_cast<Eigen::Index>(c)], oracle) < 1e-2);

  double prev = 0.0;
  for (int k = 6; k < 12; ++k) {
    const double x = nu[static_cast<Eigen::Index>(g.index(k, 6, 6))];
    CHECK(x > prev);
    prev = x;
  }
}

TEST_CASE("kernel annihilation and symmetry, both backends") {
  for (const OperatorPtr& op : {make_op(Backend::BGK, 12), hs12()}) {
    const VelocityGrid& g = op->grid();
    for (int k = 0; k < 5; ++k) {
      const Eigen::VectorXd chi = invariant(g, k);
      CHECK(op->apply(chi).norm() <= 1e-12 * chi.norm());
    }
    const auto N = static_cast<Eigen::Index>(g.size());
    const Eigen::MatrixXd F = test::normal_block(N, 20, 11), G = test::normal_block(N, 20, 12);
    const Eigen::MatrixXd LF = op->apply(F), LG = op->apply(G);
    const Eigen::MatrixXd PLF = project_P_exact(g, LF), LPF = op->apply(project_P_exact(g, F));
    CHECK(PLF.norm() <= 1e-12 * LF.norm());
    CHECK(LPF.norm() <= 1e-12 * LF.norm());
    for (Eigen::Index j = 0; j < 20; ++j) {
      const double a = inner(g, LF.col(j), G.col(j)), b = inner(g, F.col(j), LG.col(j));
      CHECK(std::abs(a - b) <= 1e-12 * norm_l2_v(g, F.col(j)) * norm_l2_v(g, G.col(j)) * op->nu().maxCoeff());
    }
  }
}

TEST_CASE("dense hard-sphere matrix is exactly symmetric and enforces K sqrt mu = nu sqrt mu") {
  const OperatorPtr& op = hs12();
  const Eigen::MatrixXd& L = op->matrix();
  CHECK((L - L.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd sm = op->grid().sqrt_mu();
  // K = nu - L
  const Eigen::VectorXd K_sm = op->nu().cwiseProduct(sm) - L * sm;
  CHECK((K_sm - op->nu().cwiseProduct(sm)).norm() <= 1e-12 * op->nu().cwiseProduct(sm).norm());
  MESSAGE("enforcement defect before correction: " << op->assembly_report().enforcement_defect);
}

TEST_CASE("BGK acts as nu0 on the microscopic part") {
  const OperatorPtr op = make_op(Backend::BGK, 12, 6.0, 1.0);
  const GridPtr g = op->grid_ptr();
  const Eigen::VectorXd f = v1v3_sqrt_mu(*g);
  CHECK((apply_L(*op, VelocityField(g, f)).values() - f).norm() <= 1e-12 * f.norm());
  CHECK(apply_L(*op, VelocityField(g, invariant(*g, 1))).values().norm() <= 1e-14);
  CHECK_THROWS_AS(op->matrix(), BackendUnsupported);

  const OperatorPtr op2 = make_op(Backend::BGK, 12, 6.0, 2.0);
  const VelocityField phi = solve_Linv(*op2, VelocityField(g, f));
  CHECK((phi.values() - 0.5 * f).norm() <= 1e-12 * f.norm());
}

TEST_CASE("inverse round trip and microscopic precondition") {
  for (const OperatorPtr& op : {make_op(Backend::BGK, 12), hs12()}) {
    const VelocityGrid& g = op->grid();
    const auto N = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd G = test::normal_block(N, 5, 21);
    G.array().colwise() *= g.sqrt_mu().array();
    G -= project_P_exact(g, G);
    const Eigen::MatrixXd X = op->solve_Linv(G);
    CHECK((op->apply(X) - G).norm() <= 1e-10 * G.norm());
    CHECK(project_P_exact(g, X).norm() <= 1e-10 * X.norm());
    CHECK_THROWS_AS(op->solve_Linv(VelocityField(op->grid_ptr(), g.sqrt_mu())), NotMicroscopic);
  }
}

TEST_CASE("coercivity with the logged spectral gap (property)") {
  const OperatorPtr& op = hs12();
  const VelocityGrid& g = op->grid();
  const double sigma = op->spectral_gap();
  MESSAGE("spectral gap sigma = " << sigma);
  CHECK(sigma > 0.0);
  const auto N = static_cast<Eigen::Index>(g.size());
  const Eigen::MatrixXd F = test::normal_block(N, 200, 31);
  const Eigen::MatrixXd LF = op->apply(F);
  const Eigen::MatrixXd micro = F - project_P_exact(g, F);
  for (Eigen::Index j = 0; j < F.cols(); ++j) {
    const double q = inner(g, LF.col(j), F.col(j));
    const double nu_norm = g.weight() * (op->nu().array() * micro.col(j).array().square()).sum();
    CHECK(q >= (sigma * (1.0 - 1e-6)) * nu_norm);
  }
}

TEST_CASE("memory budget and angular order guards") {
  CollisionSettings s;
  s.backend = Backend::HardSphere;
  s.matrix_byte_budget = 1024;
  CHECK_THROWS_AS(CollisionOperator::build(build_grid(8, 5.0), s), MemoryBudgetError);
  s.matrix_byte_budget = std::size_t{1} << 30;
  s.angular_order = 4;
  CHECK_THROWS_AS(CollisionOperator::build(build_grid(8, 5.0), s), ConfigError);
}

TEST_CASE("Gamma: symmetry, equilibrium defect and conservation") {
  const OperatorPtr op8 = make_op(Backend::HardSphere, 8, 6.0);
  const OperatorPtr op10 = make_op(Backend::HardSphere, 10, 6.0);
  auto eq_defect = [](const OperatorPtr& op) {
    const GridPtr g = op->grid_ptr();
    const VelocityField sm(g, g->sqrt_mu());
    return apply_Gamma(*op, sm, sm).values().norm() / sm.values().norm();
  };
  // smooth test pair: v1 sqrt mu and (v1 v3 + 0.3 v2^2) sqrt mu
  auto cons_defect = [](const OperatorPtr& op) {
    const GridPtr g = op->grid_ptr();
    Eigen::VectorXd h = g->sqrt_mu();
    for (std::size_t i = 0; i < g->size(); ++i) {
      const Vec3& v = g->node(i);
      h[static_cast<Eigen::Index>(i)] *= v[0] * v[2] + 0.3 * v[1] * v[1];
    }
    const Eigen::VectorXd r =
        apply_Gamma(*op, VelocityField(g, invariant(*g, 1)), VelocityField(g, h)).values();
    const Eigen::MatrixXd& q = g->kernel_basis();
    return (g->weight() * q.transpose() * r).norm() / (std::sqrt(g->weight()) * r.norm());
  };
  const double d8 = eq_defect(op8), d10 = eq_defect(op10);
  MESSAGE("Gamma(sqrt mu, sqrt mu) defect: n=8 " << d8 << ", n=10 " << d10);
  CHECK(d8 < 1e-3);
  CHECK(d10 < d8);
  const double c8 = cons_defect(op8), c10 = cons_defect(op10);
  MESSAGE("Gamma conservation defect: n=8 " << c8 << ", n=10 " << c10);
  CHECK(c10 < c8);

  const GridPtr g = op8->grid_ptr();
  const auto N = static_cast<Eigen::Index>(g->size());
  const Eigen::VectorXd f = test::normal_vector(N, 41).cwiseProduct(g->sqrt_mu());
  const Eigen::VectorXd h = test::normal_vector(N, 42).cwiseProduct(g->sqrt_mu());
  const VelocityField ff(g, f), hh(g, h);
  const Eigen::VectorXd a = apply_Gamma(*op8, ff, hh).values(), b = apply_Gamma(*op8, hh, ff).values();
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(apply_Gamma(*make_op(Backend::BGK, 8, 6.0), ff, hh), BackendUnsupported);
  const GridPtr other = build_grid(6, 6.0);
  CHECK_THROWS_AS(apply_Gamma(*op8, ff, VelocityField(other)), GridMismatch);
}

TEST_CASE("Gamma dictionary matches direct evaluation and round-trips through the cache") {
  const auto dir = std::filesystem::temp_directory_path() / "rayleigh_test_gamma_cache";
  std::filesystem::remove_all(dir);
  const OperatorPtr op = make_op(Backend::HardSphere, 8, 5.0, 1.0, dir.string());
  const GridPtr g = op->grid_ptr();
  const auto N = static_cast<Eigen::Index>(g->size());
  Eigen::MatrixXd basis(N, 2);
  basis.col(0) = g->sqrt_mu();
  basis.col(1) = invariant(*g, 1);
  const GammaDictionary d = build_gamma_dictionary(*op, basis);
  REQUIRE(d.M.size() == 2);
  const Eigen::VectorXd r = test::normal_vector(N, 51).cwiseProduct(g->sqrt_mu());
  for (int k = 0; k < 2; ++k) {
    const Eigen::VectorXd direct = apply_Gamma(*op, VelocityField(g, basis.col(k)), VelocityField(g, r)).values();
    CHECK((d.M[static_cast<std::size_t>(k)] * r - direct).norm() <= 1e-10 * std::max(direct.norm(), 1e-300));
  }
  const GammaDictionary again = build_gamma_dictionary(*op, basis);
  for (std::size_t k = 0; k < 2; ++k) CHECK((again.M[k] - d.M[k]).cwiseAbs().maxCoeff() == 0.0);

  // a flipped payload byte must be detected
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    std::fstream io(e.path(), std::ios::in | std::ios::out | std::ios::binary);
    io.seekp(-9, std::ios::end);
    io.put('\x5a');
  }
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const CacheHeader h = read_cache_header(e.path());
    CHECK_THROWS_AS(read_matrix_cache(e.path(), h.key), CacheError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("hard-sphere operator cache round trip is bit exact") {
  const auto dir = std::filesystem::temp_directory_path() / "rayleigh_test_op_cache";
  std::filesystem::remove_all(dir);
  const OperatorPtr a = make_op(Backend::HardSphere, 8, 5.0, 1.0, dir.string());
  const OperatorPtr b = make_op(Backend::HardSphere, 8, 5.0, 1.0, dir.string());
  CHECK((a->matrix() - b->matrix()).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove_all(dir);
}
