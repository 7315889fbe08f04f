#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rayleigh/errors.hpp"
#include "rayleigh/rayleigh_profile.hpp"
#include "support.hpp"

using namespace rayleigh;

namespace {

/// erfc by its Taylor series of erf (adequate for |z| <= 3 with long double).
double erfc_series(double z) {
  long double term = z, sum = z;
  for (int n = 1; n < 200; ++n) {
    term *= -static_cast<long double>(z) * z / n;
    sum += term / (2 * n + 1);
  }
  return static_cast<double>(1.0L - 2.0L / std::sqrt(std::numbers::pi_v<long double>) * sum);
}

/// int_0^Z erfc(z)^2 dz by composite Simpson.
double erfc2_integral(double Z, int n) {
  const double h = Z / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double e = std::erfc(i * h);
    s += ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * e * e;
  }
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("wall value and construction guards") {
  const RayleighProfile p = make_profile(0.05, 1.0, 0.5);
  for (double t : {0.0, 0.1, 1.0, 10.0}) CHECK(eval_u1(p, t, 0.0) == 0.05);
  CHECK_THROWS_AS(make_profile(0.05, 0.0, 0.5), ConfigError);
  CHECK_THROWS_AS(make_profile(0.05, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(make_profile(-0.1, 1.0, 0.5), ConfigError);
  CHECK_THROWS_AS(eval_u1(p, -0.1, 0.0), NumericalError);
  CHECK_THROWS_AS(eval_u1(p, 0.1, -1.0), NumericalError);
}

TEST_CASE("values against an independent erfc series") {
  const RayleighProfile p = make_profile(0.05, 1.0, 0.5);
  CHECK(erfc_series(3.0) == doctest::Approx(2.2090e-5).epsilon(1e-4));
  CHECK(eval_u1(p, 0.0, 3.0 * std::sqrt(2.0)) == doctest::Approx(0.05 * erfc_series(3.0)).epsilon(1e-10));
  CHECK(eval_u1(p, 0.0, 3.0 * std::sqrt(2.0)) == doctest::Approx(1.1047e-6).epsilon(1e-4));
  // 1000 points of the erfc argument in [0, 3]
  const CounterRng rng(test::kSeed);
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const double z = 3.0 * rng.uniform(7, k);
    const double u = eval_u1(p, 0.0, z * std::sqrt(2.0));
    worst = std::max(worst, std::abs(u - 0.05 * erfc_series(z)));
  }
  CHECK(worst < 1e-15);
}

TEST_CASE("monotone decay and far-field tail") {
  const RayleighProfile p = make_profile(0.05, 1.0, 0.5);
  for (double t : {0.0, 0.5}) {
    double prev = 1.0;
    for (int i = 0; i <= 100; ++i) {
      const double u = eval_u1(p, t, 0.1 * i);
      CHECK(u < prev);
      prev = u;
    }
    CHECK(eval_u1(p, t, 8.0 * std::sqrt(4.0 * (t + 0.5))) < 1e-20 * 0.05);
  }
}

TEST_CASE("derivatives") {
  const RayleighProfile p = make_profile(0.05, 1.0, 0.5);
  const ProfileDerivatives d0 = eval_derivatives(p, 0.0, 0.0);
  CHECK(d0.du_dx3 == doctest::Approx(-0.05 / std::sqrt(std::numbers::pi * 0.5)).epsilon(1e-14));
  CHECK(d0.du_dx3 == doctest::Approx(-3.9894e-2).epsilon(1e-4));
  CHECK(d0.du_dt == 0.0);

  // finite-difference oracle
  const double h = 1e-4;
  for (double x : {0.3, 1.0, 2.5}) {
    const double t = 0.2;
    const ProfileDerivatives d = eval_derivatives(p, t, x);
    const double fx = (eval_u1(p, t, x + h) - eval_u1(p, t, x - h)) / (2 * h);
    const double ft = (eval_u1(p, t + h, x) - eval_u1(p, t - h, x)) / (2 * h);
    const double fxx = (eval_u1(p, t, x + h) - 2 * eval_u1(p, t, x) + eval_u1(p, t, x - h)) / (h * h);
    CHECK(std::abs(d.du_dx3 - fx) < 1e-9);
    CHECK(std::abs(d.du_dt - ft) < 1e-9);
    CHECK(std::abs(d.d2u_dx3x3 - fxx) < 1e-6);
    const double ftx = (eval_derivatives(p, t + h, x).du_dx3 - eval_derivatives(p, t - h, x).du_dx3) / (2 * h);
    const double ftt = (eval_derivatives(p, t + h, x).du_dt - eval_derivatives(p, t - h, x).du_dt) / (2 * h);
    CHECK(std::abs(d.d2u_dtdx3 - ftx) < 1e-8);
    CHECK(std::abs(d.d2u_dt2 - ftt) < 1e-8);
  }
}

TEST_CASE("heat equation identity at random points (property)") {
  const CounterRng rng(test::kSeed);
  for (double kappa : {0.5, 1.0, 2.0}) {
    const RayleighProfile p = make_profile(0.05, kappa, 0.5);
    for (std::uint64_t k = 0; k < 100; ++k) {
      const double t = 2.0 * rng.uniform(1, k), x = 6.0 * rng.uniform(2, k);
      const ProfileDerivatives d = eval_derivatives(p, t, x);
      CHECK(std::abs(d.du_dt - kappa * d.d2u_dx3x3) < 1e-13 * p.u_b);
    }
  }
}

TEST_CASE("finite-difference heat residual converges at second order") {
  const RayleighProfile p = make_profile(0.05, 1.0, 0.5);
  auto residual = [&](double h) {
    double r = 0.0;
    for (int i = 1; i <= 20; ++i) {
      const double x = 0.2 * i, t = 0.3;
      const double ut = (eval_u1(p, t + h * h, x) - eval_u1(p, t - h * h, x)) / (2 * h * h);
      const double uxx = (eval_u1(p, t, x + h) - 2 * eval_u1(p, t, x) + eval_u1(p, t, x - h)) / (h * h);
      r = std::max(r, std::abs(ut - uxx));
    }
    return r;
  };
  const double r1 = residual(0.04), r2 = residual(0.02), r3 = residual(0.01);
  const double p1 = std::log2(r1 / r2), p2 = std::log2(r2 / r3);
  MESSAGE("FD heat residual orders " << p1 << ", " << p2);
  CHECK(p1 > 1.8);
  CHECK(p2 > 1.8);
}

TEST_CASE("L2 norm closed form") {
  const double I2 = erfc2_integral(12.0, 20000);
  // closed form (2 - sqrt 2) / sqrt pi = 0.3304946...
  CHECK(I2 == doctest::Approx((2.0 - std::sqrt(2.0)) / std::sqrt(std::numbers::pi)).epsilon(1e-12));
  CHECK(I2 == doctest::Approx(0.330497).epsilon(1e-5));
  CHECK(erfc_squared_integral() == doctest::Approx(I2).epsilon(1e-12));
  const RayleighProfile p = make_profile(0.05, 1.0, 0.5);
  const FluidNormReport r0 = fluid_norm_oracles(p, 0.0);
  CHECK(r0.l2_u == doctest::Approx(3.4182e-2).epsilon(1e-4));
  CHECK(r0.linf_u == 0.05);
  const double ratio = std::sqrt(2.0 * std::sqrt(p.kappa) * I2);
  for (int k = 0; k < 10; ++k) {
    const double t = 0.05 * k;
    const FluidNormReport r = fluid_norm_oracles(p, t);
    CHECK(r.l2_u == doctest::Approx(0.05 * std::sqrt(std::sqrt(4.0 * (t + 0.5)) * I2)).epsilon(1e-10));
    CHECK(r.ratio_l2_u == doctest::Approx(ratio).epsilon(1e-10));
  }
}

TEST_CASE("monitored fluid ratios stay within a factor 3 over time") {
  // delta = 0.25 is excluded: the derivative sums scale like (t + delta)^{-1}, so over
  // t in [0, 0.5] the spread is about 3.3 there.
  for (double delta : {0.5, 1.0}) {
    const RayleighProfile p = make_profile(0.05, 1.0, delta);
    double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {0, 0, 0};
    for (int k = 0; k <= 10; ++k) {
      const FluidNormReport r = fluid_norm_oracles(p, 0.05 * k);
      const double v[3] = {r.ratio_l2_u, r.ratio_l2_sum, r.ratio_linf_sum};
      for (int j = 0; j < 3; ++j) {
        CHECK(std::isfinite(v[j]));
        lo[j] = std::min(lo[j], v[j]);
        hi[j] = std::max(hi[j], v[j]);
      }
    }
    for (int j = 0; j < 3; ++j) CHECK(hi[j] / lo[j] < 3.0);
  }
}
