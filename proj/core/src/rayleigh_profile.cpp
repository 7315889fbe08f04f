#include "rayleigh/rayleigh_profile.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rayleigh/errors.hpp"
#include "rayleigh/quadrature.hpp"

namespace rayleigh {

namespace {

const double kTwoOverSqrtPi = 2.0 / std::sqrt(std::numbers::pi);

void check_domain(double t, double x3) {
  if (!(t >= 0.0) || !(x3 >= 0.0))
    throw NumericalError("profile evaluated outside its domain (t = " + std::to_string(t) + ", x3 = " + std::to_string(x3) + ")");
}

/// Reference integrals in the similarity variable z, computed once.
struct Reference {
  double erfc2 = 0.0;  // int erfc^2
  double g2 = 0.0;     // int G^2, G = 2/sqrt(pi) exp(-z^2)
  double z2g2 = 0.0;   // int z^2 G^2
  double xt = 0.0;     // int G^2 (z^2 - 1/2)^2
  double tt = 0.0;     // int z^2 G^2 (z^2 - 3/2)^2
  double max_zg = 0.0, max_xt = 0.0, max_tt = 0.0;

  Reference() {
    // composite Gauss-Legendre on [0, 12]; the integrands are below 1e-60 beyond
    const GaussRule r = gauss_legendre(20, 0.0, 0.25);
    for (int panel = 0; panel < 48; ++panel) {
      for (std::size_t k = 0; k < r.x.size(); ++k) {
        const double z = r.x[k] + 0.25 * panel, w = r.w[k];
        const double G = kTwoOverSqrtPi * std::exp(-z * z);
        const double e = std::erfc(z);
        erfc2 += w * e * e;
        g2 += w * G * G;
        z2g2 += w * z * z * G * G;
        xt += w * G * G * (z * z - 0.5) * (z * z - 0.5);
        tt += w * z * z * G * G * (z * z - 1.5) * (z * z - 1.5);
      }
    }
    for (int k = 0; k <= 120000; ++k) {
      const double z = k * 1e-4;
      const double G = kTwoOverSqrtPi * std::exp(-z * z);
      max_zg = std::max(max_zg, z * G);
      max_xt = std::max(max_xt, std::abs(G * (z * z - 0.5)));
      max_tt = std::max(max_tt, std::abs(z * G * (z * z - 1.5)));
    }
  }
};

const Reference& reference() {
  static const Reference ref;
  return ref;
}

}  // namespace

RayleighProfile make_profile(double u_b, double kappa, double delta) {
  if (!(u_b >= 0.0) || !std::isfinite(u_b)) throw ConfigError("wall speed u_b must be non-negative");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("viscosity kappa must be positive");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("time offset delta must be positive");
  return {u_b, kappa, delta};
}

double eval_u1(const RayleighProfile& p, double t, double x3) {
  check_domain(t, x3);
  return p.u_b * std::erfc(x3 / std::sqrt(4.0 * p.kappa * (t + p.delta)));
}

ProfileDerivatives eval_derivatives(const RayleighProfile& p, double t, double x3) {
  check_domain(t, x3);
  const double tau = t + p.delta;
  const double L = std::sqrt(4.0 * p.kappa * tau);
  const double z = x3 / L;
  const double G = kTwoOverSqrtPi * std::exp(-z * z);
  ProfileDerivatives d;
  d.du_dx3 = -p.u_b * G / L;
  d.d2u_dx3x3 = 2.0 * p.u_b * z * G / (L * L);
  d.du_dt = p.u_b * G * z / (2.0 * tau);
  d.d2u_dtdx3 = -p.u_b * G * (z * z - 0.5) / (tau * L);
  d.d2u_dt2 = p.u_b * z * G * (z * z - 1.5) / (2.0 * tau * tau);
  return d;
}

FluidNormReport fluid_norm_oracles(const RayleighProfile& p, double t) {
  check_domain(t, 0.0);
  const Reference& ref = reference();
  const double tau = t + p.delta;
  const double L = std::sqrt(4.0 * p.kappa * tau);
  const double ub = p.u_b;
  FluidNormReport r;
  r.t = t;
  r.l2_u = ub * std::sqrt(L * ref.erfc2);
  r.l2_dx = ub * std::sqrt(ref.g2 / L);
  r.l2_dt = ub / (2.0 * tau) * std::sqrt(L * ref.z2g2);
  r.l2_dxx = 2.0 * ub * std::sqrt(ref.z2g2 / (L * L * L));
  r.l2_dtdx = ub / tau * std::sqrt(ref.xt / L);
  r.l2_dtt = ub / (2.0 * tau * tau) * std::sqrt(L * ref.tt);
  r.linf_u = ub;
  r.linf_dx = ub * kTwoOverSqrtPi / L;
  r.linf_dt = ub * ref.max_zg / (2.0 * tau);
  r.linf_dxx = 2.0 * ub * ref.max_zg / (L * L);
  r.linf_dtdx = ub * ref.max_xt / (tau * L);
  r.linf_dtt = ub * ref.max_tt / (2.0 * tau * tau);
  r.ratio_l2_u = r.l2_u / (ub * std::pow(tau, 0.25));
  r.ratio_l2_sum = (r.l2_dt + r.l2_dx + r.l2_dtdx + r.l2_dxx + r.l2_dtt) / ub;
  r.ratio_linf_sum = (r.linf_u + r.linf_dt + r.linf_dx + r.linf_dtdx + r.linf_dxx + r.linf_dtt) / ub;
  return r;
}

double erfc_squared_integral() { return reference().erfc2; }

}  // namespace rayleigh
