#pragma once

namespace rayleigh {

/// Rayleigh (Stokes first problem) shear profile u1 = u_b erfc(x3 / sqrt(4 kappa (t + delta))).
struct RayleighProfile {
  double u_b = 0.05;
  double kappa = 1.0;
  double delta = 0.5;
};

/// Throws ConfigError unless kappa, delta are positive and u_b is non-negative (u_b = 0 gives the rest state).
RayleighProfile make_profile(double u_b, double kappa, double delta = 0.5);

struct ProfileDerivatives {
  double du_dt = 0.0;
  double du_dx3 = 0.0;
  double d2u_dx3x3 = 0.0;
  double d2u_dtdx3 = 0.0;
  double d2u_dt2 = 0.0;
};

/// Throws NumericalError (domain error) for t < 0 or x3 < 0.
double eval_u1(const RayleighProfile& p, double t, double x3);
ProfileDerivatives eval_derivatives(const RayleighProfile& p, double t, double x3);

/// L2(R+) and Linf norms of u and its derivatives at time t, plus the ratios of the three
/// fluid estimates to their bounds (u_b (t+delta)^{1/4} for |u|_2, u_b for the two sums).
struct FluidNormReport {
  double t = 0.0;
  double l2_u = 0.0, l2_dt = 0.0, l2_dx = 0.0, l2_dtdx = 0.0, l2_dxx = 0.0, l2_dtt = 0.0;
  double linf_u = 0.0, linf_dt = 0.0, linf_dx = 0.0, linf_dtdx = 0.0, linf_dxx = 0.0, linf_dtt = 0.0;
  double ratio_l2_u = 0.0;     ///< |u|_2 / (u_b (t+delta)^{1/4})
  double ratio_l2_sum = 0.0;   ///< (|u_t| + |u_x| + |u_tx| + |u_xx| + |u_tt|)_2 / u_b
  double ratio_linf_sum = 0.0; ///< (|u| + |u_t| + |u_x| + |u_tx| + |u_xx| + |u_tt|)_inf / u_b
};

FluidNormReport fluid_norm_oracles(const RayleighProfile& p, double t);

/// int_0^inf erfc(z)^2 dz from the cached reference quadrature.
double erfc_squared_integral();

}  // namespace rayleigh
