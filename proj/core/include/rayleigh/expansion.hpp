#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rayleigh/collision_operator.hpp"
#include "rayleigh/gamma.hpp"
#include "rayleigh/rayleigh_profile.hpp"
#include "rayleigh/velocity_grid.hpp"

namespace rayleigh {

/// Burnett fields A_ij sqrt(mu) = (v_i v_j - delta_ij |v|^2 / 3) sqrt(mu), in the order
/// (1,1), (1,2), (1,3), (2,2), (2,3), (3,3), and phi13 = L^{-1}(v1 v3 sqrt mu).
struct BurnettFields {
  Eigen::MatrixXd A;
  Eigen::VectorXd phi13;
  double kappa = 0.0;  ///< <A_12, L^{-1} A_12>
};

/// Column of A for the pair (i, j), zero-based.
int burnett_column(int i, int j);

BurnettFields build_burnett(const CollisionOperator& op);

struct KappaReport {
  double kappa_inverse = 0.0;   ///< <A_12, L^{-1} A_12>, the value that drives the profile
  double kappa_direct = 0.0;    ///< <A_12, L A_12>
  double fit_constant = 0.0;    ///< least-squares constant of the 36 direct pairings
  double tensor_residual = 0.0; ///< |T - fit * pattern|_F / |T|_F
  double off_pattern = 0.0;     ///< max |T| over pattern zeros / T_(12),(12)
  double inverse_fit_residual = 0.0;  ///< same fit for the inverse pairings
};

/// Viscosity and the isotropic tensor check of <A_ij, L A_kl>.
KappaReport compute_kappa(const CollisionOperator& op);

/// Coefficients of f1 + eps f2 (or their time derivatives) on the dictionary
/// e0 = sqrt mu, e1 = v1 sqrt mu, e2 = A_11 sqrt mu, e3 = phi13.
using Coeffs = Eigen::Vector4d;

Coeffs f1_coefficients(const RayleighProfile& p, double t, double x3);
Coeffs f2_coefficients(const RayleighProfile& p, double t, double x3);
Coeffs expansion_coefficients(const RayleighProfile& p, double t, double x3, double eps);
Coeffs expansion_dt_coefficients(const RayleighProfile& p, double t, double x3, double eps);

struct Sources {
  Eigen::MatrixXd h1, h2, h;  ///< velocity nodes x spatial nodes
};

/// Dictionary, Gamma pair fields and everything else needed to evaluate the expansion at
/// arbitrary (t, x3). Immutable after construction.
class ExpansionTerms {
 public:
  /// include_gamma = false drops the Gamma terms of h1, h2 (always dropped for BGK).
  ExpansionTerms(OperatorPtr op, bool include_gamma = true);

  const CollisionOperator& op() const { return *op_; }
  const OperatorPtr& op_ptr() const { return op_; }
  const BurnettFields& burnett() const { return burnett_; }
  double kappa() const { return burnett_.kappa; }
  bool gamma_included() const { return gamma_included_; }
  /// N x 4 dictionary.
  const Eigen::MatrixXd& basis() const { return basis_; }
  /// Gamma(e_p, e_q) in apply_pairs order; empty when Gamma terms are dropped.
  const std::vector<Eigen::VectorXd>& gamma_pairs() const { return pairs_; }

  Eigen::MatrixXd build_f1(const RayleighProfile& p, double t, const std::vector<double>& xs) const;
  Eigen::MatrixXd build_f2(const RayleighProfile& p, double t, const std::vector<double>& xs) const;
  /// (I - P) f2 as -L^{-1}(v3 d3 f1) + (I - P)(f1^2 / (2 sqrt mu)), evaluated independently.
  Eigen::MatrixXd build_f2_micro_cross(const RayleighProfile& p, double t, const std::vector<double>& xs) const;
  /// f1 + eps f2 at every x.
  Eigen::MatrixXd build_expansion(const RayleighProfile& p, double t, const std::vector<double>& xs,
                                  double eps) const;

  Sources build_sources(const RayleighProfile& p, double t, const std::vector<double>& xs, double eps) const;

 private:
  OperatorPtr op_;
  BurnettFields burnett_;
  Eigen::MatrixXd basis_;
  bool gamma_included_ = false;
  std::vector<Eigen::VectorXd> pairs_;
  Eigen::MatrixXd h1_fields_;  ///< e1, v3 e0, v3 e2, v3 e3, G10, G12, G13
  Eigen::MatrixXd h2_fields_;  ///< e0, e2, e3, G00, G02, G03, G22, G23, G33
};

struct WallData {
  double eps = 0.0;
  double u_b = 0.0;
  Eigen::VectorXd M_w;     ///< renormalised wall Maxwellian at every node (used on v3 > 0)
  Eigen::VectorXd c_mu_mu; ///< c_mu mu with the discrete c_mu
  double c_mu = 0.0;       ///< reciprocal of the discrete half flux of mu
  Eigen::VectorXd r;       ///< boundary datum, zero on v3 < 0
  double taylor_gap_1 = 0.0;
  double taylor_gap_2 = 0.0;
  double linf_w_r = 0.0;
  double tail_ratio = 0.0; ///< max of M_w on the outer node shell / max M_w
};

/// Wall Maxwellian with velocity (eps u_b, 0, 0), renormalised to unit discrete outgoing flux,
/// and the remainder boundary datum r built from f2 at the wall.
/// Throws ConfigError for eps outside (0, 1) or when the shifted Maxwellian is not resolved
/// (tail_ratio above 1e-3).
WallData build_wall_data(const RayleighProfile& p, const GridPtr& grid, double eps, const Eigen::VectorXd& f2_at_wall,
                         const Weight& w = Weight(0.125));

/// Discrete c_mu = 1 / sum_{v3 < 0} w mu |v3|.
double discrete_c_mu(const VelocityGrid& grid);

/// 2 sum_k c_k M_k R (one coefficient set per column of R when coeffs has several columns).
Eigen::MatrixXd apply_Ltilde(const GammaDictionary& dict, const Eigen::Matrix<double, 4, Eigen::Dynamic>& coeffs,
                             const Eigen::MatrixXd& R);
VelocityField apply_Ltilde(const GammaDictionary& dict, const Coeffs& coeffs, const VelocityField& R);
/// Same map with the time-derivative coefficients.
VelocityField apply_Ltilde_t(const GammaDictionary& dict, const Coeffs& dt_coeffs, const VelocityField& R);

}  // namespace rayleigh
