#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rayleigh/velocity_grid.hpp"

namespace rayleigh {

struct WallData;

/// Boundary sides of the wall x3 = 0 with the domain x3 > 0.
/// Plus: v3 < 0 (leaving the gas into the wall); Minus: v3 > 0 (emitted by the wall).
enum class GammaSide { Plus, Minus };

/// Flux sum_{v3 < 0} w |v3| f sqrt(mu) of the trace hitting the wall.
double wall_bound_flux(const VelocityGrid& grid, const Eigen::VectorXd& trace);

/// P_gamma f = c_mu sqrt(mu) * wall_bound_flux(f), with the discrete c_mu, at every node.
Eigen::VectorXd P_gamma(const VelocityGrid& grid, const Eigen::VectorXd& trace);

/// Norms over (x3, v): blocks are velocity nodes x spatial cells of width dx.
double norm_l2_xv(const VelocityGrid& grid, const Eigen::MatrixXd& f, double dx);
double norm_l2_nu(const VelocityGrid& grid, const Eigen::VectorXd& nu, const Eigen::MatrixXd& f, double dx);
/// max |w(v) f|.
double norm_linf_w(const VelocityGrid& grid, const Eigen::MatrixXd& f, const Weight& w);
/// (sum over the side of w |v3| |f|^p)^{1/p}; unit surface measure.
double norm_gamma(const VelocityGrid& grid, const Eigen::VectorXd& trace, double p, GammaSide side);

/// |Pf|_{L6_x L2_v} with the continuum norm of the kernel basis, |Pf|^2 = a^2 + |b|^2 + 3c^2/2.
double l6_macroscopic(const VelocityGrid& grid, const Eigen::MatrixXd& f, double dx);
/// L6_x norms of a, |b| and c separately.
struct MacroscopicL6 {
  double a = 0.0, b = 0.0, c = 0.0;
};
MacroscopicL6 l6_moments(const VelocityGrid& grid, const Eigen::MatrixXd& f, double dx);

struct NormRow {
  double t = 0.0;
  double l2_R = 0.0;
  double l2_IP_R_nu_cum = 0.0;    ///< eps^{-1} |(I-P)R|_{L2_{t,x,nu}} on [0, t]
  double gamma_1mPg_cum = 0.0;    ///< eps^{-1/2} |(1-P_gamma)R|_{L2_{t,gamma+}} on [0, t]
  double linf_w_eps12_R = 0.0;
  double l6_PR = 0.0;
  double l2_dtR = 0.0;
  double linf_w_eps32_dtR = 0.0;
  double q_l4_gamma = 0.0;        ///< |q|_{L4_{gamma-}} of the boundary inhomogeneity
  double M_norm = 0.0;
  double N_norm = 0.0;
  // not in the CSV schema
  double l2_IP_dtR_nu_cum = 0.0;
  double gamma_1mPg_dtR_cum = 0.0;
  MacroscopicL6 l6 = {};
};

/// CSV header and row formatting for norms.csv.
std::vector<std::string> norm_csv_header();
std::vector<double> norm_csv_values(const NormRow& r);

/// Streaming evaluation of the energy norm M and sup norm N of a remainder R(t).
///
/// accumulate_step integrates the two dissipations of R over every time step; add_snapshot
/// records output-cadence snapshots, from which d_t R is differenced (centered in the interior,
/// one-sided at the ends). Rows become available once d_t R is known for them.
class NormAccumulator {
 public:
  NormAccumulator(GridPtr grid, Eigen::VectorXd nu, double eps, double dx, const Weight& w,
                  const WallData* wall = nullptr);

  /// Integrate the dissipations with the state at the start of a step of length dt.
  void accumulate_step(const Eigen::MatrixXd& R, double dt);
  /// Record a snapshot; returns the row that became complete, if any.
  std::optional<NormRow> add_snapshot(double t, const Eigen::MatrixXd& R);
  /// Complete the last pending row. Throws NumericalError with fewer than 3 snapshots recorded.
  std::optional<NormRow> finish();
  std::size_t snapshots() const { return count_; }

 private:
  struct Snap {
    double t;
    Eigen::MatrixXd R;
    double cum_nu, cum_gamma;
  };
  NormRow make_row(const Snap& s, const Eigen::MatrixXd& dtR);
  double micro_nu_sq(const Eigen::MatrixXd& f) const;
  double gamma_defect_sq(const Eigen::MatrixXd& f) const;

  GridPtr grid_;
  Eigen::VectorXd nu_;
  double eps_, dx_;
  Weight w_;
  const WallData* wall_;
  Eigen::VectorXd wv_;
  double cum_nu_ = 0.0, cum_gamma_ = 0.0;
  double cum_dt_nu_ = 0.0, cum_dt_gamma_ = 0.0;
  double prev_dt_nu_ = 0.0, prev_dt_gamma_ = 0.0, prev_row_t_ = 0.0;
  double sup_l2_ = 0.0, sup_l2_dt_ = 0.0, sup_linf_ = 0.0, sup_linf_dt_ = 0.0;
  std::vector<Snap> ring_;  ///< up to 3 snapshots
  std::size_t count_ = 0, rows_ = 0;
};

/// Energy norms of a finished series: M and N of the last row.
struct EnergyNorms {
  double M = 0.0, N = 0.0;
};
EnergyNorms energy_norms(const std::vector<NormRow>& rows);

/// |(F - mu)/(eps sqrt mu) - f1|_{L2_{x,v}} at one time.
double expansion_deviation_direct(const VelocityGrid& grid, const Eigen::MatrixXd& F, const Eigen::MatrixXd& f1,
                                  double eps, double dx);
/// Same quantity from a remainder: |eps f2 + eps^{1/2} R|_{L2_{x,v}}.
double expansion_deviation_remainder(const VelocityGrid& grid, const Eigen::MatrixXd& f2, const Eigen::MatrixXd& R,
                                     double eps, double dx);

struct MonitorEntry {
  std::string id;
  double lhs = 0.0, rhs = 0.0;
  double ratio = 0.0;
  bool vacuous = false;  ///< lhs = rhs = 0
};
MonitorEntry monitor_ratio(std::string id, double lhs, double rhs);

}  // namespace rayleigh
