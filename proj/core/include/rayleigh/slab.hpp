#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rayleigh/collision_operator.hpp"
#include "rayleigh/expansion.hpp"
#include "rayleigh/norms.hpp"
#include "rayleigh/rayleigh_profile.hpp"

namespace rayleigh {

enum class SlabMode { Remainder, DirectBGK, DirectHS };

std::string to_string(SlabMode m);
/// "remainder", "direct_bgk", "direct_hs"; throws ConfigError otherwise.
SlabMode slab_mode_from_string(const std::string& s);

struct SlabConfig {
  double eps = 0.2;
  int n_x = 200;
  double x_max = 0.0;            ///< 0 selects the smallest admissible value 8 sqrt(4 kappa (t_final + delta))
  double t_final = 0.5;
  double cfl = 0.5;
  SlabMode mode = SlabMode::DirectBGK;
  bool include_Ltilde = true;    ///< remainder mode, hard spheres only
  bool include_GammaRR = false;  ///< remainder mode, hard spheres only
  int transport_order = 2;       ///< 1: upwind, 2: minmod-limited MUSCL
  double output_interval = 0.05;
  double node_offset = 0.5;      ///< x_i = (i + node_offset) dx
  double positivity_tolerance = 1e-12;
  double beta = 0.125;           ///< weight exponent of the sup norms
  Eigen::MatrixXd R0;            ///< initial remainder (velocity nodes x n_x); empty means zero
};

struct SlabState {
  double t = 0.0;
  std::size_t steps = 0;
  /// Remainder: R. DirectBGK: F. DirectHS: g = (F - mu) / sqrt(mu).
  Eigen::MatrixXd values;
  /// DirectBGK: exponents of the discrete Maxwellian per cell (warm start of the next solve).
  Eigen::MatrixXd alpha;
  double min_F = 0.0;  ///< direct modes: running minimum of F
};

struct StepStats {
  double wall_flux_defect = 0.0;  ///< |sum w v3 (trace)| at x3 = 0 in the mass density of the mode
  double min_F = 0.0;             ///< direct modes
};

struct SlabRun {
  SlabState final_state;
  std::vector<NormRow> norms;
  std::vector<std::pair<double, double>> deviation;  ///< (t, |(F - mu)/(eps sqrt mu) - f1|)
  double E = 0.0;                                    ///< sup of the deviation over output times
  double max_wall_flux_defect = 0.0;
  double dt = 0.0;
  std::vector<MonitorEntry> monitor;
  std::vector<std::string> warnings;
};

/// Slab x3 in [0, x_max] with the wall at x3 = 0; one column of the state per spatial cell.
class SlabSolver {
 public:
  /// Throws ConfigError for invalid configurations (eps outside (0,1), x_max too short,
  /// cfl outside (0,1], Gamma toggles without the hard-sphere backend, ...).
  SlabSolver(SlabConfig cfg, RayleighProfile profile, std::shared_ptr<const ExpansionTerms> terms);

  const SlabConfig& config() const { return cfg_; }
  const RayleighProfile& profile() const { return profile_; }
  double dx() const { return dx_; }
  const std::vector<double>& xs() const { return xs_; }
  /// CFL bound cfl * eps * dx / v_max.
  double dt_max() const;
  /// Step actually used by run(): the output interval split into equal steps below dt_max.
  double dt() const;
  /// Wall data at time t (remainder datum r depends on t through f2 at the wall).
  WallData wall_data(double t) const;

  SlabState init_state() const;
  /// One step of the configured mode. Throws ConfigError when dt exceeds the CFL bound and
  /// NumericalError on non-finite values or unrealisable moments.
  StepStats step(SlabState& s, double dt) const;

  /// Remainder R of a state (reconstructed from F in the direct modes).
  Eigen::MatrixXd remainder_of(const SlabState& s) const;
  /// |(F - mu)/(eps sqrt mu) - f1|_{L2_{x,v}} at the state's time.
  double deviation(const SlabState& s) const;

  /// Integrate to t_final, emitting a norm row per output time through on_row.
  SlabRun run(const std::function<void(const NormRow&)>& on_row = {}) const;

 private:
  StepStats step_remainder(SlabState& s, double dt) const;
  StepStats step_direct_bgk(SlabState& s, double dt) const;
  StepStats step_direct_hs(SlabState& s, double dt) const;
  /// -(dt / (eps dx)) times the flux difference, given the inflow ghosts at both ends.
  Eigen::MatrixXd transport_increment(const Eigen::MatrixXd& U, const Eigen::VectorXd& ghost_wall,
                                      const Eigen::VectorXd& ghost_far, double dt) const;
  double wall_defect(const Eigen::MatrixXd& U, const Eigen::VectorXd& ghost_wall,
                     const Eigen::VectorXd& density) const;
  void check_finite(const Eigen::MatrixXd& U, double t) const;

  SlabConfig cfg_;
  RayleighProfile profile_;
  std::shared_ptr<const ExpansionTerms> terms_;
  OperatorPtr op_;
  GridPtr grid_;
  double dx_ = 0.0;
  std::vector<double> xs_;
  Eigen::ArrayXd v3pos_, v3neg_;
  WallData wall0_;
  GammaDictionary dict_;
};

/// Exponents alpha of the discrete Maxwellian exp(alpha0 + alpha1..3 . v + alpha4 |v|^2) whose
/// discrete moments (1, v, |v|^2) match those of F. Throws NumericalError when the moments are
/// not realisable or Newton fails.
Eigen::Matrix<double, 5, 1> discrete_maxwellian_exponents(const VelocityGrid& grid, const Eigen::VectorXd& F,
                                                          const Eigen::Matrix<double, 5, 1>* warm = nullptr);
Eigen::VectorXd discrete_maxwellian(const VelocityGrid& grid, const Eigen::Matrix<double, 5, 1>& alpha);

}  // namespace rayleigh
