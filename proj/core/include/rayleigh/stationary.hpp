#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rayleigh/collision_operator.hpp"
#include "rayleigh/velocity_grid.hpp"

namespace rayleigh {

/// Steady half-line shear problem: normal coordinate y with the wall at y = 0, normal velocity v2.
struct StationaryProblem {
  double alpha = 0.01;
  std::vector<double> y;
  Eigen::VectorXd U;   ///< erfc(y)
  GridPtr grid;
  Eigen::MatrixXd G1;  ///< velocity nodes x y nodes
};

/// Uniform nodes on [0, y_max], both ends included.
std::vector<double> stationary_y_grid(double y_max = 3.5, int n = 64);

/// U(y) = erfc(y); throws NumericalError for negative y.
Eigen::VectorXd build_U(const std::vector<double>& y);

/// G1(y, v) = (1 - U(y)) v1 sqrt(mu).
Eigen::MatrixXd build_G1(const VelocityGrid& grid, const Eigen::VectorXd& U);

/// Throws ConfigError for alpha < 0 or a grid with fewer than 2 nodes.
StationaryProblem make_stationary(double alpha, GridPtr grid, double y_max = 3.5, int n_y = 64);

/// max |G1(0, v)| over v2 > 0.
double boundary_trace_max(const StationaryProblem& pb);

/// |v2 d_y(alpha G1) + L(alpha G1) + alpha U'(y) v1 v2 sqrt mu|_{L2_{y,v}} / alpha (trapezoid in y).
double residual_G1(const StationaryProblem& pb, const CollisionOperator& op);

struct MismatchRow {
  double alpha = 0.0;
  double m = 0.0;           ///< |(mu + alpha v1 mu) - mu|_{L2_v}
  double m_over_alpha = 0.0;
  double gap2 = 0.0;        ///< |mu(v1 - alpha, v2, v3) - mu - alpha v1 mu|_{L2_v}
  double gap2_over_alpha2 = 0.0;
};

std::vector<MismatchRow> farfield_mismatch(const VelocityGrid& grid, const std::vector<double>& alphas);

}  // namespace rayleigh
