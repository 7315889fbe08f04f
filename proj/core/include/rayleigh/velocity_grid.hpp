#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rayleigh {

using Vec3 = std::array<double, 3>;

/// Uniform midpoint grid on the cube [-v_max, v_max]^3.
///
/// Nodes are ordered with the third component fastest:
/// index(i1, i2, i3) = (i1 * n + i2) * n + i3.
class VelocityGrid {
 public:
  VelocityGrid(int n_per_axis, double v_max);

  int n_per_axis() const { return n_; }
  double v_max() const { return v_max_; }
  double spacing() const { return h_; }
  std::size_t size() const { return nodes_.size(); }
  /// Quadrature weight of every node (cell volume).
  double weight() const { return w_; }

  const Vec3& node(std::size_t i) const { return nodes_[i]; }
  std::span<const Vec3> nodes() const { return nodes_; }
  double axis_value(int k) const { return -v_max_ + (k + 0.5) * h_; }

  std::size_t index(int i1, int i2, int i3) const {
    return (static_cast<std::size_t>(i1) * n_ + i2) * n_ + i3;
  }
  std::array<int, 3> multi_index(std::size_t i) const {
    const int i3 = static_cast<int>(i % n_);
    const int i2 = static_cast<int>((i / n_) % n_);
    const int i1 = static_cast<int>(i / (static_cast<std::size_t>(n_) * n_));
    return {i1, i2, i3};
  }
  /// Node obtained by flipping the sign of one velocity component.
  std::size_t reflect(std::size_t i, int axis) const;

  bool same_as(const VelocityGrid& other) const {
    return n_ == other.n_ && v_max_ == other.v_max_;
  }

  /// Global Maxwellian and its square root at the nodes.
  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::VectorXd& sqrt_mu() const { return sqrt_mu_; }

  /// Collision invariants chi_0..chi_4 = sqrt(mu) * {1, v1, v2, v3, (|v|^2-3)/2}, one per column.
  const Eigen::MatrixXd& invariants() const { return chi_; }
  /// Invariant basis orthonormalised in the weighted inner product (Q^T Q * w = I).
  const Eigen::MatrixXd& kernel_basis() const { return q_; }

 private:
  int n_;
  double v_max_;
  double h_;
  double w_;
  std::vector<Vec3> nodes_;
  Eigen::VectorXd mu_;
  Eigen::VectorXd sqrt_mu_;
  Eigen::MatrixXd chi_;
  Eigen::MatrixXd q_;
};

using GridPtr = std::shared_ptr<const VelocityGrid>;

/// Throws ConfigError for n < 2 or v_max <= 0.
GridPtr build_grid(int n_per_axis, double v_max);

/// Nodal values of a function of velocity on a fixed grid.
class VelocityField {
 public:
  explicit VelocityField(GridPtr grid);
  VelocityField(GridPtr grid, Eigen::VectorXd values);

  const VelocityGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

/// Coefficients of Pf = (a + b.v + c (|v|^2 - 3)/2) sqrt mu.
struct Moments {
  double a = 0.0;
  Vec3 b{0.0, 0.0, 0.0};
  double c = 0.0;
};

struct Projection {
  VelocityField Pf;
  Moments moments;
};

/// Continuum Maxwellian (2 pi)^{-3/2} exp(-|v|^2/2) at every node.
VelocityField maxwellian(const GridPtr& grid);

/// Weighted inner product sum_i w f_i g_i, fixed summation order.
double inner(const VelocityGrid& grid, const Eigen::VectorXd& f, const Eigen::VectorXd& g);
double inner(const VelocityField& f, const VelocityField& g);
double norm_l2_v(const VelocityGrid& grid, const Eigen::VectorXd& f);

/// Moments by direct quadrature against the continuum normalisation.
Projection project_P(const VelocityField& f);
/// Projection using the discrete Gram matrix of the invariants: P^2 = P to round-off.
Projection project_P_exact(const VelocityField& f);
/// Column-wise exact projection of a block of fields (one field per column).
Eigen::MatrixXd project_P_exact(const VelocityGrid& grid, const Eigen::MatrixXd& block);
/// Coefficients (a, b1, b2, b3, c) of every column of a block, exact projection convention.
Eigen::Matrix<double, 5, Eigen::Dynamic> moments_exact(const VelocityGrid& grid,
                                                       const Eigen::MatrixXd& block);

/// Velocity weight w(v) = exp(beta |v|^2), beta in (0, 1/8].
class Weight {
 public:
  explicit Weight(double beta);
  double beta() const { return beta_; }
  double operator()(const Vec3& v) const;

 private:
  double beta_;
};

VelocityField apply_weight(const VelocityField& f, const Weight& w);
/// Nodal values of w on the grid.
Eigen::VectorXd weight_values(const VelocityGrid& grid, const Weight& w);

}  // namespace rayleigh
