#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rayleigh/collision_operator.hpp"
#include "rayleigh/quadrature.hpp"
#include "rayleigh/velocity_grid.hpp"

namespace rayleigh {

struct GammaDiagnostics {
  std::uint64_t evaluations = 0;   ///< post-collision lookups
  std::uint64_t out_of_grid = 0;   ///< lookups with at least one stencil node outside the grid
  double shell_ratio = 0.0;        ///< max |f| on the outer node shell / max |f|
  bool tail_warning = false;       ///< shell_ratio above 1e-8
};

/// Direct quadrature of the symmetric bilinear operator
/// Gamma(f, g) = Q(sqrt(mu) f, sqrt(mu) g) / sqrt(mu) (symmetrised) for hard spheres.
///
/// Post-collision values of f / sqrt(mu) are interpolated trilinearly; stencil nodes outside
/// the grid contribute zero. The loss term uses the same angular rule so that
/// Gamma(sqrt mu, sqrt mu) = 0 up to lookups that leave the grid.
class GammaKernel {
 public:
  GammaKernel(GridPtr grid, int angular_order);

  const VelocityGrid& grid() const { return *grid_; }
  int angular_order() const { return rule_.order; }
  std::size_t directions() const { return rule_.size(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& f, const Eigen::VectorXd& g, GammaDiagnostics* diag = nullptr) const;

  /// Gamma(e_p, e_q) for all p <= q over the columns of `basis`, ordered (0,0), (0,1), ..., (1,1), ...
  /// Uses reflection symmetry when every column has a definite parity in each velocity component.
  std::vector<Eigen::VectorXd> apply_pairs(const Eigen::MatrixXd& basis, GammaDiagnostics* diag = nullptr) const;

  /// Dense matrices M_k with M_k g = Gamma(e_k, g).
  std::vector<Eigen::MatrixXd> linear_maps(const Eigen::MatrixXd& basis) const;

  /// Index of the pair (p, q) in the output of apply_pairs for m basis fields.
  static std::size_t pair_index(std::size_t p, std::size_t q, std::size_t m);

 private:
  GridPtr grid_;
  AngularRule rule_;
  CollisionKernelTable c_;
};

/// Parity of a field under v_axis -> -v_axis: +1, -1, or 0 when neither holds to `tol`.
int field_parity(const VelocityGrid& grid, const Eigen::VectorXd& f, int axis, double tol = 1e-12);

/// Gamma(f, g); throws BackendUnsupported for the BGK backend and GridMismatch for foreign fields.
VelocityField apply_Gamma(const CollisionOperator& op, const VelocityField& f, const VelocityField& g,
                          GammaDiagnostics* diag = nullptr);

struct GammaDictionary {
  std::vector<Eigen::MatrixXd> M;
  /// |Q^T M_k|_F / |M_k|_F with Q the orthonormal invariants.
  std::vector<double> conservation_defect;
};

/// Matrices M_k g = Gamma(e_k, g) for the columns e_k of `basis`. Cached on disk under the
/// operator's cache directory, keyed by grid, angular order and a hash of the basis.
GammaDictionary build_gamma_dictionary(const CollisionOperator& op, const Eigen::MatrixXd& basis);

}  // namespace rayleigh
