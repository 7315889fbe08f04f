#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <Eigen/Dense>

#include "rayleigh/velocity_grid.hpp"

namespace rayleigh {

enum class Backend { BGK, HardSphere };

std::string to_string(Backend b);
/// Accepts "bgk" and "hard_sphere" (also "hs"); throws ConfigError otherwise.
Backend backend_from_string(const std::string& s);

struct CollisionSettings {
  Backend backend = Backend::BGK;
  double nu0 = 1.0;          ///< BGK relaxation rate
  int angular_order = 8;     ///< hemisphere product-rule order for nu and Gamma
  int gamma_angular_order = 0;  ///< 0 means "same as angular_order"
  std::size_t matrix_byte_budget = std::size_t{2} << 30;
  std::string cache_dir;     ///< empty: no disk cache
};

/// Hemisphere-rule approximation of c(z) = int_{S^2} |z . omega| d omega tabulated on the
/// lattice of node differences z = h * d, d in [-(n-1), n-1]^3. Exactly reflection symmetric.
class CollisionKernelTable {
 public:
  CollisionKernelTable(const VelocityGrid& grid, int angular_order);
  /// c(v_i - v_j) for node indices i, j.
  double operator()(const std::array<int, 3>& di) const {
    const int a = di[0] < 0 ? -di[0] : di[0];
    const int b = di[1] < 0 ? -di[1] : di[1];
    const int c = di[2] < 0 ? -di[2] : di[2];
    return table_[(static_cast<std::size_t>(a) * n_ + b) * n_ + c];
  }

 private:
  int n_;
  std::vector<double> table_;
};

/// Hard-sphere collision frequency nu(v) = sum_j w mu(u_j) c(v - u_j) at every node.
VelocityField nu_hard_sphere(const GridPtr& grid, int angular_order);

struct KAssemblyReport {
  double enforcement_defect = 0.0;  ///< max_k |K chi_k - nu chi_k| / |nu chi_k| before the correction
  std::size_t bytes = 0;
};

/// Dense Grad-kernel matrix K (k2 - k1, cell-averaged on the diagonal) with a symmetric
/// rank-5 correction so that K chi = nu chi holds for the five invariants.
/// Throws MemoryBudgetError when N^2 doubles exceed the budget, ConfigError for angular_order < 8.
Eigen::MatrixXd assemble_K(const VelocityGrid& grid, const Eigen::VectorXd& nu, int angular_order,
                           std::size_t byte_budget, KAssemblyReport* report = nullptr);

/// Integral of k2(v, v + p) over the cube |p_i| <= h/2 (the diagonal cell of K).
double k2_cell_integral(const Vec3& v, double h, int order = 8);
/// Integral of g(p)/|p| over the cube |p_i| <= h/2, by six pyramids with apex at the origin.
double cube_inverse_distance_integral(double h, int order, const std::function<double(const Vec3&)>& g);
/// Grad kernels in the normalisation of the full-sphere hard-sphere cross section.
double grad_k1(const Vec3& v, const Vec3& eta);
double grad_k2(const Vec3& v, const Vec3& eta);

class GammaKernel;

/// Linearised collision operator L = nu - K on a fixed grid.
///
/// For BGK, L = nu0 (I - P) with the Gram projection. For hard spheres, L is a dense symmetric
/// matrix. Factorisations are built lazily and cached; all methods are thread-safe.
class CollisionOperator {
 public:
  static std::shared_ptr<const CollisionOperator> build(const GridPtr& grid, const CollisionSettings& s);

  Backend backend() const { return settings_.backend; }
  const CollisionSettings& settings() const { return settings_; }
  const VelocityGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& nu() const { return nu_; }
  /// Dense matrix of L (hard spheres only).
  const Eigen::MatrixXd& matrix() const;
  const KAssemblyReport& assembly_report() const { return report_; }

  VelocityField apply_L(const VelocityField& f) const;
  /// L applied column-wise.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& block) const;

  /// Solve L phi = g with phi orthogonal to the kernel.
  /// Throws NotMicroscopic when |P g| > tol_perp |g|.
  VelocityField solve_Linv(const VelocityField& g, double tol_perp = 1e-9) const;
  Eigen::MatrixXd solve_Linv(const Eigen::MatrixXd& block, double tol_perp = 1e-9) const;

  /// In place block <- (I + lambda L)^{-1} block; the factorisation is cached per lambda.
  void solve_shifted(double lambda, Eigen::MatrixXd& block) const;

  /// sigma = min over g orthogonal to the kernel of <L g, g> / |g|_nu^2 (Lanczos).
  double spectral_gap(int iterations = 80) const;

  /// Discrete Gamma quadrature (hard spheres only); throws BackendUnsupported for BGK.
  const GammaKernel& gamma_kernel() const;

  CollisionOperator(GridPtr grid, CollisionSettings s);
  ~CollisionOperator();

 private:
  void build_hard_sphere();

  GridPtr grid_;
  CollisionSettings settings_;
  Eigen::VectorXd nu_;
  Eigen::MatrixXd L_;
  KAssemblyReport report_;

  mutable std::mutex mutex_;
  mutable std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> inverse_factor_;
  mutable std::map<double, std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>>> shifted_;
  mutable std::shared_ptr<const GammaKernel> gamma_;
};

using OperatorPtr = std::shared_ptr<const CollisionOperator>;

/// Free-function forms.
VelocityField apply_L(const CollisionOperator& op, const VelocityField& f);
VelocityField solve_Linv(const CollisionOperator& op, const VelocityField& g, double tol_perp = 1e-9);

/// Lanczos estimate of the smallest eigenvalue of a symmetric operator restricted to the
/// orthogonal complement of `deflate` (columns need not be orthonormal). Exposed for tests.
template <class Apply>
double lanczos_min(Apply&& apply, const Eigen::MatrixXd& deflate, Eigen::Index n, int iterations,
                   std::uint64_t seed = 7);

}  // namespace rayleigh

#include "rayleigh/detail/lanczos.hpp"
