#include "rayleigh/collision_operator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "rayleigh/errors.hpp"
#include "rayleigh/gamma.hpp"
#include "rayleigh/operator_cache.hpp"
#include "rayleigh/quadrature.hpp"

namespace rayleigh {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

void require_angular_order(int order) {
  if (order < 8) throw ConfigError("angular order must be at least 8, got " + std::to_string(order));
}

}  // namespace

std::string to_string(Backend b) { return b == Backend::BGK ? "bgk" : "hard_sphere"; }

Backend backend_from_string(const std::string& s) {
  if (s == "bgk" || s == "BGK") return Backend::BGK;
  if (s == "hard_sphere" || s == "hardsphere" || s == "hs" || s == "HS" || s == "hard-sphere") return Backend::HardSphere;
  throw ConfigError("unknown collision backend '" + s + "' (expected bgk or hard_sphere)");
}

CollisionKernelTable::CollisionKernelTable(const VelocityGrid& grid, int angular_order) : n_(grid.n_per_axis()) {
  const AngularRule rule = hemisphere_rule(angular_order);
  const double h = grid.spacing();
  table_.assign(static_cast<std::size_t>(n_) * n_ * n_, 0.0);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      for (int c = 0; c < n_; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
          const Vec3& w = rule.omega[k];
          s += rule.weight[k] * std::abs(a * w[0] + b * w[1] + c * w[2]);
        }
        // the hemisphere covers half of S^2 and |z . omega| is even in omega
        table_[(static_cast<std::size_t>(a) * n_ + b) * n_ + c] = 2.0 * h * s;
      }
}

VelocityField nu_hard_sphere(const GridPtr& grid, int angular_order) {
  if (angular_order < 1) throw ConfigError("angular order must be positive");
  const CollisionKernelTable c(*grid, angular_order);
  const auto N = static_cast<Eigen::Index>(grid->size());
  const Eigen::VectorXd& mu = grid->mu();
  const double w = grid->weight();
  Eigen::VectorXd nu(N);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto I = grid->multi_index(static_cast<std::size_t>(i));
    double s = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      const auto J = grid->multi_index(static_cast<std::size_t>(j));
      s += mu[j] * c({I[0] - J[0], I[1] - J[1], I[2] - J[2]});
    }
    nu[i] = w * s;
  }
  return VelocityField(grid, std::move(nu));
}

double grad_k1(const Vec3& v, const Vec3& eta) {
  const Vec3 d{v[0] - eta[0], v[1] - eta[1], v[2] - eta[2]};
  return kInvSqrt2Pi * std::sqrt(dot3(d, d)) * std::exp(-0.25 * (dot3(v, v) + dot3(eta, eta)));
}

double grad_k2(const Vec3& v, const Vec3& eta) {
  const Vec3 d{v[0] - eta[0], v[1] - eta[1], v[2] - eta[2]};
  const double r2 = dot3(d, d);
  const double e = dot3(v, v) - dot3(eta, eta);
  return 4.0 * kInvSqrt2Pi / std::sqrt(r2) * std::exp(-0.125 * r2 - 0.125 * e * e / r2);
}

double cube_inverse_distance_integral(double h, int order, const std::function<double(const Vec3&)>& g) {
  // Six pyramids with apex at the origin; p = lambda * q with q on a face of the cube.
  const GaussRule lam = gauss_legendre(order, 0.0, 1.0);
  const GaussRule st = gauss_legendre(order, -0.5 * h, 0.5 * h);
  double total = 0.0;
  for (int axis = 0; axis < 3; ++axis)
    for (int sign = -1; sign <= 1; sign += 2) {
      const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
      for (std::size_t is = 0; is < st.x.size(); ++is)
        for (std::size_t it = 0; it < st.x.size(); ++it) {
          Vec3 q{};
          q[static_cast<std::size_t>(axis)] = sign * 0.5 * h;
          q[static_cast<std::size_t>(a1)] = st.x[is];
          q[static_cast<std::size_t>(a2)] = st.x[it];
          const double qn = std::sqrt(dot3(q, q));
          double inner = 0.0;
          for (std::size_t il = 0; il < lam.x.size(); ++il) {
            const double l = lam.x[il];
            inner += lam.w[il] * l * g({l * q[0], l * q[1], l * q[2]});
          }
          // dp = lambda^2 (h/2) dlambda ds dt and 1/|p| = 1/(lambda |q|)
          total += st.w[is] * st.w[it] * 0.5 * h * inner / qn;
        }
    }
  return total;
}

double k2_cell_integral(const Vec3& v, double h, int order) {
  // k2(v, v + p) |p| is smooth away from p = 0 once written along rays.
  auto g = [&](const Vec3& p) {
    const double r2 = dot3(p, p);
    const double e = 2.0 * dot3(v, p) + r2;
    return 4.0 * kInvSqrt2Pi * std::exp(-0.125 * r2 - 0.125 * e * e / r2);
  };
  return cube_inverse_distance_integral(h, order, g);
}

Eigen::MatrixXd assemble_K(const VelocityGrid& grid, const Eigen::VectorXd& nu, int angular_order,
                           std::size_t byte_budget, KAssemblyReport* report) {
  require_angular_order(angular_order);
  const auto N = static_cast<Eigen::Index>(grid.size());
  const std::size_t bytes = static_cast<std::size_t>(N) * static_cast<std::size_t>(N) * sizeof(double);
  if (bytes > byte_budget)
    throw MemoryBudgetError("dense K needs " + std::to_string(bytes) + " bytes, budget is " + std::to_string(byte_budget),
                            bytes, byte_budget);
  if (nu.size() != N) throw GridMismatch("collision frequency has the wrong length");

  const double w = grid.weight();
  const double h = grid.spacing();
  Eigen::MatrixXd K(N, N);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < N; ++j) {
    const Vec3& eta = grid.node(static_cast<std::size_t>(j));
    for (Eigen::Index i = 0; i < N; ++i) {
      if (i == j) continue;
      const Vec3& v = grid.node(static_cast<std::size_t>(i));
      K(i, j) = w * (grad_k2(v, eta) - grad_k1(v, eta));
    }
    K(j, j) = k2_cell_integral(eta, h);
  }

  // Symmetric rank-5 correction: K' Q = diag(nu) Q exactly for the orthonormal invariants Q.
  const Eigen::MatrixXd Q = grid.kernel_basis() * std::sqrt(w);
  const Eigen::MatrixXd KQ = K * Q;
  const Eigen::MatrixXd E = nu.asDiagonal() * Q - KQ;
  if (report) {
    double defect = 0.0;
    const Eigen::MatrixXd& chi = grid.invariants();
    const Eigen::MatrixXd Kchi = K * chi;
    for (int k = 0; k < 5; ++k) {
      const Eigen::VectorXd nuchi = nu.cwiseProduct(chi.col(k));
      defect = std::max(defect, (Kchi.col(k) - nuchi).norm() / nuchi.norm());
    }
    report->enforcement_defect = defect;
    report->bytes = bytes;
  }
  const Eigen::MatrixXd QtE = Q.transpose() * E;
  const Eigen::MatrixXd Qc = Q * QtE;  // N x 5
  K.noalias() += E * Q.transpose();
  K.noalias() += Q * E.transpose();
  K.noalias() -= Qc * Q.transpose();
  for (Eigen::Index j = 0; j < N; ++j)
    for (Eigen::Index i = 0; i < j; ++i) {
      const double s = 0.5 * (K(i, j) + K(j, i));
      K(i, j) = s;
      K(j, i) = s;
    }
  return K;
}

CollisionOperator::CollisionOperator(GridPtr grid, CollisionSettings s) : grid_(std::move(grid)), settings_(std::move(s)) {
  if (settings_.backend == Backend::BGK) {
    if (!(settings_.nu0 > 0.0)) throw ConfigError("BGK relaxation rate nu0 must be positive");
    nu_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid_->size()), settings_.nu0);
  } else {
    require_angular_order(settings_.angular_order);
    build_hard_sphere();
  }
}

CollisionOperator::~CollisionOperator() = default;

std::shared_ptr<const CollisionOperator> CollisionOperator::build(const GridPtr& grid, const CollisionSettings& s) {
  return std::make_shared<const CollisionOperator>(grid, s);
}

void CollisionOperator::build_hard_sphere() {
  const CacheKey key_L{"hard_sphere:L", grid_->n_per_axis(), grid_->v_max(), settings_.angular_order};
  const CacheKey key_nu{"hard_sphere:nu", grid_->n_per_axis(), grid_->v_max(), settings_.angular_order};
  const CacheKey key_rep{"hard_sphere:report", grid_->n_per_axis(), grid_->v_max(), settings_.angular_order};
  const auto N = static_cast<Eigen::Index>(grid_->size());
  const std::size_t bytes = static_cast<std::size_t>(N) * static_cast<std::size_t>(N) * sizeof(double);
  if (bytes > settings_.matrix_byte_budget)
    throw MemoryBudgetError("dense L needs " + std::to_string(bytes) + " bytes, budget is " +
                                std::to_string(settings_.matrix_byte_budget),
                            bytes, settings_.matrix_byte_budget);
  if (!settings_.cache_dir.empty()) {
    const std::filesystem::path dir(settings_.cache_dir);
    if (std::filesystem::exists(dir / key_L.file_name()) && std::filesystem::exists(dir / key_nu.file_name())) {
      L_ = read_matrix_cache(dir / key_L.file_name(), key_L);
      nu_ = read_matrix_cache(dir / key_nu.file_name(), key_nu).col(0);
      if (std::filesystem::exists(dir / key_rep.file_name())) {
        const Eigen::MatrixXd r = read_matrix_cache(dir / key_rep.file_name(), key_rep);
        report_.enforcement_defect = r(0, 0);
      }
      report_.bytes = bytes;
      return;
    }
  }
  nu_ = nu_hard_sphere(grid_, settings_.angular_order).values();
  L_ = assemble_K(*grid_, nu_, settings_.angular_order, settings_.matrix_byte_budget, &report_);
  L_ *= -1.0;
  L_.diagonal() += nu_;
  if (!settings_.cache_dir.empty()) {
    const std::filesystem::path dir(settings_.cache_dir);
    write_matrix_cache(dir / key_L.file_name(), key_L, L_);
    write_matrix_cache(dir / key_nu.file_name(), key_nu, Eigen::MatrixXd(nu_));
    write_matrix_cache(dir / key_rep.file_name(), key_rep, Eigen::MatrixXd::Constant(1, 1, report_.enforcement_defect));
  }
}

const Eigen::MatrixXd& CollisionOperator::matrix() const {
  if (backend() != Backend::HardSphere) throw BackendUnsupported("the BGK operator has no dense matrix");
  return L_;
}

Eigen::MatrixXd CollisionOperator::apply(const Eigen::MatrixXd& block) const {
  if (static_cast<std::size_t>(block.rows()) != grid_->size()) throw GridMismatch("block rows do not match the grid");
  if (backend() == Backend::BGK) return settings_.nu0 * (block - project_P_exact(*grid_, block));
  return L_ * block;
}

VelocityField CollisionOperator::apply_L(const VelocityField& f) const {
  if (!f.grid().same_as(*grid_)) throw GridMismatch("field and operator live on different grids");
  return VelocityField(grid_, apply(Eigen::MatrixXd(f.values())).col(0));
}

Eigen::MatrixXd CollisionOperator::solve_Linv(const Eigen::MatrixXd& block, double tol_perp) const {
  if (static_cast<std::size_t>(block.rows()) != grid_->size()) throw GridMismatch("block rows do not match the grid");
  const Eigen::MatrixXd Pg = project_P_exact(*grid_, block);
  for (Eigen::Index k = 0; k < block.cols(); ++k) {
    const double gn = block.col(k).norm();
    const double pn = Pg.col(k).norm();
    if (pn > tol_perp * gn) throw NotMicroscopic("right-hand side is not orthogonal to the collision invariants", gn > 0 ? pn / gn : 0.0);
  }
  if (backend() == Backend::BGK) return (block - Pg) / settings_.nu0;

  std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> fac;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!inverse_factor_) {
      const Eigen::MatrixXd Q = grid_->kernel_basis() * std::sqrt(grid_->weight());
      Eigen::MatrixXd A = L_;
      A.noalias() += nu_.mean() * (Q * Q.transpose());
      auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(A);
      if (llt->info() != Eigen::Success) throw NumericalError("Cholesky factorisation of L + P failed");
      inverse_factor_ = llt;
    }
    fac = inverse_factor_;
  }
  Eigen::MatrixXd phi = fac->solve(block);
  phi -= project_P_exact(*grid_, phi);
  return phi;
}

VelocityField CollisionOperator::solve_Linv(const VelocityField& g, double tol_perp) const {
  if (!g.grid().same_as(*grid_)) throw GridMismatch("field and operator live on different grids");
  return VelocityField(grid_, solve_Linv(Eigen::MatrixXd(g.values()), tol_perp).col(0));
}

void CollisionOperator::solve_shifted(double lambda, Eigen::MatrixXd& block) const {
  if (static_cast<std::size_t>(block.rows()) != grid_->size()) throw GridMismatch("block rows do not match the grid");
  if (backend() == Backend::BGK) {
    const Eigen::MatrixXd Pb = project_P_exact(*grid_, block);
    block = Pb + (block - Pb) / (1.0 + lambda * settings_.nu0);
    return;
  }
  std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> fac;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = shifted_.find(lambda);
    if (it == shifted_.end()) {
      Eigen::MatrixXd A = lambda * L_;
      A.diagonal().array() += 1.0;
      auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(A);
      if (llt->info() != Eigen::Success) throw NumericalError("Cholesky factorisation of I + lambda L failed");
      it = shifted_.emplace(lambda, llt).first;
    }
    fac = it->second;
  }
  fac->solveInPlace(block);
}

double CollisionOperator::spectral_gap(int iterations) const {
  if (backend() == Backend::BGK) return 1.0;
  const Eigen::VectorXd d = nu_.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd deflate = nu_.cwiseSqrt().asDiagonal() * grid_->invariants();
  auto apply_A = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return d.cwiseProduct(L_ * d.cwiseProduct(x));
  };
  return lanczos_min(apply_A, deflate, static_cast<Eigen::Index>(grid_->size()), iterations, 7);
}

const GammaKernel& CollisionOperator::gamma_kernel() const {
  if (backend() == Backend::BGK) throw BackendUnsupported("Gamma is not defined for the BGK backend");
  std::lock_guard<std::mutex> lock(mutex_);
  if (!gamma_) {
    const int order = settings_.gamma_angular_order > 0 ? settings_.gamma_angular_order : settings_.angular_order;
    gamma_ = std::make_shared<const GammaKernel>(grid_, order);
  }
  return *gamma_;
}

VelocityField apply_L(const CollisionOperator& op, const VelocityField& f) { return op.apply_L(f); }

VelocityField solve_Linv(const CollisionOperator& op, const VelocityField& g, double tol_perp) {
  return op.solve_Linv(g, tol_perp);
}

}  // namespace rayleigh
