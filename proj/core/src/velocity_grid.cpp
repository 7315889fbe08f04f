#include "rayleigh/velocity_grid.hpp"

#include <cmath>
#include <string>

#include "rayleigh/errors.hpp"

namespace rayleigh {

namespace {

constexpr double kMuNorm = 0.063493635934240969;  // (2 pi)^{-3/2}

void require_same_grid(const VelocityGrid& a, const VelocityGrid& b) {
  if (!a.same_as(b)) throw GridMismatch("velocity fields live on different grids");
}

}  // namespace

VelocityGrid::VelocityGrid(int n_per_axis, double v_max) : n_(n_per_axis), v_max_(v_max) {
  if (n_per_axis < 2) throw ConfigError("velocity grid needs at least 2 nodes per axis, got " + std::to_string(n_per_axis));
  if (!(v_max > 0.0) || !std::isfinite(v_max)) throw ConfigError("velocity cutoff v_max must be positive");
  h_ = 2.0 * v_max / n_;
  w_ = h_ * h_ * h_;
  const std::size_t total = static_cast<std::size_t>(n_) * n_ * n_;
  nodes_.resize(total);
  for (int i1 = 0; i1 < n_; ++i1)
    for (int i2 = 0; i2 < n_; ++i2)
      for (int i3 = 0; i3 < n_; ++i3) nodes_[index(i1, i2, i3)] = {axis_value(i1), axis_value(i2), axis_value(i3)};

  const auto N = static_cast<Eigen::Index>(total);
  mu_.resize(N);
  sqrt_mu_.resize(N);
  chi_.resize(N, 5);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Vec3& v = nodes_[static_cast<std::size_t>(i)];
    const double r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    mu_[i] = kMuNorm * std::exp(-0.5 * r2);
    sqrt_mu_[i] = std::sqrt(kMuNorm) * std::exp(-0.25 * r2);
    chi_(i, 0) = sqrt_mu_[i];
    chi_(i, 1) = v[0] * sqrt_mu_[i];
    chi_(i, 2) = v[1] * sqrt_mu_[i];
    chi_(i, 3) = v[2] * sqrt_mu_[i];
    chi_(i, 4) = 0.5 * (r2 - 3.0) * sqrt_mu_[i];
  }
  // Modified Gram-Schmidt twice in the weighted inner product.
  q_ = chi_;
  for (int pass = 0; pass < 2; ++pass) {
    for (int k = 0; k < 5; ++k) {
      for (int j = 0; j < k; ++j) q_.col(k) -= (w_ * q_.col(j).dot(q_.col(k))) * q_.col(j);
      q_.col(k) /= std::sqrt(w_ * q_.col(k).squaredNorm());
    }
  }
}

std::size_t VelocityGrid::reflect(std::size_t i, int axis) const {
  auto m = multi_index(i);
  m[static_cast<std::size_t>(axis)] = n_ - 1 - m[static_cast<std::size_t>(axis)];
  return index(m[0], m[1], m[2]);
}

GridPtr build_grid(int n_per_axis, double v_max) {
  return std::make_shared<const VelocityGrid>(n_per_axis, v_max);
}

VelocityField::VelocityField(GridPtr grid) : grid_(std::move(grid)) {
  values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_->size()));
}

VelocityField::VelocityField(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != grid_->size())
    throw GridMismatch("field length does not match the velocity grid");
}

VelocityField maxwellian(const GridPtr& grid) { return VelocityField(grid, grid->mu()); }

double inner(const VelocityGrid& grid, const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  if (static_cast<std::size_t>(f.size()) != grid.size() || static_cast<std::size_t>(g.size()) != grid.size())
    throw GridMismatch("inner product of fields with the wrong length");
  return grid.weight() * f.dot(g);
}

double inner(const VelocityField& f, const VelocityField& g) {
  require_same_grid(f.grid(), g.grid());
  return inner(f.grid(), f.values(), g.values());
}

double norm_l2_v(const VelocityGrid& grid, const Eigen::VectorXd& f) {
  return std::sqrt(inner(grid, f, f));
}

Projection project_P(const VelocityField& f) {
  const VelocityGrid& g = f.grid();
  const Eigen::MatrixXd& chi = g.invariants();
  const Eigen::VectorXd raw = g.weight() * (chi.transpose() * f.values());
  Moments m;
  m.a = raw[0];
  m.b = {raw[1], raw[2], raw[3]};
  m.c = raw[4] / 1.5;
  Eigen::VectorXd coeff(5);
  coeff << m.a, m.b[0], m.b[1], m.b[2], m.c;
  return {VelocityField(f.grid_ptr(), chi * coeff), m};
}

Eigen::Matrix<double, 5, Eigen::Dynamic> moments_exact(const VelocityGrid& grid, const Eigen::MatrixXd& block) {
  if (static_cast<std::size_t>(block.rows()) != grid.size()) throw GridMismatch("block rows do not match the grid");
  const Eigen::MatrixXd& chi = grid.invariants();
  const Eigen::Matrix<double, 5, 5> gram = grid.weight() * (chi.transpose() * chi);
  const Eigen::MatrixXd rhs = grid.weight() * (chi.transpose() * block);
  return gram.llt().solve(rhs);
}

Eigen::MatrixXd project_P_exact(const VelocityGrid& grid, const Eigen::MatrixXd& block) {
  if (static_cast<std::size_t>(block.rows()) != grid.size()) throw GridMismatch("block rows do not match the grid");
  const Eigen::MatrixXd& q = grid.kernel_basis();
  return q * (grid.weight() * (q.transpose() * block));
}

Projection project_P_exact(const VelocityField& f) {
  const VelocityGrid& g = f.grid();
  const auto coeff = moments_exact(g, f.values());
  Moments m;
  m.a = coeff(0, 0);
  m.b = {coeff(1, 0), coeff(2, 0), coeff(3, 0)};
  m.c = coeff(4, 0);
  return {VelocityField(f.grid_ptr(), project_P_exact(g, Eigen::MatrixXd(f.values()))), m};
}

Weight::Weight(double beta) : beta_(beta) {
  if (!(beta > 0.0) || beta > 0.125)
    throw ConfigError("weight exponent beta must lie in (0, 1/8], got " + std::to_string(beta));
}

double Weight::operator()(const Vec3& v) const {
  return std::exp(beta_ * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
}

Eigen::VectorXd weight_values(const VelocityGrid& grid, const Weight& w) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) out[static_cast<Eigen::Index>(i)] = w(grid.node(i));
  return out;
}

VelocityField apply_weight(const VelocityField& f, const Weight& w) {
  return VelocityField(f.grid_ptr(), weight_values(f.grid(), w).cwiseProduct(f.values()));
}

}  // namespace rayleigh
