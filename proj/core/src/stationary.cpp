#include "rayleigh/stationary.hpp"

#include <cmath>
#include <numbers>

#include "rayleigh/errors.hpp"

namespace rayleigh {

std::vector<double> stationary_y_grid(double y_max, int n) {
  if (n < 2 || !(y_max > 0.0)) throw ConfigError("stationary grid needs y_max > 0 and at least 2 nodes");
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = y_max * i / (n - 1);
  return y;
}

Eigen::VectorXd build_U(const std::vector<double>& y) {
  Eigen::VectorXd U(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0) throw NumericalError("U(y) is defined for y >= 0");
    U[static_cast<Eigen::Index>(i)] = std::erfc(y[i]);
  }
  return U;
}

Eigen::MatrixXd build_G1(const VelocityGrid& grid, const Eigen::VectorXd& U) {
  const Eigen::VectorXd e1 = grid.invariants().col(1);
  return e1 * (1.0 - U.array()).matrix().transpose();
}

StationaryProblem make_stationary(double alpha, GridPtr grid, double y_max, int n_y) {
  if (!(alpha >= 0.0)) throw ConfigError("wall speed alpha must be non-negative");
  StationaryProblem pb;
  pb.alpha = alpha;
  pb.y = stationary_y_grid(y_max, n_y);
  pb.U = build_U(pb.y);
  pb.grid = std::move(grid);
  pb.G1 = build_G1(*pb.grid, pb.U);
  return pb;
}

double boundary_trace_max(const StationaryProblem& pb) {
  double m = 0.0;
  for (std::size_t i = 0; i < pb.grid->size(); ++i)
    if (pb.grid->node(i)[1] > 0.0) m = std::max(m, std::abs(pb.G1(static_cast<Eigen::Index>(i), 0)));
  return m;
}

double residual_G1(const StationaryProblem& pb, const CollisionOperator& op) {
  const VelocityGrid& g = *pb.grid;
  if (!g.same_as(op.grid())) throw GridMismatch("operator and problem use different velocity grids");
  const double a = pb.alpha > 0.0 ? pb.alpha : 1.0;
  const auto N = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd v2(N), e1 = g.invariants().col(1);
  for (Eigen::Index k = 0; k < N; ++k) v2[k] = g.node(static_cast<std::size_t>(k))[1];
  const Eigen::MatrixXd LG = op.apply(a * pb.G1);
  const double c = 2.0 / std::sqrt(std::numbers::pi);
  double sum = 0.0;
  const std::size_t n = pb.y.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double dU = -c * std::exp(-pb.y[j] * pb.y[j]);
    // d_y G1 = -U' v1 sqrt mu
    const Eigen::VectorXd res = v2.cwiseProduct(-a * dU * e1) + LG.col(static_cast<Eigen::Index>(j)) +
                                a * dU * v2.cwiseProduct(e1);
    const double wy = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
    sum += wy * res.squaredNorm();
  }
  const double hy = pb.y[1] - pb.y[0];
  return std::sqrt(g.weight() * hy * sum) / a;
}

std::vector<MismatchRow> farfield_mismatch(const VelocityGrid& grid, const std::vector<double>& alphas) {
  std::vector<MismatchRow> rows;
  const auto N = static_cast<Eigen::Index>(grid.size());
  const Eigen::VectorXd& mu = grid.mu();
  Eigen::VectorXd v1mu(N), shifted(N);
  for (const double alpha : alphas) {
    for (Eigen::Index k = 0; k < N; ++k) {
      const Vec3& v = grid.node(static_cast<std::size_t>(k));
      v1mu[k] = v[0] * mu[k];
      const double d = v[0] - alpha;
      shifted[k] = 0.063493635934240969 * std::exp(-0.5 * (d * d + v[1] * v[1] + v[2] * v[2]));
    }
    MismatchRow r;
    r.alpha = alpha;
    r.m = norm_l2_v(grid, (mu + alpha * v1mu) - mu);
    r.gap2 = norm_l2_v(grid, shifted - mu - alpha * v1mu);
    if (alpha > 0.0) {
      r.m_over_alpha = r.m / alpha;
      r.gap2_over_alpha2 = r.gap2 / (alpha * alpha);
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace rayleigh
