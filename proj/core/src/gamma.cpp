#include "rayleigh/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "rayleigh/errors.hpp"
#include "rayleigh/operator_cache.hpp"

namespace rayleigh {

namespace {

constexpr int kMaxFields = 8;

struct Stencil {
  int base = 0;
  double t0 = 0.0, t1 = 0.0, t2 = 0.0;
};

/// Stencil of the padded grid around a point given in node-index coordinates.
/// Returns false when every corner lies outside the grid.
inline bool stencil_at(double x0, double x1, double x2, int n, int P, Stencil& s, bool& partial) {
  const double f0 = std::floor(x0), f1 = std::floor(x1), f2 = std::floor(x2);
  const double hi = n - 1;
  if (f0 < -1.0 || f0 > hi || f1 < -1.0 || f1 > hi || f2 < -1.0 || f2 > hi) return false;
  const int i0 = static_cast<int>(f0), i1 = static_cast<int>(f1), i2 = static_cast<int>(f2);
  partial = i0 < 0 || i1 < 0 || i2 < 0 || (i0 == n - 1 && x0 > f0) || (i1 == n - 1 && x1 > f1) ||
            (i2 == n - 1 && x2 > f2);
  s.base = ((i0 + 1) * P + (i1 + 1)) * P + (i2 + 1);
  s.t0 = x0 - f0;
  s.t1 = x1 - f1;
  s.t2 = x2 - f2;
  return true;
}

inline double interp(const double* phi, const Stencil& s, int P, int P2) {
  const double* p = phi + s.base;
  const double a2 = 1.0 - s.t2;
  const double c00 = p[0] * a2 + p[1] * s.t2;
  const double c01 = p[P] * a2 + p[P + 1] * s.t2;
  const double c10 = p[P2] * a2 + p[P2 + 1] * s.t2;
  const double c11 = p[P2 + P] * a2 + p[P2 + P + 1] * s.t2;
  const double c0 = c00 * (1.0 - s.t1) + c01 * s.t1;
  const double c1 = c10 * (1.0 - s.t1) + c11 * s.t1;
  return c0 * (1.0 - s.t0) + c1 * s.t0;
}

inline void scatter(double* buf, const Stencil& s, int P, int P2, double coef) {
  double* p = buf + s.base;
  const double a0 = 1.0 - s.t0, a1 = 1.0 - s.t1, a2 = 1.0 - s.t2;
  p[0] += coef * a0 * a1 * a2;
  p[1] += coef * a0 * a1 * s.t2;
  p[P] += coef * a0 * s.t1 * a2;
  p[P + 1] += coef * a0 * s.t1 * s.t2;
  p[P2] += coef * s.t0 * a1 * a2;
  p[P2 + 1] += coef * s.t0 * a1 * s.t2;
  p[P2 + P] += coef * s.t0 * s.t1 * a2;
  p[P2 + P + 1] += coef * s.t0 * s.t1 * s.t2;
}

int padded_index(const std::array<int, 3>& m, int P) { return ((m[0] + 1) * P + (m[1] + 1)) * P + (m[2] + 1); }

/// Phi = f / sqrt(mu) on the grid padded by one layer of zeros.
std::vector<double> padded_phi(const VelocityGrid& grid, const Eigen::VectorXd& f) {
  const int n = grid.n_per_axis(), P = n + 2;
  std::vector<double> out(static_cast<std::size_t>(P) * P * P, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    out[static_cast<std::size_t>(padded_index(grid.multi_index(i), P))] = f[e] / grid.sqrt_mu()[e];
  }
  return out;
}

struct Parities {
  bool definite = false;
  // sign[k][axis]
  std::vector<std::array<int, 3>> sign;
};

Parities detect_parities(const VelocityGrid& grid, const Eigen::MatrixXd& basis) {
  Parities p;
  p.definite = grid.n_per_axis() % 2 == 0;
  p.sign.resize(static_cast<std::size_t>(basis.cols()));
  for (Eigen::Index k = 0; k < basis.cols(); ++k)
    for (int a = 0; a < 3; ++a) {
      const int s = field_parity(grid, basis.col(k), a);
      p.sign[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)] = s;
      if (s == 0) p.definite = false;
    }
  return p;
}

std::vector<std::size_t> row_list(const VelocityGrid& grid, bool octant) {
  std::vector<std::size_t> rows;
  const int n = grid.n_per_axis();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (octant) {
      const auto m = grid.multi_index(i);
      if (m[0] < n / 2 || m[1] < n / 2 || m[2] < n / 2) continue;
    }
    rows.push_back(i);
  }
  return rows;
}

std::size_t reflect_mask(const VelocityGrid& grid, std::size_t i, int mask) {
  for (int a = 0; a < 3; ++a)
    if (mask & (1 << a)) i = grid.reflect(i, a);
  return i;
}

}  // namespace

int field_parity(const VelocityGrid& grid, const Eigen::VectorXd& f, int axis, double tol) {
  const double scale = f.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 1;
  double even = 0.0, odd = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = f[static_cast<Eigen::Index>(i)];
    const double b = f[static_cast<Eigen::Index>(grid.reflect(i, axis))];
    even = std::max(even, std::abs(a - b));
    odd = std::max(odd, std::abs(a + b));
  }
  if (even <= tol * scale) return 1;
  if (odd <= tol * scale) return -1;
  return 0;
}

GammaKernel::GammaKernel(GridPtr grid, int angular_order)
    : grid_(std::move(grid)), rule_(hemisphere_rule(angular_order)), c_(*grid_, angular_order) {}

std::size_t GammaKernel::pair_index(std::size_t p, std::size_t q, std::size_t m) {
  if (p > q) std::swap(p, q);
  // pairs of row p start after sum_{r<p} (m - r) entries
  return p * m - p * (p - 1) / 2 + (q - p);
}

std::vector<Eigen::VectorXd> GammaKernel::apply_pairs(const Eigen::MatrixXd& basis, GammaDiagnostics* diag) const {
  const VelocityGrid& g = *grid_;
  if (static_cast<std::size_t>(basis.rows()) != g.size()) throw GridMismatch("basis rows do not match the Gamma grid");
  const int m = static_cast<int>(basis.cols());
  if (m < 1 || m > kMaxFields) throw ConfigError("apply_pairs supports 1 to 8 fields");
  const int n = g.n_per_axis(), P = n + 2, P2 = P * P;
  const auto N = static_cast<Eigen::Index>(g.size());
  const std::size_t npairs = static_cast<std::size_t>(m * (m + 1) / 2);

  std::vector<std::vector<double>> phi;
  for (int k = 0; k < m; ++k) phi.push_back(padded_phi(g, basis.col(k)));
  const Parities par = detect_parities(g, basis);
  const std::vector<std::size_t> rows = row_list(g, par.definite);

  std::vector<Eigen::VectorXd> out(npairs, Eigen::VectorXd::Zero(N));
  const Eigen::VectorXd& mu = g.mu();
  const Eigen::VectorXd& smu = g.sqrt_mu();
  const double w = g.weight();
  const double h = g.spacing();
  const std::size_t ndir = rule_.size();
  std::vector<double> dir_w(ndir);
  for (std::size_t k = 0; k < ndir; ++k) dir_w[k] = 2.0 * rule_.weight[k] * h;

  std::uint64_t evals = 0, outside = 0;
  const auto nrows = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : evals, outside)
  for (std::int64_t r = 0; r < nrows; ++r) {
    const std::size_t i = rows[static_cast<std::size_t>(r)];
    const auto I = g.multi_index(i);
    double acc[kMaxFields * (kMaxFields + 1) / 2] = {};
    double loss[kMaxFields] = {};
    double pu[kMaxFields], pv[kMaxFields];
    for (Eigen::Index j = 0; j < N; ++j) {
      const auto J = g.multi_index(static_cast<std::size_t>(j));
      const int d0 = I[0] - J[0], d1 = I[1] - J[1], d2 = I[2] - J[2];
      if (d0 == 0 && d1 == 0 && d2 == 0) continue;
      const double cw = w * c_({d0, d1, d2}) * smu[j];
      for (int k = 0; k < m; ++k) loss[k] += cw * basis(j, k);
      const double wmu = w * mu[j];
      for (std::size_t a = 0; a < ndir; ++a) {
        const Vec3& om = rule_.omega[a];
        const double s = d0 * om[0] + d1 * om[1] + d2 * om[2];
        if (s == 0.0) continue;
        const double B = wmu * dir_w[a] * std::abs(s);
        const double e0 = s * om[0], e1 = s * om[1], e2 = s * om[2];
        Stencil su, sv;
        bool part_u = false, part_v = false;
        const bool in_u = stencil_at(J[0] + e0, J[1] + e1, J[2] + e2, n, P, su, part_u);
        const bool in_v = stencil_at(I[0] - e0, I[1] - e1, I[2] - e2, n, P, sv, part_v);
        evals += 2;
        outside += (!in_u || part_u) + (!in_v || part_v);
        if (!in_u || !in_v) continue;
        for (int k = 0; k < m; ++k) {
          pu[k] = interp(phi[static_cast<std::size_t>(k)].data(), su, P, P2);
          pv[k] = interp(phi[static_cast<std::size_t>(k)].data(), sv, P, P2);
        }
        std::size_t idx = 0;
        for (int p = 0; p < m; ++p)
          for (int q = p; q < m; ++q) acc[idx++] += B * (pu[p] * pv[q] + pu[q] * pv[p]);
      }
    }
    const auto ie = static_cast<Eigen::Index>(i);
    std::size_t idx = 0;
    for (int p = 0; p < m; ++p)
      for (int q = p; q < m; ++q) {
        const double val = 0.5 * smu[ie] * acc[idx] - 0.5 * (basis(ie, q) * loss[p] + basis(ie, p) * loss[q]);
        if (par.definite) {
          for (int mask = 0; mask < 8; ++mask) {
            int sign = 1;
            for (int a = 0; a < 3; ++a)
              if (mask & (1 << a))
                sign *= par.sign[static_cast<std::size_t>(p)][static_cast<std::size_t>(a)] *
                        par.sign[static_cast<std::size_t>(q)][static_cast<std::size_t>(a)];
            out[idx][static_cast<Eigen::Index>(reflect_mask(g, i, mask))] = sign * val;
          }
        } else {
          out[idx][ie] = val;
        }
        ++idx;
      }
  }
  if (diag) {
    diag->evaluations += evals;
    diag->out_of_grid += outside;
    for (int k = 0; k < m; ++k) {
      const double mx = basis.col(k).cwiseAbs().maxCoeff();
      double shell = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto mi = g.multi_index(i);
        const bool edge = mi[0] == 0 || mi[1] == 0 || mi[2] == 0 || mi[0] == n - 1 || mi[1] == n - 1 || mi[2] == n - 1;
        if (edge) shell = std::max(shell, std::abs(basis(static_cast<Eigen::Index>(i), k)));
      }
      const double ratio = mx > 0.0 ? shell / mx : 0.0;
      diag->shell_ratio = std::max(diag->shell_ratio, ratio);
    }
    diag->tail_warning = diag->shell_ratio > 1e-8;
  }
  return out;
}

Eigen::VectorXd GammaKernel::apply(const Eigen::VectorXd& f, const Eigen::VectorXd& g, GammaDiagnostics* diag) const {
  if (static_cast<std::size_t>(f.size()) != grid_->size() || static_cast<std::size_t>(g.size()) != grid_->size())
    throw GridMismatch("Gamma arguments do not match the grid");
  Eigen::MatrixXd basis(f.size(), 2);
  basis.col(0) = f;
  basis.col(1) = g;
  auto pairs = apply_pairs(basis, diag);
  return pairs[pair_index(0, 1, 2)];
}

std::vector<Eigen::MatrixXd> GammaKernel::linear_maps(const Eigen::MatrixXd& basis) const {
  const VelocityGrid& g = *grid_;
  if (static_cast<std::size_t>(basis.rows()) != g.size()) throw GridMismatch("basis rows do not match the Gamma grid");
  const int m = static_cast<int>(basis.cols());
  if (m < 1 || m > kMaxFields) throw ConfigError("linear_maps supports 1 to 8 fields");
  const int n = g.n_per_axis(), P = n + 2, P2 = P * P;
  const auto N = static_cast<Eigen::Index>(g.size());
  const std::size_t padded = static_cast<std::size_t>(P) * P2;

  std::vector<std::vector<double>> phi;
  for (int k = 0; k < m; ++k) phi.push_back(padded_phi(g, basis.col(k)));
  const Parities par = detect_parities(g, basis);
  const std::vector<std::size_t> rows = row_list(g, par.definite);
  std::vector<int> pad_of(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) pad_of[i] = padded_index(g.multi_index(i), P);

  // Transposed storage: column i of Mt[k] is row i of M_k.
  std::vector<Eigen::MatrixXd> Mt(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(N, N));
  const Eigen::VectorXd& mu = g.mu();
  const Eigen::VectorXd& smu = g.sqrt_mu();
  const double w = g.weight();
  const double h = g.spacing();
  const std::size_t ndir = rule_.size();
  std::vector<double> dir_w(ndir);
  for (std::size_t k = 0; k < ndir; ++k) dir_w[k] = 2.0 * rule_.weight[k] * h;

  const auto nrows = static_cast<std::int64_t>(rows.size());
#pragma omp parallel
  {
    std::vector<std::vector<double>> buf(static_cast<std::size_t>(m), std::vector<double>(padded));
#pragma omp for schedule(dynamic, 4)
    for (std::int64_t r = 0; r < nrows; ++r) {
      const std::size_t i = rows[static_cast<std::size_t>(r)];
      const auto ie = static_cast<Eigen::Index>(i);
      const auto I = g.multi_index(i);
      for (auto& b : buf) std::fill(b.begin(), b.end(), 0.0);
      double loss[kMaxFields] = {};
      for (Eigen::Index j = 0; j < N; ++j) {
        const auto J = g.multi_index(static_cast<std::size_t>(j));
        const int d0 = I[0] - J[0], d1 = I[1] - J[1], d2 = I[2] - J[2];
        if (d0 == 0 && d1 == 0 && d2 == 0) continue;
        const double cw = w * c_({d0, d1, d2}) * smu[j];
        for (int k = 0; k < m; ++k) {
          loss[k] += cw * basis(j, k);
          // loss part e_i * w c(v_i - v_j) sqrt(mu_j) g_j, stored unscaled at the padded node of j
          buf[static_cast<std::size_t>(k)][static_cast<std::size_t>(pad_of[static_cast<std::size_t>(j)])] -=
              0.5 * basis(ie, k) * cw * smu[j];
        }
        const double wmu = w * mu[j];
        for (std::size_t a = 0; a < ndir; ++a) {
          const Vec3& om = rule_.omega[a];
          const double s = d0 * om[0] + d1 * om[1] + d2 * om[2];
          if (s == 0.0) continue;
          const double B = 0.5 * smu[ie] * wmu * dir_w[a] * std::abs(s);
          const double e0 = s * om[0], e1 = s * om[1], e2 = s * om[2];
          Stencil su, sv;
          bool part_u = false, part_v = false;
          const bool in_u = stencil_at(J[0] + e0, J[1] + e1, J[2] + e2, n, P, su, part_u);
          const bool in_v = stencil_at(I[0] - e0, I[1] - e1, I[2] - e2, n, P, sv, part_v);
          if (!in_u || !in_v) continue;
          for (int k = 0; k < m; ++k) {
            const double* ph = phi[static_cast<std::size_t>(k)].data();
            double* bk = buf[static_cast<std::size_t>(k)].data();
            scatter(bk, sv, P, P2, B * interp(ph, su, P, P2));
            scatter(bk, su, P, P2, B * interp(ph, sv, P, P2));
          }
        }
      }
      for (int k = 0; k < m; ++k) {
        const auto& bk = buf[static_cast<std::size_t>(k)];
        Eigen::VectorXd row(N);
        // gain entries carry a 1/sqrt(mu_m) from Phi_g; the loss entries were pre-multiplied by sqrt(mu_m)
        for (Eigen::Index mm = 0; mm < N; ++mm) row[mm] = bk[static_cast<std::size_t>(pad_of[static_cast<std::size_t>(mm)])] / smu[mm];
        row[ie] -= 0.5 * loss[k];
        Eigen::MatrixXd& T = Mt[static_cast<std::size_t>(k)];
        if (par.definite) {
          for (int mask = 0; mask < 8; ++mask) {
            int sign = 1;
            for (int a = 0; a < 3; ++a)
              if (mask & (1 << a)) sign *= par.sign[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)];
            const auto ri = static_cast<Eigen::Index>(reflect_mask(g, i, mask));
            for (Eigen::Index mm = 0; mm < N; ++mm)
              T(static_cast<Eigen::Index>(reflect_mask(g, static_cast<std::size_t>(mm), mask)), ri) = sign * row[mm];
          }
        } else {
          T.col(ie) = row;
        }
      }
    }
  }
  for (auto& T : Mt) T.transposeInPlace();
  return Mt;
}

VelocityField apply_Gamma(const CollisionOperator& op, const VelocityField& f, const VelocityField& g,
                          GammaDiagnostics* diag) {
  if (!f.grid().same_as(op.grid()) || !g.grid().same_as(op.grid()))
    throw GridMismatch("Gamma arguments and operator live on different grids");
  const GammaKernel& k = op.gamma_kernel();
  return VelocityField(op.grid_ptr(), k.apply(f.values(), g.values(), diag));
}

GammaDictionary build_gamma_dictionary(const CollisionOperator& op, const Eigen::MatrixXd& basis) {
  const GammaKernel& kernel = op.gamma_kernel();
  const VelocityGrid& g = op.grid();
  GammaDictionary dict;
  const std::string& dir = op.settings().cache_dir;
  const std::uint64_t bh = fnv1a(basis.data(), static_cast<std::size_t>(basis.size()) * sizeof(double));
  std::vector<CacheKey> keys;
  for (Eigen::Index k = 0; k < basis.cols(); ++k)
    keys.push_back({"hard_sphere:gamma:" + std::to_string(bh) + ":" + std::to_string(k), g.n_per_axis(), g.v_max(),
                    kernel.angular_order()});
  bool cached = !dir.empty();
  for (const auto& key : keys) cached = cached && std::filesystem::exists(std::filesystem::path(dir) / key.file_name());
  if (cached) {
    for (const auto& key : keys) dict.M.push_back(read_matrix_cache(std::filesystem::path(dir) / key.file_name(), key));
  } else {
    dict.M = kernel.linear_maps(basis);
    if (!dir.empty())
      for (std::size_t k = 0; k < keys.size(); ++k)
        write_matrix_cache(std::filesystem::path(dir) / keys[k].file_name(), keys[k], dict.M[k]);
  }
  const Eigen::MatrixXd Q = g.kernel_basis() * std::sqrt(g.weight());
  for (const auto& M : dict.M) {
    const double nm = M.norm();
    dict.conservation_defect.push_back(nm > 0.0 ? (Q.transpose() * M).norm() / nm : 0.0);
  }
  return dict;
}

}  // namespace rayleigh
