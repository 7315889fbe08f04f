#include "rayleigh/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rayleigh/errors.hpp"
#include "rayleigh/expansion.hpp"

namespace rayleigh {

double wall_bound_flux(const VelocityGrid& grid, const Eigen::VectorXd& trace) {
  if (static_cast<std::size_t>(trace.size()) != grid.size()) throw GridMismatch("trace does not match the grid");
  double j = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v3 = grid.node(i)[2];
    const auto e = static_cast<Eigen::Index>(i);
    if (v3 < 0.0) j -= v3 * trace[e] * grid.sqrt_mu()[e];
  }
  return grid.weight() * j;
}

Eigen::VectorXd P_gamma(const VelocityGrid& grid, const Eigen::VectorXd& trace) {
  return (discrete_c_mu(grid) * wall_bound_flux(grid, trace)) * grid.sqrt_mu();
}

double norm_l2_xv(const VelocityGrid& grid, const Eigen::MatrixXd& f, double dx) {
  return std::sqrt(grid.weight() * dx * f.squaredNorm());
}

double norm_l2_nu(const VelocityGrid& grid, const Eigen::VectorXd& nu, const Eigen::MatrixXd& f, double dx) {
  return std::sqrt(grid.weight() * dx * (nu.asDiagonal() * f.cwiseAbs2()).sum());
}

double norm_linf_w(const VelocityGrid& grid, const Eigen::MatrixXd& f, const Weight& w) {
  if (f.size() == 0) return 0.0;
  return (weight_values(grid, w).asDiagonal() * f).cwiseAbs().maxCoeff();
}

double norm_gamma(const VelocityGrid& grid, const Eigen::VectorXd& trace, double p, GammaSide side) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v3 = grid.node(i)[2];
    if ((side == GammaSide::Plus) != (v3 < 0.0)) continue;
    s += std::abs(v3) * std::pow(std::abs(trace[static_cast<Eigen::Index>(i)]), p);
  }
  return std::pow(grid.weight() * s, 1.0 / p);
}

MacroscopicL6 l6_moments(const VelocityGrid& grid, const Eigen::MatrixXd& f, double dx) {
  const auto m = moments_exact(grid, f);
  MacroscopicL6 r;
  for (Eigen::Index k = 0; k < f.cols(); ++k) {
    r.a += std::pow(m(0, k), 6);
    r.b += std::pow(m.col(k).segment(1, 3).squaredNorm(), 3);
    r.c += std::pow(m(4, k), 6);
  }
  r.a = std::pow(dx * r.a, 1.0 / 6.0);
  r.b = std::pow(dx * r.b, 1.0 / 6.0);
  r.c = std::pow(dx * r.c, 1.0 / 6.0);
  return r;
}

double l6_macroscopic(const VelocityGrid& grid, const Eigen::MatrixXd& f, double dx) {
  const auto m = moments_exact(grid, f);
  double s = 0.0;
  for (Eigen::Index k = 0; k < f.cols(); ++k) {
    const double sq = m(0, k) * m(0, k) + m.col(k).segment(1, 3).squaredNorm() + 1.5 * m(4, k) * m(4, k);
    s += sq * sq * sq;
  }
  return std::pow(dx * s, 1.0 / 6.0);
}

std::vector<std::string> norm_csv_header() {
  return {"t",      "l2_R",   "l2_IP_R_nu_cum",   "gamma_1mPg_cum", "linf_w_eps12_R", "l6_PR",
          "l2_dtR", "linf_w_eps32_dtR", "q_l4_gamma", "M_norm",         "N_norm"};
}

std::vector<double> norm_csv_values(const NormRow& r) {
  return {r.t,      r.l2_R,   r.l2_IP_R_nu_cum,   r.gamma_1mPg_cum, r.linf_w_eps12_R, r.l6_PR,
          r.l2_dtR, r.linf_w_eps32_dtR, r.q_l4_gamma, r.M_norm,         r.N_norm};
}

NormAccumulator::NormAccumulator(GridPtr grid, Eigen::VectorXd nu, double eps, double dx, const Weight& w,
                                 const WallData* wall)
    : grid_(std::move(grid)), nu_(std::move(nu)), eps_(eps), dx_(dx), w_(w), wall_(wall) {
  wv_ = weight_values(*grid_, w_);
}

double NormAccumulator::micro_nu_sq(const Eigen::MatrixXd& f) const {
  const Eigen::MatrixXd micro = f - project_P_exact(*grid_, f);
  return grid_->weight() * dx_ * (nu_.asDiagonal() * micro.cwiseAbs2()).sum();
}

double NormAccumulator::gamma_defect_sq(const Eigen::MatrixXd& f) const {
  if (f.cols() == 0) return 0.0;
  const Eigen::VectorXd trace = f.col(0);
  const Eigen::VectorXd d = trace - P_gamma(*grid_, trace);
  return std::pow(norm_gamma(*grid_, d, 2.0, GammaSide::Plus), 2);
}

void NormAccumulator::accumulate_step(const Eigen::MatrixXd& R, double dt) {
  cum_nu_ += dt * micro_nu_sq(R);
  cum_gamma_ += dt * gamma_defect_sq(R);
}

NormRow NormAccumulator::make_row(const Snap& s, const Eigen::MatrixXd& dtR) {
  NormRow r;
  r.t = s.t;
  r.l2_R = norm_l2_xv(*grid_, s.R, dx_);
  r.l2_IP_R_nu_cum = std::sqrt(s.cum_nu) / eps_;
  r.gamma_1mPg_cum = std::sqrt(s.cum_gamma) / std::sqrt(eps_);
  r.linf_w_eps12_R = std::sqrt(eps_) * (s.R.size() ? (wv_.asDiagonal() * s.R).cwiseAbs().maxCoeff() : 0.0);
  r.l6_PR = l6_macroscopic(*grid_, s.R, dx_);
  r.l6 = l6_moments(*grid_, s.R, dx_);
  r.l2_dtR = norm_l2_xv(*grid_, dtR, dx_);
  r.linf_w_eps32_dtR = eps_ * std::sqrt(eps_) * (dtR.size() ? (wv_.asDiagonal() * dtR).cwiseAbs().maxCoeff() : 0.0);
  if (wall_ != nullptr && s.R.cols() > 0) {
    // boundary inhomogeneity: everything in the emitted trace beyond P_gamma R
    const double j = wall_bound_flux(*grid_, s.R.col(0));
    const Eigen::VectorXd q =
        ((wall_->M_w - wall_->c_mu_mu).array() / grid_->sqrt_mu().array()).matrix() * j + wall_->r;
    r.q_l4_gamma = norm_gamma(*grid_, q, 4.0, GammaSide::Minus);
  }

  const double dnu = micro_nu_sq(dtR), dgam = gamma_defect_sq(dtR);
  if (rows_ > 0) {
    const double h = s.t - prev_row_t_;
    cum_dt_nu_ += 0.5 * h * (prev_dt_nu_ + dnu);
    cum_dt_gamma_ += 0.5 * h * (prev_dt_gamma_ + dgam);
  }
  prev_dt_nu_ = dnu;
  prev_dt_gamma_ = dgam;
  prev_row_t_ = s.t;
  ++rows_;
  r.l2_IP_dtR_nu_cum = std::sqrt(cum_dt_nu_) / eps_;
  r.gamma_1mPg_dtR_cum = std::sqrt(cum_dt_gamma_) / std::sqrt(eps_);

  sup_l2_ = std::max(sup_l2_, r.l2_R);
  sup_l2_dt_ = std::max(sup_l2_dt_, r.l2_dtR);
  sup_linf_ = std::max(sup_linf_, r.linf_w_eps12_R);
  sup_linf_dt_ = std::max(sup_linf_dt_, r.linf_w_eps32_dtR);
  r.M_norm = r.l2_IP_R_nu_cum + r.gamma_1mPg_cum + sup_l2_ + r.l2_IP_dtR_nu_cum + r.gamma_1mPg_dtR_cum + sup_l2_dt_;
  r.N_norm = sup_linf_ + sup_linf_dt_;
  return r;
}

std::optional<NormRow> NormAccumulator::add_snapshot(double t, const Eigen::MatrixXd& R) {
  if (!ring_.empty() && !(t > ring_.back().t)) throw NumericalError("snapshots must have increasing times");
  ring_.push_back({t, R, cum_nu_, cum_gamma_});
  ++count_;
  std::optional<NormRow> out;
  if (ring_.size() == 2 && count_ == 2) {
    const Snap& a = ring_[0];
    const Snap& b = ring_[1];
    out = make_row(a, (b.R - a.R) / (b.t - a.t));
  } else if (ring_.size() == 3) {
    const Snap& a = ring_[0];
    const Snap& c = ring_[2];
    out = make_row(ring_[1], (c.R - a.R) / (c.t - a.t));
    ring_.erase(ring_.begin());
  }
  return out;
}

std::optional<NormRow> NormAccumulator::finish() {
  if (count_ < 3) throw NumericalError("energy norms need at least 3 snapshots, got " + std::to_string(count_));
  const Snap& a = ring_[ring_.size() - 2];
  const Snap& b = ring_.back();
  NormRow r = make_row(b, (b.R - a.R) / (b.t - a.t));
  ring_.clear();
  return r;
}

EnergyNorms energy_norms(const std::vector<NormRow>& rows) {
  if (rows.size() < 3) throw NumericalError("energy norms need at least 3 snapshots");
  return {rows.back().M_norm, rows.back().N_norm};
}

double expansion_deviation_direct(const VelocityGrid& grid, const Eigen::MatrixXd& F, const Eigen::MatrixXd& f1,
                                  double eps, double dx) {
  const Eigen::MatrixXd d =
      ((F.colwise() - grid.mu()).array().colwise() / (eps * grid.sqrt_mu().array())).matrix() - f1;
  return norm_l2_xv(grid, d, dx);
}

double expansion_deviation_remainder(const VelocityGrid& grid, const Eigen::MatrixXd& f2, const Eigen::MatrixXd& R,
                                     double eps, double dx) {
  return norm_l2_xv(grid, eps * f2 + std::sqrt(eps) * R, dx);
}

MonitorEntry monitor_ratio(std::string id, double lhs, double rhs) {
  MonitorEntry e;
  e.id = std::move(id);
  e.lhs = lhs;
  e.rhs = rhs;
  if (lhs == 0.0 && rhs == 0.0) {
    e.vacuous = true;
    e.ratio = 0.0;
  } else {
    e.ratio = rhs != 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
  }
  return e;
}

}  // namespace rayleigh
