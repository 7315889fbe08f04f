#include "rayleigh/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "rayleigh/errors.hpp"

namespace rayleigh {

GaussRule gauss_legendre(int order, double a, double b) {
  if (order < 1) throw ConfigError("Gauss-Legendre order must be positive");
  GaussRule r;
  r.x.resize(static_cast<std::size_t>(order));
  r.w.resize(static_cast<std::size_t>(order));
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= order; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute the derivative at the converged root
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= order; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = order * (z * p0 - p1) / (z * z - 1.0);
    const double wt = 2.0 / ((1.0 - z * z) * dp * dp);
    const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
    r.x[static_cast<std::size_t>(i)] = mid - half * z;
    r.x[static_cast<std::size_t>(order - 1 - i)] = mid + half * z;
    r.w[static_cast<std::size_t>(i)] = half * wt;
    r.w[static_cast<std::size_t>(order - 1 - i)] = half * wt;
  }
  return r;
}

namespace {

AngularRule product_rule(int order, double ct_lo) {
  if (order < 1) throw ConfigError("angular order must be positive");
  const GaussRule ct = gauss_legendre(order, ct_lo, 1.0);
  const int nphi = 2 * order;
  const double dphi = 2.0 * std::numbers::pi / nphi;
  AngularRule rule;
  rule.order = order;
  for (int a = 0; a < order; ++a) {
    const double c = ct.x[static_cast<std::size_t>(a)];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int b = 0; b < nphi; ++b) {
      const double phi = (b + 0.5) * dphi;
      rule.omega.push_back({s * std::cos(phi), s * std::sin(phi), c});
      rule.weight.push_back(ct.w[static_cast<std::size_t>(a)] * dphi);
    }
  }
  return rule;
}

}  // namespace

AngularRule hemisphere_rule(int order) { return product_rule(order, 0.0); }

AngularRule sphere_rule(int order) { return product_rule(order, -1.0); }

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t counter) const {
  std::uint64_t z = seed_ ^ (stream * 0xD1B54A32D192ED03ULL) ^ (counter * 0x9E3779B97F4A7C15ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  // second round decorrelates neighbouring counters further
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t counter) const {
  return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t stream, std::uint64_t counter) const {
  const double u1 = 1.0 - uniform(stream, 2 * counter);
  const double u2 = uniform(stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rayleigh
