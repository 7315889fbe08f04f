#pragma once

#include <cstdint>
#include <vector>

#include "rayleigh/velocity_grid.hpp"

namespace rayleigh {

/// Gauss-Legendre nodes and weights on [a, b].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
GaussRule gauss_legendre(int order, double a = -1.0, double b = 1.0);

/// Product rule on the upper hemisphere omega_3 > 0: Gauss-Legendre in cos(theta)
/// with `order` points times 2*order equally spaced azimuths.
/// The direction set is closed under omega_1 -> -omega_1, omega_2 -> -omega_2 and
/// (omega_1, omega_2) -> -(omega_1, omega_2), so odd reflections of v map it onto itself up to sign.
struct AngularRule {
  int order = 0;
  std::vector<Vec3> omega;
  std::vector<double> weight;  ///< sums to 2 pi
  std::size_t size() const { return omega.size(); }
};
/// Throws ConfigError for order < 1.
AngularRule hemisphere_rule(int order);

/// Full-sphere product rule (Gauss-Legendre in cos(theta) on [-1, 1]).
AngularRule sphere_rule(int order);

/// Stateless counter-based generator (splitmix64 finaliser): the value depends only on
/// (seed, stream, counter), so results are identical for any thread schedule.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const;
  /// Uniform on [0, 1).
  double uniform(std::uint64_t stream, std::uint64_t counter) const;
  /// Standard normal by Box-Muller on two consecutive counters.
  double normal(std::uint64_t stream, std::uint64_t counter) const;

 private:
  std::uint64_t seed_;
};

}  // namespace rayleigh
