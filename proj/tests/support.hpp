#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "rayleigh/quadrature.hpp"

namespace rayleigh::test {

inline constexpr std::uint64_t kSeed = 20240611;

/// Standard normal block, columns drawn from consecutive counters of one stream.
inline Eigen::MatrixXd normal_block(Eigen::Index rows, Eigen::Index cols, std::uint64_t stream,
                                    std::uint64_t seed = kSeed) {
  const CounterRng rng(seed);
  Eigen::MatrixXd b(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) b(i, j) = rng.normal(stream, 2 * static_cast<std::uint64_t>(j * rows + i));
  return b;
}

inline Eigen::VectorXd normal_vector(Eigen::Index n, std::uint64_t stream) { return normal_block(n, 1, stream).col(0); }

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace rayleigh::test
