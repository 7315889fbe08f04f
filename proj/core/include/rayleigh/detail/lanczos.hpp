#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "rayleigh/quadrature.hpp"

namespace rayleigh {

template <class Apply>
double lanczos_min(Apply&& apply, const Eigen::MatrixXd& deflate, Eigen::Index n, int iterations,
                   std::uint64_t seed) {
  // Orthonormal basis of the deflated subspace.
  Eigen::MatrixXd D = deflate;
  for (int pass = 0; pass < 2; ++pass)
    for (Eigen::Index k = 0; k < D.cols(); ++k) {
      for (Eigen::Index j = 0; j < k; ++j) D.col(k) -= D.col(j).dot(D.col(k)) * D.col(j);
      D.col(k).normalize();
    }
  auto project = [&](Eigen::VectorXd& x) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index k = 0; k < D.cols(); ++k) x -= D.col(k).dot(x) * D.col(k);
  };

  const CounterRng rng(seed);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = rng.normal(0, static_cast<std::uint64_t>(i));
  project(q);
  q.normalize();

  const int m = static_cast<int>(std::min<Eigen::Index>(iterations, n - D.cols()));
  Eigen::MatrixXd V(n, m);
  std::vector<double> alpha, beta;
  V.col(0) = q;
  for (int k = 0; k < m; ++k) {
    Eigen::VectorXd w = apply(V.col(k));
    project(w);
    const double a = V.col(k).dot(w);
    alpha.push_back(a);
    // full reorthogonalisation against the deflated space and the Krylov basis, twice
    for (int pass = 0; pass < 2; ++pass) {
      project(w);
      w -= V.leftCols(k + 1) * (V.leftCols(k + 1).transpose() * w);
    }
    const double b = w.norm();
    if (k + 1 == m || b < 1e-10 * std::abs(a)) break;
    beta.push_back(b);
    V.col(k + 1) = w / b;
  }
  const auto mm = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(mm, mm);
  for (Eigen::Index k = 0; k < mm; ++k) {
    T(k, k) = alpha[static_cast<std::size_t>(k)];
    if (k + 1 < mm) T(k, k + 1) = T(k + 1, k) = beta[static_cast<std::size_t>(k)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace rayleigh
