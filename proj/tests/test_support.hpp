#pragma once

// Random instances and independent oracles for the unit tests.

#include "corectron/numkit.hpp"

#include <cmath>
#include <random>

namespace corectron::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Matrix M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
  return M;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n) { return random_matrix(rng, n, 1).col(0); }

inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double ridge = 0.5) {
  const Matrix R = random_matrix(rng, n, n);
  return R * R.transpose() / static_cast<double>(n) + ridge * Matrix::Identity(n, n);
}

inline double rel_err(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

// Projected gradient descent on a convex quadratic (x - y)^T Q (x - y) over
// the Euclidean ball of the given radius. Step 1/(2 lambda_max(Q)).
inline Vector pgd_ball(const Matrix& Q, const Vector& y, double radius, int iterations = 200000) {
  const double L = 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(Q).eigenvalues().maxCoeff();
  Vector x = Vector::Zero(y.size());
  for (int k = 0; k < iterations; ++k) {
    x -= (2.0 / L) * (Q * (x - y));
    const double nx = x.norm();
    if (nx > radius) x *= radius / nx;
  }
  return x;
}

}  // namespace corectron::testing
