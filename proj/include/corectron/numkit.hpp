#pragma once

// Dense linear-algebra primitives shared by the learners: inverse
// maintenance under rank-one updates, Cholesky block extension, projection
// onto Euclidean balls and ellipsoids under a quadratic metric, and
// log-determinant style spectral functionals of Gram matrices.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace corectron {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a numerical routine cannot proceed (non-SPD input,
/// exhausted jitter, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown on vector/matrix size disagreement.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

namespace numkit {

/// Inverse of A = lambda*I + sum_s g_s g_s^T, maintained directly.
class SpdInverse {
 public:
  SpdInverse() = default;
  /// Inverse of lambda * I_dim.
  SpdInverse(std::size_t dim, double lambda);
  explicit SpdInverse(Matrix inv) : inv_(std::move(inv)) {}

  std::size_t dim() const { return static_cast<std::size_t>(inv_.rows()); }
  const Matrix& matrix() const { return inv_; }

  Vector apply(const Vector& v) const { return inv_ * v; }
  double quad(const Vector& v) const { return v.dot(inv_ * v); }

 private:
  Matrix inv_;
};

/// Lower-triangular L with L L^T equal to a stored SPD matrix, grown one
/// row at a time. Storage grows geometrically; only the leading size()
/// block is meaningful.
class CholFactor {
 public:
  CholFactor() = default;
  explicit CholFactor(const Matrix& lower);

  std::size_t size() const { return size_; }
  auto lower() const {
    const auto n = static_cast<Eigen::Index>(size_);
    return storage_.topLeftCorner(n, n);
  }
  double diag(std::size_t i) const {
    return storage_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
  }

  /// Solve L y = b.
  Vector forward(const Vector& b) const;
  /// Solve L^T x = y.
  Vector backward(const Vector& y) const;

  void append_row(const Vector& y, double beta);

 private:
  Matrix storage_;
  std::size_t size_ = 0;
};

/// Sherman–Morrison: returns (A + g g^T)^{-1} given A^{-1}. The result is
/// symmetrized.
SpdInverse sm_inverse_update(const SpdInverse& state, const Vector& g);

/// In-place variant used in learner hot loops. `ag` must equal A^{-1} g on
/// entry; returns the denominator 1 + g^T A^{-1} g.
double sm_inverse_update_inplace(Matrix& inv, const Vector& ag, double mu);

/// Outcome of a Cholesky block extension.
struct CholExtendInfo {
  Vector y;            ///< solution of L y = k
  double beta = 0.0;   ///< new diagonal entry
  bool jittered = false;
};

/// Extends L (for M) to L' (for [[M, k], [k^T, rho_plus_lambda]]).
/// Applies a single diagonal jitter of 1e-10*rho_plus_lambda when the
/// Schur complement falls below 1e-12*rho_plus_lambda; throws
/// NumericalError if it is still non-positive.
CholExtendInfo chol_extend(CholFactor& factor, const Vector& k, double rho_plus_lambda);

/// Solves (L L^T) x = b.
Vector solve_spd(const CholFactor& factor, const Vector& b);

/// From-scratch lower Cholesky factor; throws NumericalError if not SPD.
CholFactor cholesky(const Matrix& spd);

struct Projection {
  Vector point;
  bool trivial = false;     ///< input already feasible
  double multiplier = 0.0;  ///< KKT multiplier theta >= 0
  int iterations = 0;
};

/// argmin_{||w||_2 <= radius} (w - y)^T A (w - y).
Projection project_ball_mahalanobis(const Matrix& A, const Vector& y, double radius);

/// argmin_{c^T G c <= radius^2} (c - y)^T B (c - y), B SPD and G PSD.
Projection project_ellipsoid_coeff(const Matrix& B, const Matrix& G, const Vector& y,
                                   double radius);

/// Eigenvalues of a symmetric matrix, negatives clamped to zero.
Vector clamped_eigenvalues(const Matrix& K);

/// log det(I + K / lambda) = sum_i log(1 + sigma_i / lambda).
double log_det_ratio(const Matrix& K, double lambda);
double log_det_ratio_from_eigenvalues(const Vector& sigma, double lambda);

/// tr(K (K + lambda I)^{-1}) = sum_i sigma_i / (sigma_i + lambda).
double effective_dimension(const Matrix& K, double lambda);
double effective_dimension_from_eigenvalues(const Vector& sigma, double lambda);

/// Relative symmetric-defect ||M - M^T||_max / max(1, ||M||_max).
double asymmetry(const Matrix& M);

}  // namespace numkit
}  // namespace corectron
