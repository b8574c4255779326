#include "corectron/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace corectron::numkit {

namespace {

constexpr double kProjectionTol = 1e-10;
constexpr double kTrivialSlack = 1e-12;
constexpr int kMaxRootIterations = 500;

void require_square(const Matrix& M, const char* what) {
  if (M.rows() != M.cols()) {
    std::ostringstream os;
    os << what << ": expected square matrix, got " << M.rows() << "x" << M.cols();
    throw DimensionError(os.str());
  }
}

void require_size(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << got << " vs " << want << ")";
    throw DimensionError(os.str());
  }
}

void require_symmetric(const Matrix& M, const char* what) {
  if (asymmetry(M) > 1e-8) {
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
  }
}

// Safeguarded Newton iteration on phi(theta) = 1/norm(theta) - 1/radius,
// where norm is strictly decreasing in theta. `eval` returns (norm, phi').
template <typename Eval>
double find_multiplier(Eval eval, double radius, double hi, int& iterations) {
  double lo = 0.0;
  double theta = 0.0;
  for (iterations = 1; iterations <= kMaxRootIterations; ++iterations) {
    const auto [norm, dphi] = eval(theta);
    if (std::abs(norm - radius) <= kProjectionTol * radius) return theta;
    if (norm > radius) {
      lo = theta;
    } else {
      hi = theta;
    }
    const double phi = 1.0 / norm - 1.0 / radius;
    double next = (dphi > 0.0 && std::isfinite(dphi)) ? theta - phi / dphi : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) return next;
    theta = next;
  }
  return theta;
}

}  // namespace

SpdInverse::SpdInverse(std::size_t dim, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("SpdInverse: lambda must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  inv_ = Matrix::Identity(d, d) / lambda;
}

CholFactor::CholFactor(const Matrix& lower) : storage_(lower), size_(static_cast<std::size_t>(lower.rows())) {
  require_square(lower, "CholFactor");
}

Vector CholFactor::forward(const Vector& b) const {
  require_size(b.size(), static_cast<Eigen::Index>(size_), "CholFactor::forward");
  if (size_ == 0) return Vector();
  return lower().triangularView<Eigen::Lower>().solve(b);
}

Vector CholFactor::backward(const Vector& y) const {
  require_size(y.size(), static_cast<Eigen::Index>(size_), "CholFactor::backward");
  if (size_ == 0) return Vector();
  return lower().transpose().triangularView<Eigen::Upper>().solve(y);
}

void CholFactor::append_row(const Vector& y, double beta) {
  const auto n = static_cast<Eigen::Index>(size_);
  require_size(y.size(), n, "CholFactor::append_row");
  if (n + 1 > storage_.rows()) {
    const Eigen::Index cap = std::max<Eigen::Index>(8, 2 * storage_.rows());
    Matrix grown = Matrix::Zero(cap, cap);
    grown.topLeftCorner(n, n) = storage_.topLeftCorner(n, n);
    storage_.swap(grown);
  }
  storage_.row(n).head(n) = y.transpose();
  storage_(n, n) = beta;
  ++size_;
}

SpdInverse sm_inverse_update(const SpdInverse& state, const Vector& g) {
  require_size(g.size(), static_cast<Eigen::Index>(state.dim()), "sm_inverse_update");
  Matrix inv = state.matrix();
  const Vector ag = inv * g;
  sm_inverse_update_inplace(inv, ag, g.dot(ag));
  return SpdInverse(std::move(inv));
}

double sm_inverse_update_inplace(Matrix& inv, const Vector& ag, double mu) {
  const double denom = 1.0 + mu;
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw NumericalError("sm_inverse_update: non-positive Sherman-Morrison denominator");
  }
  if (mu == 0.0) return denom;
  inv.noalias() -= (ag / denom) * ag.transpose();
  inv = (0.5 * (inv + inv.transpose())).eval();
  return denom;
}

CholExtendInfo chol_extend(CholFactor& factor, const Vector& k, double rho_plus_lambda) {
  require_size(k.size(), static_cast<Eigen::Index>(factor.size()), "chol_extend");
  if (!(rho_plus_lambda > 0.0)) {
    throw std::invalid_argument("chol_extend: rho_plus_lambda must be positive");
  }
  CholExtendInfo info;
  info.y = factor.forward(k);
  double schur = rho_plus_lambda - info.y.squaredNorm();
  if (schur <= 1e-12 * rho_plus_lambda) {
    schur += 1e-10 * rho_plus_lambda;
    info.jittered = true;
    if (!(schur > 0.0)) {
      throw NumericalError("chol_extend: degenerate Gram matrix (jitter exhausted)");
    }
  }
  info.beta = std::sqrt(schur);
  factor.append_row(info.y, info.beta);
  return info;
}

Vector solve_spd(const CholFactor& factor, const Vector& b) {
  require_size(b.size(), static_cast<Eigen::Index>(factor.size()), "solve_spd");
  return factor.backward(factor.forward(b));
}

CholFactor cholesky(const Matrix& spd) {
  require_square(spd, "cholesky");
  Eigen::LLT<Matrix> llt(spd);
  if (llt.info() != Eigen::Success) throw NumericalError("cholesky: matrix is not SPD");
  return CholFactor(Matrix(llt.matrixL()));
}

Projection project_ball_mahalanobis(const Matrix& A, const Vector& y, double radius) {
  require_square(A, "project_ball_mahalanobis");
  require_size(y.size(), A.rows(), "project_ball_mahalanobis");
  if (!(radius > 0.0)) throw std::invalid_argument("project_ball_mahalanobis: radius must be positive");

  Projection out;
  if (y.norm() <= radius * (1.0 + kTrivialSlack)) {
    out.point = y;
    out.trivial = true;
    return out;
  }
  require_symmetric(A, "project_ball_mahalanobis");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  if (eig.info() != Eigen::Success) throw NumericalError("project_ball_mahalanobis: eigensolver failed");
  const Vector& lam = eig.eigenvalues();
  if (!(lam.minCoeff() > 0.0)) throw NumericalError("project_ball_mahalanobis: metric is not SPD");

  // In the eigenbasis w(theta)_i = b_i / (lam_i + theta) with b = diag(lam) Q^T y.
  const Vector b = lam.cwiseProduct(eig.eigenvectors().transpose() * y);
  auto eval = [&](double theta) {
    const Vector denom = lam.array() + theta;
    const double sq = (b.array() / denom.array()).square().sum();
    const double cube = (b.array().square() / denom.array().cube()).sum();
    const double norm = std::sqrt(sq);
    return std::pair<double, double>{norm, cube / (sq * norm)};
  };
  const double hi = lam.maxCoeff() * y.norm() / radius;
  out.multiplier = find_multiplier(eval, radius, hi, out.iterations);
  const Vector coords = b.array() / (lam.array() + out.multiplier);
  out.point = eig.eigenvectors() * coords;
  return out;
}

Projection project_ellipsoid_coeff(const Matrix& B, const Matrix& G, const Vector& y, double radius) {
  require_square(B, "project_ellipsoid_coeff");
  require_square(G, "project_ellipsoid_coeff");
  require_size(G.rows(), B.rows(), "project_ellipsoid_coeff");
  require_size(y.size(), B.rows(), "project_ellipsoid_coeff");
  if (!(radius > 0.0)) throw std::invalid_argument("project_ellipsoid_coeff: radius must be positive");

  Projection out;
  const double slack = radius * (1.0 + kTrivialSlack);
  if (y.dot(G * y) <= slack * slack) {
    out.point = y;
    out.trivial = true;
    return out;
  }
  require_symmetric(B, "project_ellipsoid_coeff");
  require_symmetric(G, "project_ellipsoid_coeff");

  // Whiten by B = L L^T: with v = L^T c the problem becomes
  // min ||v - L^T y||^2 s.t. v^T M v <= r^2, M = L^{-1} G L^{-T}.
  Eigen::LLT<Matrix> llt(B);
  if (llt.info() != Eigen::Success) throw NumericalError("project_ellipsoid_coeff: B is not SPD");
  const auto L = llt.matrixL();
  Matrix M = L.solve(G);
  M = L.solve(M.transpose()).eval();
  M = (0.5 * (M + M.transpose())).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  if (eig.info() != Eigen::Success) throw NumericalError("project_ellipsoid_coeff: eigensolver failed");
  const Vector lam = eig.eigenvalues().cwiseMax(0.0);
  const Vector v0 = llt.matrixU() * y;
  const Vector vt = eig.eigenvectors().transpose() * v0;

  auto eval = [&](double theta) {
    const Eigen::ArrayXd denom = 1.0 + theta * lam.array();
    const double h = (lam.array() * vt.array().square() / denom.square()).sum();
    const double dh = (lam.array().square() * vt.array().square() / denom.cube()).sum();
    const double norm = std::sqrt(h);
    return std::pair<double, double>{norm, dh / (h * norm)};
  };
  // h(theta) <= ||v0||^2 / (4 theta) since (1 + theta lam)^2 >= 4 theta lam.
  const double hi = v0.squaredNorm() / (4.0 * radius * radius);
  out.multiplier = find_multiplier(eval, radius, hi, out.iterations);
  const Vector coords = vt.array() / (1.0 + out.multiplier * lam.array());
  out.point = llt.matrixU().solve(Vector(eig.eigenvectors() * coords));
  return out;
}

Vector clamped_eigenvalues(const Matrix& K) {
  require_square(K, "clamped_eigenvalues");
  if (K.rows() == 0) return Vector();
  require_symmetric(K, "clamped_eigenvalues");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(K, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("clamped_eigenvalues: eigensolver failed");
  return eig.eigenvalues().cwiseMax(0.0);
}

double log_det_ratio_from_eigenvalues(const Vector& sigma, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("log_det_ratio: lambda must be positive");
  double sum = 0.0;
  for (double s : sigma) sum += std::log1p(std::max(s, 0.0) / lambda);
  return sum;
}

double log_det_ratio(const Matrix& K, double lambda) {
  return log_det_ratio_from_eigenvalues(clamped_eigenvalues(K), lambda);
}

double effective_dimension_from_eigenvalues(const Vector& sigma, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("effective_dimension: lambda must be positive");
  double sum = 0.0;
  for (double s : sigma) {
    const double c = std::max(s, 0.0);
    sum += c / (c + lambda);
  }
  return sum;
}

double effective_dimension(const Matrix& K, double lambda) {
  return effective_dimension_from_eigenvalues(clamped_eigenvalues(K), lambda);
}

double asymmetry(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() / scale;
}

}  // namespace corectron::numkit
