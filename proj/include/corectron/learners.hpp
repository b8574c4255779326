#pragma once

// Online learners for contextual recommendation. Every learner produces a
// base-space utility prediction w_t^base for the current context and then
// consumes the base residual g_t^base = xhat_t^base - x_t^base.
//
//   CoRectron   projection-free second-order update w = -A^{-1} zeta
//   CoRectronK  the same learner in representer (Gram-system) form
//   Ogd         projected online gradient descent on the unit ball
//   Ons         online Newton step with Mahalanobis projection
//   Kons        kernelized ONS in coefficient space

#include "corectron/lifting.hpp"
#include "corectron/numkit.hpp"

#include <memory>
#include <string>
#include <vector>

namespace corectron::learners {

/// Per-update scalars. The potential terms are only filled in by the
/// CoRectron learners.
struct UpdateInfo {
  double mu = 0.0;               // <g_t, A_{t-1}^{-1} g_t>
  double nu = 0.0;               // <g_t, A_{t-1}^{-1} zeta_{t-1}>
  double phi = 0.0;              // <zeta_t, A_t^{-1} zeta_t> from the maintained state
  double phi_incremental = 0.0;  // sum of (mu + 2 nu - nu^2) / (1 + mu)
  double gt_mu = 0.0;            // <g_t, A_t^{-1} g_t>
  double g_norm = 0.0;           // ||g_t||_V
  double zeta_norm_prev = 0.0;   // ||zeta_{t-1}||_V
  bool projected = false;        // nontrivial Mahalanobis projection
};

/// Explicit CoRectron in R^d.
class CoRectron {
 public:
  CoRectron(std::size_t dim, double lambda);

  /// w_t = -A_{t-1}^{-1} zeta_{t-1}; zero before the first update.
  const Vector& predict() const { return w_; }
  UpdateInfo update(const Vector& g);

  double lambda() const { return lambda_; }
  std::size_t dim() const { return static_cast<std::size_t>(zeta_.size()); }
  const Matrix& inverse() const { return inv_; }
  const Vector& zeta() const { return zeta_; }
  /// <zeta, A^{-1} zeta> recomputed from the stored inverse.
  double potential() const { return zeta_.dot(inv_ * zeta_); }

 private:
  double lambda_;
  Matrix inv_;
  Vector zeta_;
  Vector w_;
  double phi_incremental_ = 0.0;
};

/// CoRectron in representer form: L L^T = K_t + lambda I and
/// (K_t + lambda I) c_t = 1, with w_{t+1} = -sum_s c_s Psi_s g_s^base.
class CoRectronK {
 public:
  explicit CoRectronK(double lambda);

  Vector predict_base(const lifting::ContextMap& map) const;
  UpdateInfo update(const lifting::ContextMap& map, const Vector& g_base);

  double lambda() const { return lambda_; }
  std::size_t rounds() const { return history_.size(); }
  const Vector& coefficients() const { return c_; }
  const numkit::CholFactor& factor() const { return chol_; }
  const std::vector<lifting::ResidualRecord>& history() const { return history_; }

 private:
  double lambda_;
  numkit::CholFactor chol_;
  Vector c_;
  std::vector<lifting::ResidualRecord> history_;
  double zeta_sq_ = 0.0;
  double phi_incremental_ = 0.0;
};

/// Projected OGD on the unit ball.
class Ogd {
 public:
  Ogd(std::size_t dim, double eta);

  const Vector& predict() const { return w_; }
  UpdateInfo update(const Vector& g);
  double eta() const { return eta_; }

 private:
  double eta_;
  Vector w_;
};

struct OnsParams {
  double eta_sur = 0.1;
  double gamma = 0.5;
  double epsilon = 1.0;
};

/// ONS on the surrogate gradients eta_sur * g with Mahalanobis projection
/// onto the unit ball.
class Ons {
 public:
  Ons(std::size_t dim, OnsParams params);

  const Vector& predict() const { return w_; }
  UpdateInfo update(const Vector& g);

  const OnsParams& params() const { return params_; }
  const Matrix& metric() const { return A_; }
  const Matrix& inverse() const { return inv_; }
  std::size_t projections() const { return projections_; }

 private:
  OnsParams params_;
  Matrix A_;
  Matrix inv_;
  Vector w_;
  std::size_t projections_ = 0;
};

/// Kernelized ONS with w_t = sum_i c_i phi_i, phi_i = Psi_i g_i^base.
/// Rounds with phi_t = 0 leave the learner untouched, as they do for ONS.
class Kons {
 public:
  Kons(OnsParams params);

  Vector predict_base(const lifting::ContextMap& map) const;
  UpdateInfo update(const lifting::ContextMap& map, const Vector& g_base);

  const Vector& coefficients() const { return c_; }
  const std::vector<lifting::ResidualRecord>& history() const { return history_; }
  /// Gram matrix of the stored phi_i.
  Matrix gram() const;
  std::size_t projections() const { return projections_; }

 private:
  OnsParams params_;
  std::vector<lifting::ResidualRecord> history_;
  Matrix gram_;  // capacity-grown; leading t x t block is live
  numkit::CholFactor chol_b_;
  Vector c_;
  std::size_t projections_ = 0;
};

enum class Algorithm { CoRectronL, CoRectronK, Ogd, Ons, Kons };
std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);
/// True for learners that keep an explicit vector in the lifted space.
bool is_explicit(Algorithm a);

/// Uniform interface used by the harness.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual Vector predict_base(const lifting::ContextMap& map) = 0;
  virtual UpdateInfo update(const lifting::ContextMap& map, const Vector& g_base) = 0;
};

struct LearnerParams {
  double lambda = 1.0;   // CoRectron / CoRectronK
  double eta = 0.1;      // OGD
  OnsParams ons;         // ONS / KONS
  std::size_t lifted_dim = 0;  // explicit learners
};

std::unique_ptr<Learner> make_learner(Algorithm algo, const LearnerParams& params);

}  // namespace corectron::learners
