#include "corectron/learners.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace corectron::learners {

namespace {

void require_dim(const Vector& v, Eigen::Index dim, const char* who) {
  if (v.size() != dim) {
    std::ostringstream os;
    os << who << ": residual dimension " << v.size() << ", expected " << dim;
    throw DimensionError(os.str());
  }
}

double potential_increment(double mu, double nu) { return (mu + 2.0 * nu - nu * nu) / (1.0 + mu); }

void project_unit_ball(Vector& w) {
  const double norm = w.norm();
  if (norm > 1.0) w /= norm;
}

}  // namespace

// CoRectron

CoRectron::CoRectron(std::size_t dim, double lambda) : lambda_(lambda) {
  if (dim == 0) throw std::invalid_argument("CoRectron: dimension must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("CoRectron: lambda must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  inv_ = Matrix::Identity(d, d) / lambda;
  zeta_ = Vector::Zero(d);
  w_ = Vector::Zero(d);
}

UpdateInfo CoRectron::update(const Vector& g) {
  require_dim(g, zeta_.size(), "CoRectron::update");
  UpdateInfo info;
  info.g_norm = g.norm();
  info.zeta_norm_prev = zeta_.norm();
  if (info.g_norm == 0.0) {
    info.phi = -zeta_.dot(w_);
    info.phi_incremental = phi_incremental_;
    return info;
  }
  const Vector ag = inv_ * g;
  info.mu = g.dot(ag);
  info.nu = ag.dot(zeta_);
  numkit::sm_inverse_update_inplace(inv_, ag, info.mu);
  zeta_ += g;
  w_.noalias() = -(inv_ * zeta_);
  info.gt_mu = g.dot(inv_ * g);
  info.phi = -zeta_.dot(w_);
  phi_incremental_ += potential_increment(info.mu, info.nu);
  info.phi_incremental = phi_incremental_;
  return info;
}

// CoRectronK

CoRectronK::CoRectronK(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("CoRectronK: lambda must be positive");
}

Vector CoRectronK::predict_base(const lifting::ContextMap& map) const {
  const Vector neg = -c_;
  return lifting::adjoint_apply(map, std::span<const double>(neg.data(), static_cast<std::size_t>(neg.size())),
                                history_);
}

UpdateInfo CoRectronK::update(const lifting::ContextMap& map, const Vector& g_base) {
  require_dim(g_base, static_cast<Eigen::Index>(map.base_dim()), "CoRectronK::update");
  const auto t = static_cast<Eigen::Index>(history_.size());
  Vector k(t);
  for (Eigen::Index s = 0; s < t; ++s) {
    k(s) = lifting::gram_entry(history_[s].map, history_[s].g_base, map, g_base);
  }
  const double rho = lifting::gram_entry(map, g_base, map, g_base);

  UpdateInfo info;
  info.g_norm = std::sqrt(rho);
  info.zeta_norm_prev = std::sqrt(std::max(zeta_sq_, 0.0));
  info.nu = t > 0 ? c_.dot(k) : 0.0;

  const auto ext = numkit::chol_extend(chol_, k, rho + lambda_);
  info.mu = std::max(rho - ext.y.squaredNorm(), 0.0) / lambda_;
  history_.push_back({map, g_base});

  Vector k_full(t + 1);
  k_full.head(t) = k;
  k_full(t) = rho;
  info.gt_mu = std::max(rho - chol_.forward(k_full).squaredNorm(), 0.0) / lambda_;

  c_ = numkit::solve_spd(chol_, Vector::Ones(t + 1));
  zeta_sq_ += 2.0 * k.sum() + rho;
  info.phi = static_cast<double>(t + 1) - lambda_ * c_.sum();
  phi_incremental_ += potential_increment(info.mu, info.nu);
  info.phi_incremental = phi_incremental_;
  return info;
}

// OGD

Ogd::Ogd(std::size_t dim, double eta) : eta_(eta), w_(Vector::Zero(static_cast<Eigen::Index>(dim))) {
  if (!(eta > 0.0)) throw std::invalid_argument("Ogd: step size must be positive");
}

UpdateInfo Ogd::update(const Vector& g) {
  require_dim(g, w_.size(), "Ogd::update");
  UpdateInfo info;
  info.g_norm = g.norm();
  w_ -= eta_ * g;
  project_unit_ball(w_);
  return info;
}

// ONS

Ons::Ons(std::size_t dim, OnsParams params) : params_(params) {
  if (!(params.eta_sur > 0.0 && params.gamma > 0.0 && params.epsilon > 0.0)) {
    throw std::invalid_argument("Ons: eta_sur, gamma and epsilon must be positive");
  }
  const auto d = static_cast<Eigen::Index>(dim);
  A_ = params.epsilon * Matrix::Identity(d, d);
  inv_ = Matrix::Identity(d, d) / params.epsilon;
  w_ = Vector::Zero(d);
}

UpdateInfo Ons::update(const Vector& g) {
  require_dim(g, w_.size(), "Ons::update");
  UpdateInfo info;
  info.g_norm = g.norm();
  if (info.g_norm == 0.0) return info;
  const Vector gs = params_.eta_sur * g;
  A_.noalias() += gs * gs.transpose();
  const Vector ag = inv_ * gs;
  numkit::sm_inverse_update_inplace(inv_, ag, gs.dot(ag));
  const Vector y = w_ - (inv_ * gs) / params_.gamma;
  auto proj = numkit::project_ball_mahalanobis(A_, y, 1.0);
  w_ = std::move(proj.point);
  info.projected = !proj.trivial;
  if (info.projected) ++projections_;
  return info;
}

// KONS

Kons::Kons(OnsParams params) : params_(params) {
  if (!(params.eta_sur > 0.0 && params.gamma > 0.0 && params.epsilon > 0.0)) {
    throw std::invalid_argument("Kons: eta_sur, gamma and epsilon must be positive");
  }
}

Vector Kons::predict_base(const lifting::ContextMap& map) const {
  return lifting::adjoint_apply(map, std::span<const double>(c_.data(), static_cast<std::size_t>(c_.size())),
                                history_);
}

Matrix Kons::gram() const {
  const auto t = static_cast<Eigen::Index>(history_.size());
  return gram_.topLeftCorner(t, t);
}

UpdateInfo Kons::update(const lifting::ContextMap& map, const Vector& g_base) {
  require_dim(g_base, static_cast<Eigen::Index>(map.base_dim()), "Kons::update");
  UpdateInfo info;
  const double rho = lifting::gram_entry(map, g_base, map, g_base);
  info.g_norm = std::sqrt(rho);
  if (rho == 0.0) return info;

  const auto t = static_cast<Eigen::Index>(history_.size());
  Vector k(t);
  for (Eigen::Index s = 0; s < t; ++s) {
    k(s) = lifting::gram_entry(history_[s].map, history_[s].g_base, map, g_base);
  }
  if (t + 1 > gram_.rows()) {
    const Eigen::Index cap = std::max<Eigen::Index>(8, 2 * gram_.rows());
    Matrix grown = Matrix::Zero(cap, cap);
    grown.topLeftCorner(t, t) = gram_.topLeftCorner(t, t);
    gram_.swap(grown);
  }
  gram_.row(t).head(t) = k.transpose();
  gram_.col(t).head(t) = k;
  gram_(t, t) = rho;
  history_.push_back({map, g_base});

  const double eta2 = params_.eta_sur * params_.eta_sur;
  numkit::chol_extend(chol_b_, eta2 * k, eta2 * rho + params_.epsilon);

  Vector e = Vector::Zero(t + 1);
  e(t) = 1.0;
  const Vector q = numkit::solve_spd(chol_b_, e);
  Vector y(t + 1);
  y.head(t) = c_;
  y(t) = 0.0;
  y -= (params_.eta_sur / params_.gamma) * q;

  const Matrix G = gram_.topLeftCorner(t + 1, t + 1);
  const Matrix B = eta2 * G + params_.epsilon * Matrix::Identity(t + 1, t + 1);
  auto proj = numkit::project_ellipsoid_coeff(B, G, y, 1.0);
  c_ = std::move(proj.point);
  info.projected = !proj.trivial;
  if (info.projected) ++projections_;
  return info;
}

// Factory

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::CoRectronL:
      return "CoRectron-L";
    case Algorithm::CoRectronK:
      return "CoRectron-K";
    case Algorithm::Ogd:
      return "OGD";
    case Algorithm::Ons:
      return "ONS";
    case Algorithm::Kons:
      return "KONS";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& raw) {
  std::string s;
  for (char ch : raw) {
    if (ch != '-' && ch != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (s == "corectronl" || s == "corectron") return Algorithm::CoRectronL;
  if (s == "corectronk") return Algorithm::CoRectronK;
  if (s == "ogd") return Algorithm::Ogd;
  if (s == "ons") return Algorithm::Ons;
  if (s == "kons") return Algorithm::Kons;
  throw std::invalid_argument("unknown algorithm '" + raw + "'");
}

bool is_explicit(Algorithm a) {
  return a == Algorithm::CoRectronL || a == Algorithm::Ogd || a == Algorithm::Ons;
}

namespace {

// Runs an explicit learner on Psi_t(g^base) and reads predictions through
// the adjoint.
template <typename Core>
class Lifted final : public Learner {
 public:
  explicit Lifted(Core core) : core_(std::move(core)) {}
  Vector predict_base(const lifting::ContextMap& map) override {
    return lifting::adjoint_apply(map, core_.predict());
  }
  UpdateInfo update(const lifting::ContextMap& map, const Vector& g_base) override {
    return core_.update(lifting::lift(map, g_base));
  }

 private:
  Core core_;
};

template <typename Core>
class Representer final : public Learner {
 public:
  explicit Representer(Core core) : core_(std::move(core)) {}
  Vector predict_base(const lifting::ContextMap& map) override { return core_.predict_base(map); }
  UpdateInfo update(const lifting::ContextMap& map, const Vector& g_base) override {
    return core_.update(map, g_base);
  }

 private:
  Core core_;
};

}  // namespace

std::unique_ptr<Learner> make_learner(Algorithm algo, const LearnerParams& params) {
  if (is_explicit(algo) && params.lifted_dim == 0) {
    throw std::invalid_argument("make_learner: explicit learners need a lifted dimension");
  }
  switch (algo) {
    case Algorithm::CoRectronL:
      return std::make_unique<Lifted<CoRectron>>(CoRectron(params.lifted_dim, params.lambda));
    case Algorithm::Ogd:
      return std::make_unique<Lifted<Ogd>>(Ogd(params.lifted_dim, params.eta));
    case Algorithm::Ons:
      return std::make_unique<Lifted<Ons>>(Ons(params.lifted_dim, params.ons));
    case Algorithm::CoRectronK:
      return std::make_unique<Representer<CoRectronK>>(CoRectronK(params.lambda));
    case Algorithm::Kons:
      return std::make_unique<Representer<Kons>>(Kons(params.ons));
  }
  throw std::logic_error("make_learner: unknown algorithm");
}

}  // namespace corectron::learners
