#pragma once

// Context maps Psi_t : R^n -> V realizing the non-contextual, linear
// contextual and kernelized models, with their adjoints and the residual
// inner products <Psi_s g_s, Psi_t g_t>_V.

#include "corectron/numkit.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace corectron {

/// Scalar kernel k(z, z'), used as k(z, z') * I_n.
struct KernelSpec {
  enum class Kind { Rbf, LinearDot };
  Kind kind = Kind::Rbf;
  double bandwidth = 1.0;  // RBF only

  static KernelSpec rbf(double bandwidth);
  static KernelSpec linear_dot() { return KernelSpec{Kind::LinearDot, 0.0}; }

  double operator()(const Vector& z, const Vector& zp) const;
  std::string to_string() const;
};

namespace lifting {

struct Identity {};
struct LinearContext {
  Vector z;
};
struct KernelFeature {
  Vector z;
  KernelSpec kernel;
};

/// Psi_t. The learner space dimension is n for Identity, n*p for
/// LinearContext (column-major vec of the n x p matrix x z^T), and the
/// RKHS for KernelFeature.
class ContextMap {
 public:
  using Variant = std::variant<Identity, LinearContext, KernelFeature>;

  static ContextMap identity(std::size_t n);
  static ContextMap linear_context(std::size_t n, Vector z);
  static ContextMap kernel_feature(std::size_t n, Vector z, KernelSpec kernel);

  std::size_t base_dim() const { return base_dim_; }
  const Variant& variant() const { return variant_; }
  bool is_kernel() const { return std::holds_alternative<KernelFeature>(variant_); }
  /// Dimension of the explicit lifted space (throws for KernelFeature).
  std::size_t lifted_dim() const;
  /// Context vector (empty for Identity).
  const Vector& context() const;

 private:
  ContextMap(std::size_t n, Variant v);
  std::size_t base_dim_ = 0;
  Variant variant_;
};

/// One past residual of a representer-form learner: Psi_s and g_s^base.
struct ResidualRecord {
  ContextMap map;
  Vector g_base;
};

/// Psi_t(x) as an explicit vector (Identity / LinearContext only).
Vector lift(const ContextMap& map, const Vector& x_base);

/// Psi_t^* w for an explicit lifted vector w.
Vector adjoint_apply(const ContextMap& map, const Vector& w);

/// Psi_t^* w for w = sum_s coeffs[s] * Psi_s g_s^base, i.e.
/// sum_s coeffs[s] * <kernel between map and history[s]> * g_s^base.
/// Works for every variant; coefficient signs are the caller's.
Vector adjoint_apply(const ContextMap& map, std::span<const double> coeffs,
                     std::span<const ResidualRecord> history);

/// <Psi_s g_s, Psi_t g_t>_V.
double gram_entry(const ContextMap& map_s, const Vector& g_s_base, const ContextMap& map_t,
                  const Vector& g_t_base);

/// Scalar factor c with Psi_s^* Psi_t = c * I_n.
double context_kernel(const ContextMap& map_s, const ContextMap& map_t);

/// Full Gram matrix of a residual history.
Matrix gram_matrix(std::span<const ResidualRecord> history);

}  // namespace lifting
}  // namespace corectron
