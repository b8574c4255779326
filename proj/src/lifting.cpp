#include "corectron/lifting.hpp"

#include <cmath>
#include <sstream>

namespace corectron {

KernelSpec KernelSpec::rbf(double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("KernelSpec: RBF bandwidth must be positive");
  return KernelSpec{Kind::Rbf, bandwidth};
}

double KernelSpec::operator()(const Vector& z, const Vector& zp) const {
  if (z.size() != zp.size()) throw DimensionError("kernel: context dimension mismatch");
  switch (kind) {
    case Kind::Rbf:
      return std::exp(-(z - zp).squaredNorm() / (2.0 * bandwidth * bandwidth));
    case Kind::LinearDot:
      return z.dot(zp);
  }
  throw std::logic_error("kernel: unknown kind");
}

std::string KernelSpec::to_string() const {
  if (kind == Kind::LinearDot) return "linear";
  std::ostringstream os;
  os << "rbf(" << bandwidth << ")";
  return os.str();
}

namespace lifting {

namespace {

bool same_kernel(const KernelSpec& a, const KernelSpec& b) {
  return a.kind == b.kind && (a.kind == KernelSpec::Kind::LinearDot || a.bandwidth == b.bandwidth);
}

const Vector kEmpty;

}  // namespace

ContextMap::ContextMap(std::size_t n, Variant v) : base_dim_(n), variant_(std::move(v)) {
  if (n == 0) throw std::invalid_argument("ContextMap: base dimension must be positive");
}

ContextMap ContextMap::identity(std::size_t n) { return ContextMap(n, Identity{}); }

ContextMap ContextMap::linear_context(std::size_t n, Vector z) {
  if (z.size() == 0) throw std::invalid_argument("ContextMap: empty context");
  return ContextMap(n, LinearContext{std::move(z)});
}

ContextMap ContextMap::kernel_feature(std::size_t n, Vector z, KernelSpec kernel) {
  if (z.size() == 0) throw std::invalid_argument("ContextMap: empty context");
  return ContextMap(n, KernelFeature{std::move(z), kernel});
}

std::size_t ContextMap::lifted_dim() const {
  if (std::holds_alternative<Identity>(variant_)) return base_dim_;
  if (const auto* lc = std::get_if<LinearContext>(&variant_)) {
    return base_dim_ * static_cast<std::size_t>(lc->z.size());
  }
  throw std::logic_error("ContextMap: kernel feature map has no explicit lifted dimension");
}

const Vector& ContextMap::context() const {
  if (const auto* lc = std::get_if<LinearContext>(&variant_)) return lc->z;
  if (const auto* kf = std::get_if<KernelFeature>(&variant_)) return kf->z;
  return kEmpty;
}

Vector lift(const ContextMap& map, const Vector& x_base) {
  const auto n = static_cast<Eigen::Index>(map.base_dim());
  if (x_base.size() != n) throw DimensionError("lift: base vector dimension mismatch");
  if (std::holds_alternative<Identity>(map.variant())) return x_base;
  if (const auto* lc = std::get_if<LinearContext>(&map.variant())) {
    const auto p = lc->z.size();
    Vector out(n * p);
    for (Eigen::Index j = 0; j < p; ++j) out.segment(j * n, n) = lc->z(j) * x_base;
    return out;
  }
  throw std::invalid_argument("lift: kernel feature map has no explicit lift");
}

Vector adjoint_apply(const ContextMap& map, const Vector& w) {
  const auto n = static_cast<Eigen::Index>(map.base_dim());
  if (std::holds_alternative<Identity>(map.variant())) {
    if (w.size() != n) throw DimensionError("adjoint_apply: dimension mismatch");
    return w;
  }
  if (const auto* lc = std::get_if<LinearContext>(&map.variant())) {
    const auto p = lc->z.size();
    if (w.size() != n * p) throw DimensionError("adjoint_apply: dimension mismatch");
    return Eigen::Map<const Matrix>(w.data(), n, p) * lc->z;
  }
  throw std::invalid_argument("adjoint_apply: kernel feature map needs a residual representation");
}

Vector adjoint_apply(const ContextMap& map, std::span<const double> coeffs,
                     std::span<const ResidualRecord> history) {
  if (coeffs.size() != history.size()) throw DimensionError("adjoint_apply: coefficient count mismatch");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(map.base_dim()));
  for (std::size_t s = 0; s < history.size(); ++s) {
    if (coeffs[s] == 0.0) continue;
    if (history[s].g_base.size() != out.size()) throw DimensionError("adjoint_apply: residual dimension mismatch");
    out += (coeffs[s] * context_kernel(map, history[s].map)) * history[s].g_base;
  }
  return out;
}

double context_kernel(const ContextMap& map_s, const ContextMap& map_t) {
  if (map_s.base_dim() != map_t.base_dim()) throw DimensionError("context_kernel: base dimension mismatch");
  const auto& a = map_s.variant();
  const auto& b = map_t.variant();
  if (std::holds_alternative<Identity>(a) && std::holds_alternative<Identity>(b)) return 1.0;
  if (const auto* la = std::get_if<LinearContext>(&a)) {
    if (const auto* lb = std::get_if<LinearContext>(&b)) {
      if (la->z.size() != lb->z.size()) throw DimensionError("context_kernel: context dimension mismatch");
      return la->z.dot(lb->z);
    }
  }
  if (const auto* ka = std::get_if<KernelFeature>(&a)) {
    if (const auto* kb = std::get_if<KernelFeature>(&b)) {
      if (!same_kernel(ka->kernel, kb->kernel)) throw std::invalid_argument("context_kernel: kernel mismatch");
      return ka->kernel(ka->z, kb->z);
    }
  }
  throw std::invalid_argument("context_kernel: mixed context-map variants");
}

double gram_entry(const ContextMap& map_s, const Vector& g_s_base, const ContextMap& map_t,
                  const Vector& g_t_base) {
  if (g_s_base.size() != g_t_base.size() ||
      g_s_base.size() != static_cast<Eigen::Index>(map_s.base_dim())) {
    throw DimensionError("gram_entry: residual dimension mismatch");
  }
  return context_kernel(map_s, map_t) * g_s_base.dot(g_t_base);
}

Matrix gram_matrix(std::span<const ResidualRecord> history) {
  const auto T = static_cast<Eigen::Index>(history.size());
  Matrix K(T, T);
  for (Eigen::Index i = 0; i < T; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      K(i, j) = gram_entry(history[i].map, history[i].g_base, history[j].map, history[j].g_base);
      K(j, i) = K(i, j);
    }
  }
  return K;
}

}  // namespace lifting
}  // namespace corectron
