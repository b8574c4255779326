#include "corectron/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace corectron::diag {

namespace {

// Per-round identities are compared at this relative level; integrated
// quantities use the 1e-6 default of inequality().
constexpr double kRoundTol = 1e-8;
constexpr double kSignTol = 1e-9;
constexpr double kDeterminantTol = 1e-6;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Certificate identity(std::string name, double err, double budget, std::string note = {}) {
  Certificate c;
  c.name = std::move(name);
  c.lhs = err;
  c.rhs = budget;
  c.slack = budget - err;
  c.tolerance = 0.0;
  c.holds = std::isfinite(err) && err <= budget;
  c.note = std::move(note);
  return c;
}

bool needs_potential(const Trace& trace, const char* name, Certificate& out) {
  if (trace.potential_diagnostics) return true;
  out = skipped(name, "trace carries no potential diagnostics");
  return false;
}

double sum_mu_ratio(const Trace& trace) {
  double s = 0.0;
  for (const auto& r : trace.rounds) s += r.mu / (1.0 + r.mu);
  return s;
}

}  // namespace

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::NonContextual:
      return "noncontextual";
    case ModelKind::LinearContext:
      return "linear";
    case ModelKind::Kernel:
      return "kernel";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "noncontextual") return ModelKind::NonContextual;
  if (s == "linear") return ModelKind::LinearContext;
  if (s == "kernel") return ModelKind::Kernel;
  throw std::invalid_argument("unknown model kind '" + s + "'");
}

double Trace::cumulative_regret() const {
  double s = 0.0;
  for (const auto& r : rounds) s += r.regret;
  return s;
}

double Trace::cumulative_suboptimality() const {
  double s = 0.0;
  for (const auto& r : rounds) s += r.delta;
  return s;
}

double Trace::sum_squared_regret() const {
  double s = 0.0;
  for (const auto& r : rounds) s += r.regret * r.regret;
  return s;
}

double Trace::comparator_norm_sq_AT() const {
  return lambda * comparator_norm * comparator_norm + sum_squared_regret();
}

lifting::ContextMap Trace::context_map(std::size_t t) const {
  switch (model) {
    case ModelKind::NonContextual:
      return lifting::ContextMap::identity(n);
    case ModelKind::LinearContext:
      return lifting::ContextMap::linear_context(n, rounds.at(t).z);
    case ModelKind::Kernel:
      return lifting::ContextMap::kernel_feature(n, rounds.at(t).z, kernel);
  }
  throw std::logic_error("Trace: unknown model kind");
}

Certificate inequality(std::string name, double lhs, double rhs, double rel) {
  Certificate c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = rhs - lhs;
  c.tolerance = rel * (1.0 + std::abs(rhs));
  c.holds = std::isfinite(c.slack) && c.slack >= -c.tolerance;
  return c;
}

Certificate skipped(std::string name, std::string why) {
  Certificate c;
  c.name = std::move(name);
  c.skipped = true;
  c.note = std::move(why);
  return c;
}

std::optional<GramSpectrum> gram_spectrum(const Trace& trace) {
  if (trace.T() > trace.gram_cap) return std::nullopt;
  std::vector<lifting::ResidualRecord> history;
  history.reserve(trace.T());
  for (std::size_t t = 0; t < trace.T(); ++t) history.push_back({trace.context_map(t), trace.rounds[t].g_base});
  GramSpectrum s;
  switch (trace.model) {
    case ModelKind::NonContextual:
      s.finite_dim = trace.n;
      break;
    case ModelKind::LinearContext:
      s.finite_dim = trace.n * trace.p;
      break;
    case ModelKind::Kernel:
      s.finite_dim = trace.kernel.kind == KernelSpec::Kind::LinearDot ? trace.n * trace.p : 0;
      break;
  }
  if (history.empty()) return s;
  s.eigenvalues = numkit::clamped_eigenvalues(lifting::gram_matrix(history));
  s.log_det = numkit::log_det_ratio_from_eigenvalues(s.eigenvalues, trace.lambda);
  s.effective_dim = numkit::effective_dimension_from_eigenvalues(s.eigenvalues, trace.lambda);
  s.op_norm = s.eigenvalues.maxCoeff();
  return s;
}

double information_gain(const Trace& trace, const std::optional<GramSpectrum>& spectrum) {
  if (spectrum) return spectrum->log_det;
  double h = 0.0;
  for (const auto& r : trace.rounds) h += std::log1p(r.mu);
  return h;
}

Certificate check_sign_condition(const Trace& trace) {
  Certificate out;
  if (!needs_potential(trace, "sign-condition", out)) return out;
  // Scaled by 1 + ||g|| ||zeta||, the Cauchy-Schwarz size of nu.
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  for (const auto& r : trace.rounds) {
    const double scaled = r.nu / (1.0 + r.g_norm * r.zeta_norm_prev);
    worst = std::max(worst, scaled);
    if (scaled > kSignTol) ++violations;
  }
  if (trace.rounds.empty()) worst = 0.0;
  return identity("sign-condition", worst, kSignTol, "violations=" + std::to_string(violations));
}

Certificate check_potential_increment(const Trace& trace) {
  Certificate out;
  if (!needs_potential(trace, "potential-increment", out)) return out;
  double worst = 0.0;
  double prev = 0.0;
  for (const auto& r : trace.rounds) {
    const double predicted = (r.mu + 2.0 * r.nu - r.nu * r.nu) / (1.0 + r.mu);
    const double observed = r.phi - prev;
    worst = std::max(worst, std::abs(observed - predicted) / (1.0 + std::abs(prev) + std::abs(r.phi)));
    prev = r.phi;
  }
  return identity("potential-increment", worst, kRoundTol);
}

Certificate check_gt_mu(const Trace& trace) {
  Certificate out;
  if (!needs_potential(trace, "gt-mu", out)) return out;
  double worst = 0.0;
  for (const auto& r : trace.rounds) {
    const double predicted = r.mu / (1.0 + r.mu);
    worst = std::max(worst, std::abs(r.gt_mu - predicted) / (1.0 + predicted));
  }
  return identity("gt-mu", worst, kRoundTol);
}

Certificate check_potential_crosscheck(const Trace& trace) {
  Certificate out;
  if (!needs_potential(trace, "potential-crosscheck", out)) return out;
  if (trace.rounds.empty()) return identity("potential-crosscheck", 0.0, 0.0);
  const auto& last = trace.rounds.back();
  return identity("potential-crosscheck", std::abs(last.phi_incremental - last.phi),
                  1e-6 * (1.0 + std::abs(last.phi)));
}

Certificate check_cei(const Trace& trace) {
  Certificate out;
  if (!needs_potential(trace, "cei", out)) return out;
  const double phi = trace.rounds.empty() ? 0.0 : trace.rounds.back().phi;
  return inequality("cei", phi, sum_mu_ratio(trace));
}

std::vector<Certificate> check_epl(const Trace& trace, const std::optional<GramSpectrum>& spectrum) {
  Certificate out;
  if (!needs_potential(trace, "epl", out)) return {out, skipped("determinant-identity", out.note)};
  if (!spectrum) {
    const std::string why = "T=" + std::to_string(trace.T()) + " exceeds Gram cap " + std::to_string(trace.gram_cap);
    return {skipped("epl", why), skipped("determinant-identity", why)};
  }
  std::vector<Certificate> certs;
  certs.push_back(inequality("epl", sum_mu_ratio(trace), spectrum->log_det));
  double log_prod = 0.0;
  for (const auto& r : trace.rounds) log_prod += std::log1p(r.mu);
  // Relative error of the product prod (1 + mu_t) against det(I + K/lambda).
  const double rel = std::abs(std::expm1(log_prod - spectrum->log_det));
  certs.push_back(identity("determinant-identity", rel, kDeterminantTol,
                           "log-prod=" + fmt(log_prod) + " log-det=" + fmt(spectrum->log_det)));
  return certs;
}

Certificate check_main_bound(const Trace& trace, double H) {
  Certificate out;
  if (!needs_potential(trace, "main-bound", out)) return out;
  if (!trace.comparator_in_model) return skipped("main-bound", "comparator outside the learner's model");
  const double rhs = std::sqrt(trace.comparator_norm_sq_AT()) * std::sqrt(std::max(H, 0.0));
  return inequality("main-bound", trace.cumulative_regret(), rhs);
}

std::vector<Certificate> check_robust_bound(const Trace& trace, double H) {
  std::vector<Certificate> certs;
  const double R = trace.cumulative_regret();
  const double Delta = trace.cumulative_suboptimality();
  if (!trace.potential_diagnostics) {
    certs.push_back(skipped("robust-bound", "trace carries no potential diagnostics"));
  } else if (!trace.comparator_in_model) {
    certs.push_back(skipped("robust-bound", "comparator outside the learner's model"));
  } else {
    const double h = std::max(H, 0.0);
    const double rhs = trace.B * h + trace.comparator_norm * std::sqrt(trace.lambda * h) +
                       std::sqrt(2.0 * trace.B * std::max(Delta, 0.0) * h);
    certs.push_back(inequality("robust-bound", R, rhs));
  }
  // Needs only |r_t| <= B and delta_t >= -r_t, so it applies to any learner.
  certs.push_back(inequality("self-bounding", trace.sum_squared_regret(), trace.B * R + 2.0 * trace.B * Delta));
  return certs;
}

std::vector<Certificate> check_instantiated_bound(const Trace& trace,
                                                  const std::optional<GramSpectrum>& spectrum) {
  if (!spectrum) {
    const std::string why = "T=" + std::to_string(trace.T()) + " exceeds Gram cap " + std::to_string(trace.gram_cap);
    return {skipped("logdet-deff", why), skipped("gram-op-norm", why)};
  }
  std::vector<Certificate> certs;
  const double lambda = trace.lambda;
  certs.push_back(inequality("logdet-deff", spectrum->log_det,
                             spectrum->effective_dim * (1.0 + std::log1p(spectrum->op_norm / lambda))));
  double factor = 1.0;
  switch (trace.model) {
    case ModelKind::NonContextual:
      break;
    case ModelKind::LinearContext:
      factor = trace.Z * trace.Z;
      break;
    case ModelKind::Kernel:
      factor = trace.kernel.kind == KernelSpec::Kind::LinearDot ? trace.Z * trace.Z : trace.kappa * trace.kappa;
      break;
  }
  const double T = static_cast<double>(trace.T());
  certs.push_back(inequality("gram-op-norm", spectrum->op_norm, T * trace.X * trace.X * factor));
  if (spectrum->finite_dim > 0) {
    certs.push_back(
        inequality("deff-dimension", spectrum->effective_dim, static_cast<double>(spectrum->finite_dim)));
  }
  return certs;
}

Certificate check_boundedness(const Trace& trace) {
  double worst = 0.0;
  double lowest = 0.0;
  for (const auto& r : trace.rounds) {
    worst = std::max(worst, std::abs(r.regret));
    lowest = std::min(lowest, r.regret);
  }
  auto c = inequality("regret-bounded", worst, trace.B, 1e-12);
  if (trace.optimal_feedback && lowest < -1e-12) {
    c.holds = false;
    c.note = "negative regret " + fmt(lowest) + " under optimal feedback";
  }
  return c;
}

std::vector<Certificate> certify(const Trace& trace) {
  std::vector<Certificate> certs;
  certs.push_back(check_boundedness(trace));
  if (!trace.potential_diagnostics) {
    // Baselines: only the learner-agnostic checks; the Gram spectrum is
    // not worth its cost here.
    certs.push_back(check_robust_bound(trace, 0.0).back());
    return certs;
  }
  const auto spectrum = gram_spectrum(trace);
  const double H = information_gain(trace, spectrum);
  {
    certs.push_back(check_sign_condition(trace));
    certs.push_back(check_potential_increment(trace));
    certs.push_back(check_gt_mu(trace));
    certs.push_back(check_potential_crosscheck(trace));
    certs.push_back(check_cei(trace));
    for (auto& c : check_epl(trace, spectrum)) certs.push_back(std::move(c));
    certs.push_back(check_main_bound(trace, H));
  }
  for (auto& c : check_robust_bound(trace, H)) certs.push_back(std::move(c));
  for (auto& c : check_instantiated_bound(trace, spectrum)) certs.push_back(std::move(c));
  return certs;
}

bool all_hold(const std::vector<Certificate>& certs) {
  return std::all_of(certs.begin(), certs.end(), [](const Certificate& c) { return c.skipped || c.holds; });
}

}  // namespace corectron::diag
