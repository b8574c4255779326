#pragma once

// Numerical certificates evaluated post hoc on recorded run traces. Each
// certificate compares a left-hand side against a right-hand side with a
// pinned tolerance; identities are reported as |lhs - rhs| against an
// error budget.

#include "corectron/lifting.hpp"
#include "corectron/numkit.hpp"

#include <optional>
#include <string>
#include <vector>

namespace corectron::diag {

enum class ModelKind { NonContextual, LinearContext, Kernel };
std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

struct TraceRound {
  double mu = 0.0;
  double nu = 0.0;
  double phi = 0.0;
  double phi_incremental = 0.0;
  double gt_mu = 0.0;
  double g_norm = 0.0;
  double zeta_norm_prev = 0.0;
  double regret = 0.0;  // r_t = <u_t, x_t - xhat_t>
  double delta = 0.0;   // suboptimality of the revealed action
  Vector z;             // context (empty for the non-contextual model)
  Vector g_base;        // xhat_t - x_t
};

/// Everything a certificate needs about one episode.
struct Trace {
  std::string algorithm;
  ModelKind model = ModelKind::NonContextual;
  KernelSpec kernel = KernelSpec::rbf(1.0);
  std::size_t n = 0;
  std::size_t p = 0;
  double lambda = 1.0;
  double B = 1.0;      // bound on |<u, x - x'>|
  double X = 1.0;      // action diameter
  double Z = 1.0;      // context norm bound
  double kappa = 1.0;  // sup_z sqrt(k(z, z)) for kernels
  double comparator_norm = 0.0;
  /// The comparator lies in the learner's hypothesis space, so the
  /// ||u||-dependent bounds apply.
  bool comparator_in_model = false;
  /// Trace carries the potential diagnostics (CoRectron family).
  bool potential_diagnostics = false;
  bool optimal_feedback = false;
  std::size_t gram_cap = 2000;
  std::vector<TraceRound> rounds;

  std::size_t T() const { return rounds.size(); }
  double cumulative_regret() const;
  double cumulative_suboptimality() const;
  double sum_squared_regret() const;
  /// ||u||_{A_T}^2 = lambda ||u||^2 + sum_t r_t^2.
  double comparator_norm_sq_AT() const;
  /// Psi_t of round t.
  lifting::ContextMap context_map(std::size_t t) const;
};

struct Certificate {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double tolerance = 0.0;
  bool holds = true;
  bool skipped = false;
  std::string note;
};

/// Inequality lhs <= rhs with tolerance rel * (1 + |rhs|).
Certificate inequality(std::string name, double lhs, double rhs, double rel = 1e-6);
Certificate skipped(std::string name, std::string why);

/// Spectral data of the residual Gram matrix K_T.
struct GramSpectrum {
  Vector eigenvalues;
  double log_det = 0.0;       // log det(I + K/lambda)
  double effective_dim = 0.0; // tr(K (K + lambda I)^{-1})
  double op_norm = 0.0;
  std::size_t finite_dim = 0; // dim V for explicit models, 0 for kernels
};

/// Empty when the trace is longer than its Gram cap.
std::optional<GramSpectrum> gram_spectrum(const Trace& trace);

/// H_T: log det from the spectrum if available, else sum log(1 + mu_t)
/// (exact by the determinant identity; CoRectron traces only).
double information_gain(const Trace& trace, const std::optional<GramSpectrum>& spectrum);

Certificate check_sign_condition(const Trace& trace);
Certificate check_potential_increment(const Trace& trace);
Certificate check_gt_mu(const Trace& trace);
Certificate check_potential_crosscheck(const Trace& trace);
Certificate check_cei(const Trace& trace);
/// EPL inequality and the determinant identity.
std::vector<Certificate> check_epl(const Trace& trace, const std::optional<GramSpectrum>& spectrum);
Certificate check_main_bound(const Trace& trace, double H);
/// Three-term robust bound and the self-bounding inequality.
std::vector<Certificate> check_robust_bound(const Trace& trace, double H);
/// Log-det vs effective dimension, operator-norm bound and d_eff <= dim V.
std::vector<Certificate> check_instantiated_bound(const Trace& trace,
                                                  const std::optional<GramSpectrum>& spectrum);
/// |r_t| <= B for all t, and r_t >= 0 under optimal feedback.
Certificate check_boundedness(const Trace& trace);

/// Every applicable certificate for the trace.
std::vector<Certificate> certify(const Trace& trace);
bool all_hold(const std::vector<Certificate>& certs);

}  // namespace corectron::diag
