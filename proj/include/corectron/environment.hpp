#pragma once

// Contextual m-out-of-n world: scaled m-subset action sets with a top-m
// oracle, context sampling, hidden utility models and feedback models that
// reveal optimal or perturbed user actions.

#include "corectron/lifting.hpp"
#include "corectron/numkit.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace corectron::env {

using Rng = std::mt19937_64;

/// Independent random streams; every algorithm replays the same streams
/// for a given seed.
enum class StreamRole : std::uint64_t { Contexts = 1, UtilityModel = 2, Feedback = 3 };

Rng make_stream(std::uint64_t seed, StreamRole role);

/// Actions are scale * indicator vectors of m-subsets of {0..n-1}.
struct ActionSetSpec {
  std::size_t n = 10;
  std::size_t m = 5;
  double scale = 0.0;

  /// scale = 1/sqrt(2 min(m, n-m)), giving diameter exactly 1 (1/sqrt(10)
  /// for n=10, m=5).
  static ActionSetSpec standard(std::size_t n, std::size_t m);
  /// max ||x - x'||_2 over feasible pairs.
  double diameter() const;
  void validate() const;
};

/// Indices of the m largest entries, ties broken by lowest index.
std::vector<std::size_t> top_m_indices(const Vector& w, std::size_t m);

/// Maximizer of <w, x> over the action set; w = 0 selects {0..m-1}.
Vector top_m_oracle(const Vector& w, const ActionSetSpec& spec);

/// Throws unless x is scale * (indicator of an m-subset).
void require_feasible(const Vector& x, const ActionSetSpec& spec);

/// Draws N(0, I_p) and maps it into the unit ball.
Vector sample_context(Rng& rng, std::size_t p);
Vector clip_to_unit_ball(Vector z);

enum class UtilityKind { Fixed, Linear, Rbf };

/// Hidden user preference, producing u_t^base from the context.
struct UtilityModel {
  UtilityKind kind = UtilityKind::Linear;
  Vector fixed;                 // Fixed: u in R^n, ||u|| = 1
  Matrix linear;                // Linear: U* (n x p), ||U*||_F = 1
  std::vector<Vector> centers;  // Rbf: c_j in R^p
  std::vector<Vector> coeffs;   // Rbf: a_j in R^n
  KernelSpec kernel = KernelSpec::rbf(1.0);

  Vector eval(const Vector& z) const;
  /// Norm of the comparator in its own space (Euclidean, Frobenius, RKHS).
  double comparator_norm() const;
  std::size_t base_dim() const;
};

UtilityModel build_utility_model(Rng& rng, UtilityKind kind, std::size_t n, std::size_t p,
                                 std::size_t J = 16, double bandwidth = 1.0);

struct FeedbackModel {
  enum class Kind { Optimal, OneSwap, ScorePerturb };
  Kind kind = Kind::Optimal;
  double alpha = 0.0;  // OneSwap swap probability
  double xi = 0.0;     // ScorePerturb relative noise level

  static FeedbackModel optimal() { return {}; }
  static FeedbackModel one_swap(double alpha);
  static FeedbackModel score_perturb(double xi);
  std::string to_string() const;
};

struct Revealed {
  Vector x_base;
  double delta = 0.0;
  bool swapped = false;
};

Revealed reveal_action(const FeedbackModel& model, const Vector& u, const ActionSetSpec& spec,
                       Rng& rng);

/// max_x <u, x> - <u, x_base>.
double suboptimality(const Vector& u, const Vector& x_base, const ActionSetSpec& spec);

/// One pre-drawn round shared by all learners.
struct Round {
  Vector z;       // empty for the non-contextual model
  Vector u;       // u_t^base
  Vector x_base;  // revealed user action
  double delta = 0.0;
  bool swapped = false;
};

enum class Setting { NonContextual, Linear, Kernel };
std::string to_string(Setting s);
Setting parse_setting(const std::string& s);

struct ScenarioSpec {
  Setting setting = Setting::Linear;
  std::size_t n = 10;
  std::size_t m = 5;
  std::size_t p = 10;
  std::size_t T = 2000;
  std::size_t J = 16;
  double bandwidth = 1.0;
  FeedbackModel feedback;
};

struct Scenario {
  ScenarioSpec spec;
  ActionSetSpec actions;
  UtilityModel model;
  std::vector<Round> rounds;
};

/// Deterministic in (spec, seed). Context and utility streams do not
/// depend on the feedback model.
Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed);

}  // namespace corectron::env
