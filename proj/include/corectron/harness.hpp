#pragma once

// Experiment runner: hyperparameter resolution, single episodes, sweeps
// over algorithms x coefficients x seeds x feedback models, aggregation
// and CSV / JSON emission.

#include "corectron/diagnostics.hpp"
#include "corectron/environment.hpp"
#include "corectron/learners.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace corectron::harness {

using learners::Algorithm;

std::vector<double> default_coef_grid();

struct ExperimentConfig {
  env::Setting setting = env::Setting::Linear;
  double bandwidth = 1.0;
  std::vector<Algorithm> algorithms;
  std::size_t n = 10;
  std::size_t m = 5;
  std::size_t p = 10;
  std::size_t T = 2000;
  std::size_t J = 16;
  std::vector<std::uint64_t> seeds;
  std::vector<double> coef_grid;
  std::vector<env::FeedbackModel> feedback;
  std::size_t diag_cap = 2000;
  bool certify = true;
  bool keep_traces = false;
  std::size_t threads = 0;  // 0 = hardware concurrency, 1 = serial
  double eta_sur = 0.1;
  double gamma = 0.5;

  /// Desk-scale defaults for a setting (T=2000 linear, 500 kernel, 5 seeds,
  /// the algorithms the setting admits, full grid, optimal feedback).
  static ExperimentConfig defaults(env::Setting setting);
  /// Full-scale counts: T=10000 linear, 1000 kernel, 10 seeds.
  void apply_full_scale();
  void validate() const;
};

/// Algorithms a setting admits.
std::vector<Algorithm> admitted_algorithms(env::Setting setting);

/// Dimension of the explicit lifted space: n (non-contextual) or n*p.
std::size_t lifted_dimension(const ExperimentConfig& config);

struct ResolvedParams {
  Algorithm algorithm = Algorithm::CoRectronL;
  double coefficient = 1.0;
  learners::LearnerParams params;
};

/// lambda = c * d (B = 1), eps = c * d / (4 gamma^2), eta_OGD = (2/sqrt(T)) / c.
ResolvedParams resolve_hyperparameters(const ExperimentConfig& config, Algorithm algorithm, double c);

struct RunResult {
  std::string setting;
  std::string algorithm;
  double coefficient = 0.0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double xi = 0.0;
  std::size_t T = 0;
  double final_regret = 0.0;
  double runtime_seconds = 0.0;  // learner compute only
  std::size_t projection_count = 0;
  std::string status = "ok";     // "ok" or "failed"
  // Not part of the CSV.
  std::string feedback;
  double total_seconds = 0.0;
  std::string message;
  std::vector<diag::Certificate> certificates;

  bool ok() const { return status == "ok"; }
  bool certificates_hold() const { return diag::all_hold(certificates); }
};

struct Episode {
  RunResult result;
  diag::Trace trace;
};

/// Runs one episode on a pre-generated scenario. Numerical failures are
/// caught and reported through result.status.
Episode run_episode(const ExperimentConfig& config, const env::Scenario& scenario,
                    const ResolvedParams& resolved, std::uint64_t seed);

/// Context map the algorithm uses for a round of the scenario.
lifting::ContextMap context_map_for(const ExperimentConfig& config, Algorithm algorithm, const env::Round& round);

env::ScenarioSpec scenario_spec(const ExperimentConfig& config, const env::FeedbackModel& feedback);

struct CellSummary {
  std::string algorithm;
  double coefficient = 0.0;
  double alpha = 0.0;
  double xi = 0.0;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double mean_regret = 0.0;
  double std_regret = 0.0;  // sample standard deviation
  double mean_runtime = 0.0;
  double mean_projections = 0.0;
};

struct SweepResult {
  std::vector<RunResult> runs;        // algorithm, coefficient, seed, feedback order
  std::vector<diag::Trace> traces;    // parallel to runs when keep_traces
  std::vector<CellSummary> cells;
  double total_seconds = 0.0;
};

SweepResult sweep(const ExperimentConfig& config);

/// Mean / sample stddev per (algorithm, coefficient, alpha, xi), failed
/// runs excluded. Cells keep first-appearance order.
std::vector<CellSummary> aggregate(const std::vector<RunResult>& runs);

/// Per (algorithm, alpha, xi), the cell with the smallest mean regret,
/// ties to the smaller coefficient. Cells without successful runs are
/// ignored.
std::vector<CellSummary> best_coefficients(const std::vector<CellSummary>& cells);

// Report emission.

extern const char* const kCsvHeader;

std::string format_double(double v);
std::string csv_row(const RunResult& r);
std::string to_csv(const std::vector<RunResult>& runs);
/// Parses CSV produced by to_csv (the CSV fields only).
std::vector<RunResult> parse_csv(const std::string& text);
std::vector<RunResult> read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<RunResult>& runs);

std::string json_report(const ExperimentConfig& config, const SweepResult& result);
void write_json_report(const std::string& path, const ExperimentConfig& config, const SweepResult& result);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace corectron::harness
