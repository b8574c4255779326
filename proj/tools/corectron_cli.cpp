// corectron: experiment runner and certificate checker.
//
//   corectron run --setting linear --out results/
//   corectron certify --trace results/traces/CoRectron-L_c1_s0_optimal.json
//   corectron best --in results/results.csv

#include "corectron/harness.hpp"
#include "corectron/trace_io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace corectron;

namespace {

struct RunOptions {
  std::string setting = "linear";
  double bandwidth = 1.0;
  std::vector<std::string> algos;
  std::size_t T = 0;
  std::size_t seeds = 5;
  std::size_t n = 10, m = 5, p = 10, J = 16;
  std::vector<double> coef_grid;
  std::vector<double> alpha;
  std::vector<double> xi;
  std::string out;
  bool full_scale = false;
  bool single_thread = false;
  std::size_t threads = 0;
  std::size_t diag_cap = 2000;
  bool save_traces = false;
  bool no_certify = false;
};

void print_certificates(const std::vector<diag::Certificate>& certs) {
  for (const auto& c : certs) {
    const char* state = c.skipped ? "SKIP" : (c.holds ? "ok" : "FAIL");
    std::printf("  %-22s %-4s lhs=%-14.8g rhs=%-14.8g %s\n", c.name.c_str(), state, c.lhs, c.rhs, c.note.c_str());
  }
}

void print_best(const std::vector<harness::CellSummary>& best) {
  std::printf("%-12s %8s %8s %12s %14s %12s %10s %12s\n", "algorithm", "alpha", "xi", "best_coef", "mean_regret",
              "std_regret", "runs", "mean_proj");
  for (const auto& c : best) {
    std::printf("%-12s %8g %8g %12g %14.6f %12.6f %10zu %12.1f\n", c.algorithm.c_str(), c.alpha, c.xi, c.coefficient,
                c.mean_regret, c.std_regret, c.runs, c.mean_projections);
  }
}

std::string trace_file_name(const harness::RunResult& r) {
  std::string fb = r.alpha != 0.0 ? "a" + harness::format_double(r.alpha)
                 : r.xi != 0.0    ? "x" + harness::format_double(r.xi)
                                  : std::string("opt");
  return r.algorithm + "_c" + harness::format_double(r.coefficient) + "_s" + std::to_string(r.seed) + "_" + fb +
         ".json";
}

int cmd_run(const RunOptions& o) {
  const auto setting = env::parse_setting(o.setting);
  auto config = harness::ExperimentConfig::defaults(setting);
  config.bandwidth = o.bandwidth;
  config.n = o.n;
  config.m = o.m;
  config.p = o.p;
  config.J = o.J;
  if (o.full_scale) config.apply_full_scale();
  if (o.T > 0) config.T = o.T;
  if (!o.full_scale || o.seeds != 5) {
    config.seeds.clear();
    for (std::uint64_t s = 0; s < o.seeds; ++s) config.seeds.push_back(s);
  }
  if (!o.algos.empty()) {
    config.algorithms.clear();
    for (const auto& a : o.algos) config.algorithms.push_back(learners::parse_algorithm(a));
  }
  if (!o.coef_grid.empty()) config.coef_grid = o.coef_grid;
  if (!o.alpha.empty() || !o.xi.empty()) {
    config.feedback.clear();
    for (double a : o.alpha) config.feedback.push_back(env::FeedbackModel::one_swap(a));
    for (double x : o.xi) config.feedback.push_back(env::FeedbackModel::score_perturb(x));
  }
  config.diag_cap = o.diag_cap;
  config.threads = o.single_thread ? 1 : o.threads;
  config.keep_traces = o.save_traces;
  config.certify = !o.no_certify;
  config.validate();

  fs::create_directories(o.out);
  const auto result = harness::sweep(config);
  harness::write_csv((fs::path(o.out) / "results.csv").string(), result.runs);
  harness::write_json_report((fs::path(o.out) / "report.json").string(), config, result);
  if (o.save_traces) {
    const auto dir = fs::path(o.out) / "traces";
    fs::create_directories(dir);
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
      diag::save_trace(result.traces[i], (dir / trace_file_name(result.runs[i])).string());
    }
  }

  std::size_t failed_runs = 0, failed_certs = 0, checked = 0;
  for (const auto& r : result.runs) {
    if (!r.ok()) {
      ++failed_runs;
      std::fprintf(stderr, "warning: %s c=%g seed=%llu failed: %s\n", r.algorithm.c_str(), r.coefficient,
                   static_cast<unsigned long long>(r.seed), r.message.c_str());
    }
    for (const auto& c : r.certificates) {
      if (c.skipped) continue;
      ++checked;
      if (!c.holds) {
        ++failed_certs;
        std::fprintf(stderr, "certificate %s FAILED: %s c=%g seed=%llu lhs=%.10g rhs=%.10g\n", c.name.c_str(),
                     r.algorithm.c_str(), r.coefficient, static_cast<unsigned long long>(r.seed), c.lhs, c.rhs);
      }
    }
  }
  print_best(harness::best_coefficients(result.cells));
  std::printf("runs=%zu failed=%zu certificates=%zu failed_certificates=%zu total_seconds=%.2f\n",
              result.runs.size(), failed_runs, checked, failed_certs, result.total_seconds);
  std::printf("wrote %s\n", (fs::path(o.out) / "results.csv").string().c_str());
  return failed_certs == 0 ? 0 : 1;
}

int cmd_certify(const std::string& path) {
  const auto trace = diag::load_trace(path);
  const auto certs = diag::certify(trace);
  std::printf("%s T=%zu lambda=%g model=%s\n", trace.algorithm.c_str(), trace.T(), trace.lambda,
              diag::to_string(trace.model).c_str());
  print_certificates(certs);
  return diag::all_hold(certs) ? 0 : 1;
}

int cmd_best(const std::string& path) {
  const auto runs = harness::read_csv(path);
  print_best(harness::best_coefficients(harness::aggregate(runs)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CoRectron experiment runner"};
  app.require_subcommand(1);

  RunOptions o;
  auto* run = app.add_subcommand("run", "Sweep algorithms x coefficients x seeds x feedback");
  // Config keys live in a [run] section; command-line flags take precedence.
  app.set_config("--config", "", "TOML / key = value config file");
  run->fallthrough();
  run->add_option("--setting", o.setting, "linear | kernel | noncontextual")
      ->check(CLI::IsMember({"linear", "kernel", "noncontextual"}));
  run->add_option("--bandwidth", o.bandwidth, "RBF bandwidth (kernel setting)");
  run->add_option("--algos", o.algos, "Comma-separated algorithms")->delimiter(',');
  run->add_option("--T", o.T, "Horizon (default: 2000 linear/noncontextual, 500 kernel)");
  run->add_option("--seeds", o.seeds, "Number of seeds, run as 0..N-1");
  run->add_option("--n", o.n, "Items");
  run->add_option("--m", o.m, "Items per recommendation");
  run->add_option("--p", o.p, "Context dimension");
  run->add_option("--J", o.J, "RBF centers of the hidden utility");
  run->add_option("--coef-grid", o.coef_grid, "Comma-separated coefficient grid")->delimiter(',');
  run->add_option("--alpha", o.alpha, "One-swap probabilities")->delimiter(',');
  run->add_option("--xi", o.xi, "Score-perturb noise levels")->delimiter(',');
  run->add_option("--out", o.out, "Output directory")->required();
  run->add_flag("--full-scale", o.full_scale, "T=10000 linear / 1000 kernel, 10 seeds");
  run->add_flag("--single-thread", o.single_thread, "Run every episode on one thread");
  run->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  run->add_option("--diag-cap", o.diag_cap, "Largest T for Gram-matrix certificates");
  run->add_flag("--save-traces", o.save_traces, "Write per-run traces to OUT/traces");
  run->add_flag("--no-certify", o.no_certify, "Skip certificate evaluation");

  std::string trace_path;
  auto* certify = app.add_subcommand("certify", "Re-run certificates on a saved trace");
  certify->add_option("--trace", trace_path, "Trace JSON file")->required()->check(CLI::ExistingFile);

  std::string csv_path;
  auto* best = app.add_subcommand("best", "Best coefficient per algorithm from a results CSV");
  best->add_option("--in", csv_path, "Results CSV")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(o);
    if (*certify) return cmd_certify(trace_path);
    if (*best) return cmd_best(csv_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
