#include "corectron/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

namespace corectron::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_representer(Algorithm a) { return a == Algorithm::CoRectronK || a == Algorithm::Kons; }

bool is_corectron(Algorithm a) { return a == Algorithm::CoRectronL || a == Algorithm::CoRectronK; }

bool feedback_is_optimal(const env::FeedbackModel& f) {
  using K = env::FeedbackModel::Kind;
  return f.kind == K::Optimal || (f.kind == K::OneSwap && f.alpha == 0.0) ||
         (f.kind == K::ScorePerturb && f.xi == 0.0);
}

bool all_finite(const Vector& v) { return v.allFinite(); }

void require_finite(const learners::UpdateInfo& info) {
  const double fields[] = {info.mu, info.nu, info.phi, info.phi_incremental, info.gt_mu};
  for (double f : fields) {
    if (!std::isfinite(f)) throw NumericalError("learner produced a non-finite diagnostic");
  }
}

diag::Trace trace_header(const ExperimentConfig& config, const env::Scenario& scenario,
                         const ResolvedParams& resolved) {
  diag::Trace trace;
  const Algorithm algo = resolved.algorithm;
  trace.algorithm = learners::to_string(algo);
  trace.n = config.n;
  trace.p = config.setting == env::Setting::NonContextual ? 0 : config.p;
  trace.lambda = resolved.params.lambda;
  trace.B = 1.0;
  trace.X = scenario.actions.diameter();
  trace.Z = 1.0;
  trace.kappa = 1.0;
  trace.comparator_norm = scenario.model.comparator_norm();
  trace.potential_diagnostics = is_corectron(algo);
  trace.optimal_feedback = feedback_is_optimal(scenario.spec.feedback);
  trace.gram_cap = config.diag_cap;
  switch (config.setting) {
    case env::Setting::NonContextual:
      trace.model = diag::ModelKind::NonContextual;
      trace.comparator_in_model = true;
      break;
    case env::Setting::Linear:
      trace.model = diag::ModelKind::LinearContext;
      trace.comparator_in_model = true;
      break;
    case env::Setting::Kernel:
      if (is_representer(algo)) {
        trace.model = diag::ModelKind::Kernel;
        trace.kernel = KernelSpec::rbf(config.bandwidth);
        trace.comparator_in_model = scenario.model.kernel.bandwidth == config.bandwidth;
      } else {
        // Linear lift of an RBF utility: no comparator in the model.
        trace.model = diag::ModelKind::LinearContext;
        trace.comparator_in_model = false;
      }
      break;
  }
  return trace;
}

}  // namespace

std::vector<double> default_coef_grid() { return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}; }

std::vector<Algorithm> admitted_algorithms(env::Setting setting) {
  if (setting == env::Setting::Kernel) {
    return {Algorithm::CoRectronL, Algorithm::CoRectronK, Algorithm::Ogd, Algorithm::Ons, Algorithm::Kons};
  }
  return {Algorithm::CoRectronL, Algorithm::Ogd, Algorithm::Ons};
}

ExperimentConfig ExperimentConfig::defaults(env::Setting setting) {
  ExperimentConfig c;
  c.setting = setting;
  c.algorithms = admitted_algorithms(setting);
  c.T = setting == env::Setting::Kernel ? 500 : 2000;
  c.seeds = {0, 1, 2, 3, 4};
  c.coef_grid = default_coef_grid();
  c.feedback = {env::FeedbackModel::optimal()};
  return c;
}

void ExperimentConfig::apply_full_scale() {
  T = setting == env::Setting::Kernel ? 1000 : 10000;
  seeds.clear();
  for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(s);
}

void ExperimentConfig::validate() const {
  if (n == 0 || m == 0 || m > n) throw std::invalid_argument("config: need 1 <= m <= n");
  if (setting != env::Setting::NonContextual && p == 0) throw std::invalid_argument("config: p must be positive");
  if (setting == env::Setting::Kernel && !(bandwidth > 0.0)) {
    throw std::invalid_argument("config: bandwidth must be positive");
  }
  if (J == 0) throw std::invalid_argument("config: J must be positive");
  if (algorithms.empty()) throw std::invalid_argument("config: no algorithms selected");
  const auto admitted = admitted_algorithms(setting);
  for (auto a : algorithms) {
    if (std::find(admitted.begin(), admitted.end(), a) == admitted.end()) {
      throw std::invalid_argument("config: " + learners::to_string(a) + " is not available in the " +
                                  env::to_string(setting) + " setting");
    }
  }
  if (coef_grid.empty()) throw std::invalid_argument("config: empty coefficient grid");
  for (double c : coef_grid) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("config: coefficients must be positive");
  }
  if (seeds.empty()) throw std::invalid_argument("config: no seeds");
  if (feedback.empty()) throw std::invalid_argument("config: no feedback model");
  if (!(eta_sur > 0.0) || !(gamma > 0.0)) throw std::invalid_argument("config: eta_sur and gamma must be positive");
}

std::size_t lifted_dimension(const ExperimentConfig& config) {
  return config.setting == env::Setting::NonContextual ? config.n : config.n * config.p;
}

ResolvedParams resolve_hyperparameters(const ExperimentConfig& config, Algorithm algorithm, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("resolve_hyperparameters: coefficient must be positive");
  ResolvedParams r;
  r.algorithm = algorithm;
  r.coefficient = c;
  const auto d = static_cast<double>(lifted_dimension(config));
  const double B = 1.0;
  r.params.lifted_dim = lifted_dimension(config);
  r.params.lambda = c * B * B * d;
  r.params.ons.eta_sur = config.eta_sur;
  r.params.ons.gamma = config.gamma;
  r.params.ons.epsilon = c * d / (4.0 * config.gamma * config.gamma);
  const double T = static_cast<double>(std::max<std::size_t>(config.T, 1));
  r.params.eta = (2.0 / std::sqrt(T)) / c;
  return r;
}

env::ScenarioSpec scenario_spec(const ExperimentConfig& config, const env::FeedbackModel& feedback) {
  env::ScenarioSpec spec;
  spec.setting = config.setting;
  spec.n = config.n;
  spec.m = config.m;
  spec.p = config.p;
  spec.T = config.T;
  spec.J = config.J;
  spec.bandwidth = config.bandwidth;
  spec.feedback = feedback;
  return spec;
}

lifting::ContextMap context_map_for(const ExperimentConfig& config, Algorithm algorithm, const env::Round& round) {
  switch (config.setting) {
    case env::Setting::NonContextual:
      return lifting::ContextMap::identity(config.n);
    case env::Setting::Linear:
      return lifting::ContextMap::linear_context(config.n, round.z);
    case env::Setting::Kernel:
      if (is_representer(algorithm)) {
        return lifting::ContextMap::kernel_feature(config.n, round.z, KernelSpec::rbf(config.bandwidth));
      }
      return lifting::ContextMap::linear_context(config.n, round.z);
  }
  throw std::logic_error("context_map_for: unknown setting");
}

Episode run_episode(const ExperimentConfig& config, const env::Scenario& scenario, const ResolvedParams& resolved,
                    std::uint64_t seed) {
  const auto start = Clock::now();
  Episode ep;
  RunResult& res = ep.result;
  res.setting = env::to_string(config.setting);
  res.algorithm = learners::to_string(resolved.algorithm);
  res.coefficient = resolved.coefficient;
  res.seed = seed;
  res.T = scenario.rounds.size();
  res.feedback = scenario.spec.feedback.to_string();
  if (scenario.spec.feedback.kind == env::FeedbackModel::Kind::OneSwap) res.alpha = scenario.spec.feedback.alpha;
  if (scenario.spec.feedback.kind == env::FeedbackModel::Kind::ScorePerturb) res.xi = scenario.spec.feedback.xi;

  ep.trace = trace_header(config, scenario, resolved);
  ep.trace.rounds.reserve(scenario.rounds.size());

  double learner_seconds = 0.0;
  try {
    auto learner = learners::make_learner(resolved.algorithm, resolved.params);
    for (std::size_t t = 0; t < scenario.rounds.size(); ++t) {
      const auto& round = scenario.rounds[t];
      const auto map = context_map_for(config, resolved.algorithm, round);

      auto t0 = Clock::now();
      const Vector w = learner->predict_base(map);
      learner_seconds += seconds_since(t0);
      if (!all_finite(w)) throw NumericalError("non-finite prediction at round " + std::to_string(t + 1));

      const Vector xhat = env::top_m_oracle(w, scenario.actions);
      Vector g = xhat - round.x_base;

      t0 = Clock::now();
      const auto info = learner->update(map, g);
      learner_seconds += seconds_since(t0);
      require_finite(info);

      if (info.projected) ++res.projection_count;
      diag::TraceRound tr;
      tr.mu = info.mu;
      tr.nu = info.nu;
      tr.phi = info.phi;
      tr.phi_incremental = info.phi_incremental;
      tr.gt_mu = info.gt_mu;
      tr.g_norm = info.g_norm;
      tr.zeta_norm_prev = info.zeta_norm_prev;
      tr.regret = round.u.dot(round.x_base - xhat);
      tr.delta = round.delta;
      tr.z = round.z;
      tr.g_base = std::move(g);
      res.final_regret += tr.regret;
      ep.trace.rounds.push_back(std::move(tr));
    }
  } catch (const std::exception& e) {
    res.status = "failed";
    res.message = e.what();
  }
  res.runtime_seconds = learner_seconds;
  if (res.ok() && config.certify) res.certificates = diag::certify(ep.trace);
  res.total_seconds = seconds_since(start);
  return ep;
}

SweepResult sweep(const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();

  // One scenario per (seed, feedback), shared by every algorithm.
  const std::size_t F = config.feedback.size();
  const std::size_t S = config.seeds.size();
  std::vector<env::Scenario> scenarios(S * F);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t f = 0; f < F; ++f) {
      scenarios[s * F + f] = env::generate_scenario(scenario_spec(config, config.feedback[f]), config.seeds[s]);
    }
  }

  struct Task {
    Algorithm algo;
    double coef;
    std::size_t seed_index;
    std::size_t feedback_index;
  };
  std::vector<Task> tasks;
  for (auto a : config.algorithms)
    for (double c : config.coef_grid)
      for (std::size_t s = 0; s < S; ++s)
        for (std::size_t f = 0; f < F; ++f) tasks.push_back({a, c, s, f});

  std::vector<Episode> episodes(tasks.size());
  auto run_task = [&](std::size_t i) {
    const auto& task = tasks[i];
    const auto resolved = resolve_hyperparameters(config, task.algo, task.coef);
    episodes[i] = run_episode(config, scenarios[task.seed_index * F + task.feedback_index], resolved,
                              config.seeds[task.seed_index]);
    if (!config.keep_traces) episodes[i].trace.rounds.clear();
  };

  std::size_t workers = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  workers = std::min(workers, std::max<std::size_t>(tasks.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) run_task(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  SweepResult out;
  out.runs.reserve(episodes.size());
  for (auto& ep : episodes) {
    out.runs.push_back(std::move(ep.result));
    if (config.keep_traces) out.traces.push_back(std::move(ep.trace));
  }
  out.cells = aggregate(out.runs);
  out.total_seconds = seconds_since(start);
  return out;
}

std::vector<CellSummary> aggregate(const std::vector<RunResult>& runs) {
  using Key = std::tuple<std::string, double, double, double>;
  std::map<Key, std::size_t> index;
  std::vector<CellSummary> cells;
  std::vector<std::vector<const RunResult*>> members;
  for (const auto& r : runs) {
    const Key key{r.algorithm, r.coefficient, r.alpha, r.xi};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, cells.size()).first;
      CellSummary c;
      c.algorithm = r.algorithm;
      c.coefficient = r.coefficient;
      c.alpha = r.alpha;
      c.xi = r.xi;
      cells.push_back(c);
      members.emplace_back();
    }
    members[it->second].push_back(&r);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& c = cells[i];
    std::vector<const RunResult*> ok;
    for (const auto* r : members[i]) {
      if (r->ok()) ok.push_back(r);
    }
    c.runs = ok.size();
    c.failed = members[i].size() - ok.size();
    if (ok.empty()) {
      c.mean_regret = c.std_regret = c.mean_runtime = c.mean_projections = std::nan("");
      continue;
    }
    const double k = static_cast<double>(ok.size());
    double sum = 0.0, rt = 0.0, pc = 0.0;
    for (const auto* r : ok) {
      sum += r->final_regret;
      rt += r->runtime_seconds;
      pc += static_cast<double>(r->projection_count);
    }
    c.mean_regret = sum / k;
    c.mean_runtime = rt / k;
    c.mean_projections = pc / k;
    double ss = 0.0;
    for (const auto* r : ok) ss += (r->final_regret - c.mean_regret) * (r->final_regret - c.mean_regret);
    c.std_regret = ok.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
  }
  return cells;
}

std::vector<CellSummary> best_coefficients(const std::vector<CellSummary>& cells) {
  using Key = std::tuple<std::string, double, double>;
  std::map<Key, std::size_t> index;
  std::vector<CellSummary> best;
  for (const auto& c : cells) {
    if (c.runs == 0 || !std::isfinite(c.mean_regret)) continue;
    const Key key{c.algorithm, c.alpha, c.xi};
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, best.size());
      best.push_back(c);
      continue;
    }
    auto& cur = best[it->second];
    if (c.mean_regret < cur.mean_regret || (c.mean_regret == cur.mean_regret && c.coefficient < cur.coefficient)) {
      cur = c;
    }
  }
  return best;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) return std::nan("");
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  Eigen::Map<const Vector> x(ra.data(), static_cast<Eigen::Index>(n));
  Eigen::Map<const Vector> y(rb.data(), static_cast<Eigen::Index>(n));
  const Vector dx = x.array() - x.mean();
  const Vector dy = y.array() - y.mean();
  const double denom = dx.norm() * dy.norm();
  return denom > 0.0 ? dx.dot(dy) / denom : std::nan("");
}

}  // namespace corectron::harness
