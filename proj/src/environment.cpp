#include "corectron/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace corectron::env {

Rng make_stream(std::uint64_t seed, StreamRole role) {
  const auto r = static_cast<std::uint64_t>(role);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(r), 0x5eedu};
  return Rng(seq);
}

ActionSetSpec ActionSetSpec::standard(std::size_t n, std::size_t m) {
  ActionSetSpec spec{n, m, 1.0};
  const std::size_t half = std::min(m, n - std::min(m, n));
  if (half > 0) spec.scale = 1.0 / std::sqrt(2.0 * static_cast<double>(half));
  spec.validate();
  return spec;
}

double ActionSetSpec::diameter() const {
  return scale * std::sqrt(2.0 * static_cast<double>(std::min(m, n - m)));
}

void ActionSetSpec::validate() const {
  if (n == 0 || m == 0 || m > n) throw std::invalid_argument("ActionSetSpec: need 1 <= m <= n");
  if (!(scale > 0.0)) throw std::invalid_argument("ActionSetSpec: scale must be positive");
}

std::vector<std::size_t> top_m_indices(const Vector& w, std::size_t m) {
  std::vector<std::size_t> order(static_cast<std::size_t>(w.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return w(static_cast<Eigen::Index>(a)) > w(static_cast<Eigen::Index>(b));
  });
  order.resize(std::min(m, order.size()));
  return order;
}

namespace {

Vector indicator(const std::vector<std::size_t>& items, const ActionSetSpec& spec) {
  Vector x = Vector::Zero(static_cast<Eigen::Index>(spec.n));
  for (auto i : items) x(static_cast<Eigen::Index>(i)) = spec.scale;
  return x;
}

std::vector<std::size_t> full_ranking(const Vector& u) {
  return top_m_indices(u, static_cast<std::size_t>(u.size()));
}

}  // namespace

Vector top_m_oracle(const Vector& w, const ActionSetSpec& spec) {
  if (static_cast<std::size_t>(w.size()) != spec.n) throw DimensionError("top_m_oracle: dimension mismatch");
  return indicator(top_m_indices(w, spec.m), spec);
}

void require_feasible(const Vector& x, const ActionSetSpec& spec) {
  if (static_cast<std::size_t>(x.size()) != spec.n) throw DimensionError("action: dimension mismatch");
  std::size_t support = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) == spec.scale) {
      ++support;
    } else if (x(i) != 0.0) {
      throw std::invalid_argument("action: entries must be 0 or the action scale");
    }
  }
  if (support != spec.m) throw std::invalid_argument("action: wrong support size");
}

Vector clip_to_unit_ball(Vector z) {
  const double norm = z.norm();
  if (norm > 1.0) z /= norm;
  return z;
}

Vector sample_context(Rng& rng, std::size_t p) {
  std::normal_distribution<double> normal;
  Vector z(static_cast<Eigen::Index>(p));
  for (auto& v : z) v = normal(rng);
  return clip_to_unit_ball(std::move(z));
}

Vector UtilityModel::eval(const Vector& z) const {
  switch (kind) {
    case UtilityKind::Fixed:
      return fixed;
    case UtilityKind::Linear:
      if (z.size() != linear.cols()) throw DimensionError("utility: context dimension mismatch");
      return linear * z;
    case UtilityKind::Rbf: {
      Vector u = Vector::Zero(coeffs.front().size());
      for (std::size_t j = 0; j < centers.size(); ++j) u += kernel(z, centers[j]) * coeffs[j];
      return u;
    }
  }
  throw std::logic_error("utility: unknown kind");
}

double UtilityModel::comparator_norm() const {
  switch (kind) {
    case UtilityKind::Fixed:
      return fixed.norm();
    case UtilityKind::Linear:
      return linear.norm();
    case UtilityKind::Rbf: {
      double sq = 0.0;
      for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = 0; j < centers.size(); ++j) {
          sq += kernel(centers[i], centers[j]) * coeffs[i].dot(coeffs[j]);
        }
      }
      return std::sqrt(std::max(sq, 0.0));
    }
  }
  throw std::logic_error("utility: unknown kind");
}

std::size_t UtilityModel::base_dim() const {
  switch (kind) {
    case UtilityKind::Fixed:
      return static_cast<std::size_t>(fixed.size());
    case UtilityKind::Linear:
      return static_cast<std::size_t>(linear.rows());
    case UtilityKind::Rbf:
      return static_cast<std::size_t>(coeffs.front().size());
  }
  return 0;
}

UtilityModel build_utility_model(Rng& rng, UtilityKind kind, std::size_t n, std::size_t p,
                                 std::size_t J, double bandwidth) {
  if (n == 0 || p == 0) throw std::invalid_argument("build_utility_model: dimensions must be positive");
  std::normal_distribution<double> normal;
  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
    return M;
  };
  const auto ni = static_cast<Eigen::Index>(n);
  const auto pi = static_cast<Eigen::Index>(p);

  UtilityModel model;
  model.kind = kind;
  switch (kind) {
    case UtilityKind::Fixed: {
      Vector u;
      do {
        u = gaussian(ni, 1).col(0);
      } while (u.norm() == 0.0);
      model.fixed = u / u.norm();
      break;
    }
    case UtilityKind::Linear: {
      Matrix U;
      do {
        U = gaussian(ni, pi);
      } while (U.norm() == 0.0);
      model.linear = U / U.norm();
      break;
    }
    case UtilityKind::Rbf: {
      if (J == 0) throw std::invalid_argument("build_utility_model: need J >= 1 centers");
      model.kernel = KernelSpec::rbf(bandwidth);
      for (std::size_t j = 0; j < J; ++j) model.centers.push_back(clip_to_unit_ball(gaussian(pi, 1).col(0)));
      const auto Ji = static_cast<Eigen::Index>(J);
      Matrix K(Ji, Ji);
      for (Eigen::Index i = 0; i < Ji; ++i)
        for (Eigen::Index j = 0; j < Ji; ++j) K(i, j) = model.kernel(model.centers[i], model.centers[j]);
      double sq = 0.0;
      Matrix A;
      do {
        A = gaussian(Ji, ni);  // rows are a_j^raw
        sq = (A.transpose() * K * A).trace();
      } while (!(sq > 0.0));
      A /= std::sqrt(sq);
      for (Eigen::Index j = 0; j < Ji; ++j) model.coeffs.push_back(A.row(j).transpose());
      break;
    }
  }
  return model;
}

FeedbackModel FeedbackModel::one_swap(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("one-swap: alpha must lie in [0, 1]");
  return FeedbackModel{Kind::OneSwap, alpha, 0.0};
}

FeedbackModel FeedbackModel::score_perturb(double xi) {
  if (!(xi >= 0.0)) throw std::invalid_argument("score-perturb: xi must be nonnegative");
  return FeedbackModel{Kind::ScorePerturb, 0.0, xi};
}

std::string FeedbackModel::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Optimal:
      os << "optimal";
      break;
    case Kind::OneSwap:
      os << "one-swap(alpha=" << alpha << ")";
      break;
    case Kind::ScorePerturb:
      os << "score-perturb(xi=" << xi << ")";
      break;
  }
  return os.str();
}

double suboptimality(const Vector& u, const Vector& x_base, const ActionSetSpec& spec) {
  require_feasible(x_base, spec);
  return u.dot(top_m_oracle(u, spec)) - u.dot(x_base);
}

Revealed reveal_action(const FeedbackModel& model, const Vector& u, const ActionSetSpec& spec, Rng& rng) {
  if (static_cast<std::size_t>(u.size()) != spec.n) throw DimensionError("reveal_action: dimension mismatch");
  Revealed out;
  switch (model.kind) {
    case FeedbackModel::Kind::Optimal:
      out.x_base = top_m_oracle(u, spec);
      return out;
    case FeedbackModel::Kind::OneSwap: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      const bool coin = unif(rng) < model.alpha;
      auto ranking = full_ranking(u);
      std::vector<std::size_t> chosen(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(spec.m));
      if (coin && spec.m < spec.n) {
        const auto marginal = ranking[spec.m - 1];
        const auto excluded = ranking[spec.m];
        chosen.back() = excluded;
        out.swapped = true;
        out.delta = spec.scale * (u(static_cast<Eigen::Index>(marginal)) - u(static_cast<Eigen::Index>(excluded)));
      }
      out.x_base = indicator(chosen, spec);
      return out;
    }
    case FeedbackModel::Kind::ScorePerturb: {
      std::normal_distribution<double> normal;
      Vector eps(u.size());
      for (auto& v : eps) v = normal(rng);
      const Vector perturbed = u + (model.xi * u.norm()) * eps;
      out.x_base = top_m_oracle(perturbed, spec);
      out.delta = suboptimality(u, out.x_base, spec);
      return out;
    }
  }
  throw std::logic_error("reveal_action: unknown feedback kind");
}

std::string to_string(Setting s) {
  switch (s) {
    case Setting::NonContextual:
      return "noncontextual";
    case Setting::Linear:
      return "linear";
    case Setting::Kernel:
      return "kernel";
  }
  return "?";
}

Setting parse_setting(const std::string& s) {
  if (s == "linear") return Setting::Linear;
  if (s == "kernel") return Setting::Kernel;
  if (s == "noncontextual") return Setting::NonContextual;
  throw std::invalid_argument("unknown setting '" + s + "' (expected linear|kernel|noncontextual)");
}

Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  Scenario sc;
  sc.spec = spec;
  sc.actions = ActionSetSpec::standard(spec.n, spec.m);

  Rng model_rng = make_stream(seed, StreamRole::UtilityModel);
  Rng context_rng = make_stream(seed, StreamRole::Contexts);
  Rng feedback_rng = make_stream(seed, StreamRole::Feedback);

  const UtilityKind kind = spec.setting == Setting::NonContextual ? UtilityKind::Fixed
                           : spec.setting == Setting::Linear      ? UtilityKind::Linear
                                                                  : UtilityKind::Rbf;
  sc.model = build_utility_model(model_rng, kind, spec.n, spec.p, spec.J, spec.bandwidth);

  sc.rounds.reserve(spec.T);
  for (std::size_t t = 0; t < spec.T; ++t) {
    Round r;
    if (spec.setting != Setting::NonContextual) r.z = sample_context(context_rng, spec.p);
    r.u = sc.model.eval(r.z);
    auto rev = reveal_action(spec.feedback, r.u, sc.actions, feedback_rng);
    r.x_base = std::move(rev.x_base);
    r.delta = rev.delta;
    r.swapped = rev.swapped;
    sc.rounds.push_back(std::move(r));
  }
  return sc;
}

}  // namespace corectron::env
