#include "corectron/trace_io.hpp"

#include "json_codec.hpp"

#include <fstream>
#include <sstream>

namespace corectron::diag {

using detail::Json;
using detail::number;
using detail::number_from;

std::string encode_trace(const Trace& trace) {
  Json j;
  j["algorithm"] = trace.algorithm;
  j["model"] = to_string(trace.model);
  j["kernel"] = {{"kind", trace.kernel.kind == KernelSpec::Kind::Rbf ? "rbf" : "linear-dot"},
                 {"bandwidth", trace.kernel.bandwidth}};
  j["n"] = trace.n;
  j["p"] = trace.p;
  j["lambda"] = number(trace.lambda);
  j["B"] = number(trace.B);
  j["X"] = number(trace.X);
  j["Z"] = number(trace.Z);
  j["kappa"] = number(trace.kappa);
  j["comparator_norm"] = number(trace.comparator_norm);
  j["comparator_in_model"] = trace.comparator_in_model;
  j["potential_diagnostics"] = trace.potential_diagnostics;
  j["optimal_feedback"] = trace.optimal_feedback;
  j["gram_cap"] = trace.gram_cap;
  Json rounds = Json::array();
  for (const auto& r : trace.rounds) {
    rounds.push_back({{"mu", number(r.mu)},
                      {"nu", number(r.nu)},
                      {"phi", number(r.phi)},
                      {"phi_incremental", number(r.phi_incremental)},
                      {"gt_mu", number(r.gt_mu)},
                      {"g_norm", number(r.g_norm)},
                      {"zeta_norm_prev", number(r.zeta_norm_prev)},
                      {"regret", number(r.regret)},
                      {"delta", number(r.delta)},
                      {"z", detail::vector_json(r.z)},
                      {"g_base", detail::vector_json(r.g_base)}});
  }
  j["rounds"] = std::move(rounds);
  return j.dump();
}

Trace decode_trace(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("trace: malformed JSON: ") + e.what());
  }
  try {
    Trace t;
    t.algorithm = j.at("algorithm").get<std::string>();
    t.model = parse_model_kind(j.at("model").get<std::string>());
    const auto& k = j.at("kernel");
    t.kernel = k.at("kind").get<std::string>() == "rbf" ? KernelSpec::rbf(k.at("bandwidth").get<double>())
                                                         : KernelSpec::linear_dot();
    t.n = j.at("n").get<std::size_t>();
    t.p = j.at("p").get<std::size_t>();
    t.lambda = number_from(j.at("lambda"));
    t.B = number_from(j.at("B"));
    t.X = number_from(j.at("X"));
    t.Z = number_from(j.at("Z"));
    t.kappa = number_from(j.at("kappa"));
    t.comparator_norm = number_from(j.at("comparator_norm"));
    t.comparator_in_model = j.at("comparator_in_model").get<bool>();
    t.potential_diagnostics = j.at("potential_diagnostics").get<bool>();
    t.optimal_feedback = j.at("optimal_feedback").get<bool>();
    t.gram_cap = j.at("gram_cap").get<std::size_t>();
    for (const auto& r : j.at("rounds")) {
      TraceRound row;
      row.mu = number_from(r.at("mu"));
      row.nu = number_from(r.at("nu"));
      row.phi = number_from(r.at("phi"));
      row.phi_incremental = number_from(r.at("phi_incremental"));
      row.gt_mu = number_from(r.at("gt_mu"));
      row.g_norm = number_from(r.at("g_norm"));
      row.zeta_norm_prev = number_from(r.at("zeta_norm_prev"));
      row.regret = number_from(r.at("regret"));
      row.delta = number_from(r.at("delta"));
      row.z = detail::vector_from(r.at("z"));
      row.g_base = detail::vector_from(r.at("g_base"));
      t.rounds.push_back(std::move(row));
    }
    return t;
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("trace: missing or mistyped field: ") + e.what());
  }
}

void save_trace(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << encode_trace(trace) << '\n';
  if (!out) throw std::runtime_error("write failed: '" + path + "'");
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return decode_trace(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace corectron::diag
