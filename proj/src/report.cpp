#include "corectron/harness.hpp"

#include "json_codec.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace corectron::harness {

const char* const kCsvHeader =
    "setting,algorithm,coefficient,seed,alpha,xi,T,final_regret,runtime_seconds,projection_count,status";

namespace {

constexpr std::size_t kCsvFields = 11;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("csv line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return v;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed: '" + path + "'");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string csv_row(const RunResult& r) {
  std::ostringstream os;
  os << r.setting << ',' << r.algorithm << ',' << format_double(r.coefficient) << ',' << r.seed << ','
     << format_double(r.alpha) << ',' << format_double(r.xi) << ',' << r.T << ',' << format_double(r.final_regret)
     << ',' << format_double(r.runtime_seconds) << ',' << r.projection_count << ',' << r.status;
  return os.str();
}

std::string to_csv(const std::vector<RunResult>& runs) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : runs) out += csv_row(r) + "\n";
  return out;
}

std::vector<RunResult> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: empty input");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::invalid_argument("csv: unexpected header '" + line + "'");
  std::vector<RunResult> runs;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line, ',');
    if (f.size() != kCsvFields) {
      throw std::invalid_argument("csv line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(kCsvFields) + " fields, got " + std::to_string(f.size()));
    }
    RunResult r;
    r.setting = f[0];
    r.algorithm = f[1];
    r.coefficient = parse_double(f[2], lineno);
    r.seed = parse_uint(f[3], lineno);
    r.alpha = parse_double(f[4], lineno);
    r.xi = parse_double(f[5], lineno);
    r.T = parse_uint(f[6], lineno);
    r.final_regret = parse_double(f[7], lineno);
    r.runtime_seconds = parse_double(f[8], lineno);
    r.projection_count = parse_uint(f[9], lineno);
    r.status = f[10];
    runs.push_back(std::move(r));
  }
  return runs;
}

std::vector<RunResult> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_csv(const std::string& path, const std::vector<RunResult>& runs) { write_file(path, to_csv(runs)); }

std::string json_report(const ExperimentConfig& config, const SweepResult& result) {
  using detail::Json;
  using detail::number;
  Json cfg;
  cfg["setting"] = env::to_string(config.setting);
  cfg["bandwidth"] = config.bandwidth;
  Json algos = Json::array();
  for (auto a : config.algorithms) algos.push_back(learners::to_string(a));
  cfg["algorithms"] = std::move(algos);
  cfg["n"] = config.n;
  cfg["m"] = config.m;
  cfg["p"] = config.p;
  cfg["T"] = config.T;
  cfg["J"] = config.J;
  cfg["seeds"] = config.seeds;
  cfg["coef_grid"] = config.coef_grid;
  Json fb = Json::array();
  for (const auto& f : config.feedback) fb.push_back(f.to_string());
  cfg["feedback"] = std::move(fb);
  cfg["diag_cap"] = config.diag_cap;
  cfg["eta_sur"] = config.eta_sur;
  cfg["gamma"] = config.gamma;

  Json runs = Json::array();
  for (const auto& r : result.runs) {
    Json j;
    j["algorithm"] = r.algorithm;
    j["coefficient"] = number(r.coefficient);
    j["seed"] = r.seed;
    j["feedback"] = r.feedback;
    j["alpha"] = number(r.alpha);
    j["xi"] = number(r.xi);
    j["T"] = r.T;
    j["final_regret"] = number(r.final_regret);
    j["runtime_seconds"] = number(r.runtime_seconds);
    j["total_seconds"] = number(r.total_seconds);
    j["projection_count"] = r.projection_count;
    j["status"] = r.status;
    if (!r.message.empty()) j["message"] = r.message;
    Json certs = Json::array();
    for (const auto& c : r.certificates) certs.push_back(detail::certificate_json(c));
    j["certificates"] = std::move(certs);
    j["certificates_hold"] = r.certificates_hold();
    runs.push_back(std::move(j));
  }

  auto cell_json = [&](const CellSummary& c) {
    Json j;
    j["algorithm"] = c.algorithm;
    j["coefficient"] = number(c.coefficient);
    j["alpha"] = number(c.alpha);
    j["xi"] = number(c.xi);
    j["runs"] = c.runs;
    j["failed"] = c.failed;
    j["mean_regret"] = number(c.mean_regret);
    j["std_regret"] = number(c.std_regret);
    j["mean_runtime_seconds"] = number(c.mean_runtime);
    j["mean_projection_count"] = number(c.mean_projections);
    return j;
  };
  Json cells = Json::array();
  for (const auto& c : result.cells) cells.push_back(cell_json(c));
  Json best = Json::array();
  for (const auto& c : best_coefficients(result.cells)) best.push_back(cell_json(c));

  Json report;
  report["config"] = std::move(cfg);
  report["total_seconds"] = number(result.total_seconds);
  report["timing_note"] = "runtime_seconds counts learner predict/update only; total_seconds includes oracle, "
                          "feedback and certificate evaluation";
  report["runs"] = std::move(runs);
  report["cells"] = std::move(cells);
  report["best"] = std::move(best);
  return report.dump(2);
}

void write_json_report(const std::string& path, const ExperimentConfig& config, const SweepResult& result) {
  write_file(path, json_report(config, result) + "\n");
}

}  // namespace corectron::harness
