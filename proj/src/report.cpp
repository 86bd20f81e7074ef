#include "numdual/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace numdual {

using nlohmann::json;

namespace {

std::string g17(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

json config_to_json(const SolverConfig& c) {
  json out;
  out["eps"] = c.eps;
  out["R"] = c.R;
  out["seed"] = c.seed;
  out["max_iter"] = c.max_iter;
  out["record_every"] = c.record_every;
  out["confidence_delta"] = c.confidence_delta;
  out["M_override"] = c.M_override;
  out["early_exit"] = c.early_exit;
  out["record_duals"] = c.record_duals;
  if (!c.lambda0.empty()) out["lambda0"] = c.lambda0;
  return out;
}

SolverConfig config_from_json(const json& obj) {
  SolverConfig c;
  c.eps = obj.value("eps", c.eps);
  c.R = obj.value("R", c.R);
  c.seed = obj.value("seed", c.seed);
  c.max_iter = obj.value("max_iter", c.max_iter);
  c.record_every = obj.value("record_every", c.record_every);
  c.confidence_delta = obj.value("confidence_delta", c.confidence_delta);
  c.M_override = obj.value("M_override", c.M_override);
  c.early_exit = obj.value("early_exit", c.early_exit);
  c.record_duals = obj.value("record_duals", c.record_duals);
  if (obj.contains("lambda0")) c.lambda0 = obj["lambda0"].get<Vec>();
  return c;
}

}  // namespace

std::string report_to_json_string(const SolverReport& r) {
  json out;
  out["method"] = method_name(r.method);
  out["iterations"] = r.iterations;
  out["theoretical_n"] = r.theoretical_n;
  out["lambda"] = r.lambda.lambda;
  out["x_hat"] = r.x_hat.x;
  out["config"] = config_to_json(r.config);
  json constants;
  constants["M"] = r.constants.M;
  if (r.constants.L) constants["L"] = *r.constants.L;
  if (r.constants.mu) constants["mu"] = *r.constants.mu;
  out["constants"] = constants;
  out["wall_ms"] = r.wall_ms;
  out["early_exited"] = r.early_exited;
  out["exact_optimum"] = r.exact_optimum;
  out["localization_exhausted"] = r.localization_exhausted;
  out["loop_user_evals"] = r.loop_user_evals;
  json history = json::array();
  for (const HistoryRow& row : r.history) {
    json h;
    h["iter"] = row.iter;
    h["phi"] = row.phi;
    if (row.gap && std::isfinite(*row.gap))
      h["gap"] = *row.gap;
    else
      h["gap"] = nullptr;
    h["feas"] = row.feas;
    h["elapsed_ms"] = row.elapsed_ms;
    history.push_back(std::move(h));
  }
  out["history"] = std::move(history);
  if (!r.dual_trace.empty()) {
    json trace = json::array();
    for (const auto& [iter, lam] : r.dual_trace)
      trace.push_back(json::array({iter, lam}));
    out["dual_trace"] = std::move(trace);
  }
  if (r.certificate) {
    out["certificate"] = {{"iter", r.certificate->iter},
                          {"xi", r.certificate->xi}};
  }
  if (r.message_count) out["message_count"] = *r.message_count;
  return out.dump(2);
}

SolverReport report_from_json_string(const std::string& text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::kParse, std::string("report file: ") + e.what());
  }
  try {
    SolverReport r;
    r.method = method_from_name(obj.at("method").get<std::string>());
    r.iterations = obj.value("iterations", 0LL);
    r.theoretical_n = obj.value("theoretical_n", -1LL);
    if (obj.contains("lambda")) r.lambda.lambda = obj["lambda"].get<Vec>();
    if (obj.contains("x_hat")) r.x_hat.x = obj["x_hat"].get<Vec>();
    if (obj.contains("config")) r.config = config_from_json(obj["config"]);
    if (obj.contains("constants")) {
      const json& c = obj["constants"];
      r.constants.M = c.value("M", 0.0);
      if (c.contains("L")) r.constants.L = c["L"].get<double>();
      if (c.contains("mu")) r.constants.mu = c["mu"].get<double>();
    }
    r.wall_ms = obj.value("wall_ms", 0.0);
    r.early_exited = obj.value("early_exited", false);
    r.exact_optimum = obj.value("exact_optimum", false);
    r.localization_exhausted = obj.value("localization_exhausted", false);
    r.loop_user_evals = obj.value("loop_user_evals", 0LL);
    for (const json& h : obj.value("history", json::array())) {
      HistoryRow row;
      row.iter = h.at("iter").get<long long>();
      row.phi = h.at("phi").get<double>();
      if (h.contains("gap") && !h["gap"].is_null())
        row.gap = h["gap"].get<double>();
      row.feas = h.at("feas").get<double>();
      row.elapsed_ms = h.value("elapsed_ms", 0.0);
      r.history.push_back(row);
    }
    if (obj.contains("dual_trace")) {
      for (const json& entry : obj["dual_trace"])
        r.dual_trace.emplace_back(entry.at(0).get<long long>(),
                                  entry.at(1).get<Vec>());
    }
    if (obj.contains("certificate")) {
      CertificateWeights w;
      w.iter = obj["certificate"].at("iter").get<std::vector<long long>>();
      w.xi = obj["certificate"].at("xi").get<Vec>();
      r.certificate = std::move(w);
    }
    if (obj.contains("message_count"))
      r.message_count = obj["message_count"].get<long long>();
    return r;
  } catch (const json::exception& e) {
    fail(Errc::kParse, std::string("report file: ") + e.what());
  }
}

void save_report(const SolverReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::kIo, "cannot open '" + path + "' for writing");
  out << report_to_json_string(report) << '\n';
  if (!out) fail(Errc::kIo, "write to '" + path + "' failed");
}

SolverReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::kIo, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return report_from_json_string(buffer.str());
}

std::string report_trace_csv(const SolverReport& report) {
  std::ostringstream out;
  out << "iter,phi,gap,feas,elapsed_ms\n";
  for (const HistoryRow& row : report.history) {
    out << row.iter << ',' << g17(row.phi) << ',';
    if (row.gap && std::isfinite(*row.gap)) out << g17(*row.gap);
    out << ',' << g17(row.feas) << ',' << g17(row.elapsed_ms) << '\n';
  }
  return out.str();
}

void save_trace_csv(const SolverReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::kIo, "cannot open '" + path + "' for writing");
  out << report_trace_csv(report);
  if (!out) fail(Errc::kIo, "write to '" + path + "' failed");
}

}  // namespace numdual
