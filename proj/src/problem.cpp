#include "numdual/problem.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "numdual/rng.hpp"

namespace numdual {

using nlohmann::json;

NetworkProblem::NetworkProblem(int m, int n, std::vector<std::vector<int>> routes,
                               Vec b)
    : m_(m), n_(n), b_(std::move(b)), cols_(std::move(routes)) {
  if (m_ <= 0) fail(Errc::kValidation, "m must be positive");
  if (n_ <= 0) fail(Errc::kValidation, "n must be positive");
  if (static_cast<int>(b_.size()) != m_)
    fail(Errc::kValidation, "b must have one capacity per link");
  for (int j = 0; j < m_; ++j) {
    if (!(b_[j] > 0.0)) {
      std::ostringstream msg;
      msg << "capacity must be positive (b[" << j << "] = " << b_[j] << ")";
      fail(Errc::kValidation, msg.str());
    }
  }
  if (static_cast<int>(cols_.size()) != n_)
    fail(Errc::kValidation, "routes must list one route per user");
  rows_.assign(m_, {});
  for (int k = 0; k < n_; ++k) {
    auto& route = cols_[k];
    std::sort(route.begin(), route.end());
    if (route.empty()) {
      std::ostringstream msg;
      msg << "user " << k << " uses no links (column of C is zero)";
      fail(Errc::kValidation, msg.str());
    }
    for (std::size_t i = 0; i < route.size(); ++i) {
      const int j = route[i];
      if (j < 0 || j >= m_) {
        std::ostringstream msg;
        msg << "route of user " << k << " references link " << j
            << " outside [0, " << m_ << ")";
        fail(Errc::kValidation, msg.str());
      }
      if (i > 0 && route[i - 1] == j) {
        std::ostringstream msg;
        msg << "route of user " << k << " lists link " << j << " twice";
        fail(Errc::kValidation, msg.str());
      }
      rows_[j].push_back(k);
    }
  }
  // Rows come out ascending because users are visited in order.
}

const std::vector<int>& NetworkProblem::links_of(int k) const {
  if (k < 0 || k >= n_) fail(Errc::kInvalidArgument, "user index out of range");
  return cols_[static_cast<std::size_t>(k)];
}

const std::vector<int>& NetworkProblem::users_of(int j) const {
  if (j < 0 || j >= m_) fail(Errc::kInvalidArgument, "link index out of range");
  return rows_[static_cast<std::size_t>(j)];
}

long long NetworkProblem::nnz() const {
  long long total = 0;
  for (const auto& route : cols_) total += static_cast<long long>(route.size());
  return total;
}

const UtilitySpec& NetworkProblem::utilities_checked() const {
  if (!utilities_)
    fail(Errc::kValidation, "problem has no utilities attached");
  return *utilities_;
}

void NetworkProblem::set_utilities(UtilitySpec spec) {
  if (spec.family == UtilityFamily::kQuadratic) {
    if (static_cast<int>(spec.a.size()) != n_)
      fail(Errc::kValidation, "quadratic utilities need one coefficient per user");
    for (int k = 0; k < n_; ++k) {
      if (!(spec.a[k] > 0.0)) {
        std::ostringstream msg;
        msg << "utility coefficient must be positive (a[" << k << "])";
        fail(Errc::kValidation, msg.str());
      }
    }
    if (!(spec.sigma > 0.0))
      fail(Errc::kValidation, "sigma must be positive");
  } else {
    if (!(spec.x_lo > 0.0) || !(spec.x_hi > spec.x_lo))
      fail(Errc::kValidation, "logarithmic box needs 0 < x_lo < x_hi");
  }
  utilities_ = std::move(spec);
}

std::vector<std::vector<int>> NetworkProblem::dense_rows() const {
  std::vector<std::vector<int>> rows(m_, std::vector<int>(n_, 0));
  for (int k = 0; k < n_; ++k)
    for (int j : cols_[k]) rows[j][k] = 1;
  return rows;
}

NetworkProblem generate_uniform_network(int m, int n, double b_value) {
  if (!(b_value > 0.0)) fail(Errc::kValidation, "capacity must be positive");
  std::vector<std::vector<int>> routes(n);
  std::vector<int> all(m);
  for (int j = 0; j < m; ++j) all[j] = j;
  for (auto& route : routes) route = all;
  return NetworkProblem(m, n, std::move(routes), Vec(m, b_value));
}

NetworkProblem generate_random_network(int m, int n, std::uint64_t seed) {
  if (m <= 0 || n <= 0) fail(Errc::kValidation, "m and n must be positive");
  RandomStream b_stream(seed, kStreamCapacities);
  Vec b(m);
  for (int j = 0; j < m; ++j) b[j] = b_stream.next_range(1.0, 6.0);

  // Row-major Bernoulli(1/2) fill; the draw order is part of the format.
  RandomStream c_stream(seed, kStreamRouting);
  std::vector<std::vector<int>> routes(n);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < n; ++k)
      if (c_stream.next_unit() < 0.5) routes[k].push_back(j);

  RandomStream repair(seed, kStreamRepair);
  for (int k = 0; k < n; ++k)
    if (routes[k].empty())
      routes[k].push_back(static_cast<int>(repair.next_index(m)));

  return NetworkProblem(m, n, std::move(routes), std::move(b));
}

UtilitySpec make_quadratic_utilities(int n, std::uint64_t seed) {
  if (n <= 0) fail(Errc::kValidation, "n must be positive");
  RandomStream stream(seed, kStreamUtilities);
  UtilitySpec spec;
  spec.family = UtilityFamily::kQuadratic;
  spec.sigma = 0.1;
  spec.a.resize(n);
  // 100 * (1 - u) with u in [0,1) lands in (0, 100]: zero is excluded.
  for (int k = 0; k < n; ++k) spec.a[k] = 100.0 * (1.0 - stream.next_unit());
  return spec;
}

UtilitySpec make_log_utilities(const NetworkProblem& problem) {
  UtilitySpec spec;
  spec.family = UtilityFamily::kLogarithmic;
  spec.x_lo = 1e-6;
  spec.x_hi = *std::max_element(problem.b().begin(), problem.b().end());
  return spec;
}

namespace {

json utilities_to_json(const UtilitySpec& u) {
  json out;
  if (u.family == UtilityFamily::kQuadratic) {
    out["variant"] = "quadratic";
    out["a"] = u.a;
    out["sigma"] = u.sigma;
  } else {
    out["variant"] = "log";
    out["x_lo"] = u.x_lo;
    out["x_hi"] = u.x_hi;
  }
  return out;
}

const json& require_field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) {
    fail(Errc::kParse, std::string("problem file: missing field '") + name + "'");
  }
  return *it;
}

UtilitySpec utilities_from_json(const json& obj) {
  UtilitySpec u;
  const std::string variant = require_field(obj, "variant").get<std::string>();
  if (variant == "quadratic") {
    u.family = UtilityFamily::kQuadratic;
    u.a = require_field(obj, "a").get<Vec>();
    u.sigma = require_field(obj, "sigma").get<double>();
  } else if (variant == "log") {
    u.family = UtilityFamily::kLogarithmic;
    u.x_lo = require_field(obj, "x_lo").get<double>();
    u.x_hi = require_field(obj, "x_hi").get<double>();
  } else {
    fail(Errc::kParse, "problem file: unknown utility variant '" + variant + "'");
  }
  return u;
}

}  // namespace

std::string problem_to_json_string(const NetworkProblem& p) {
  json out;
  out["m"] = p.m();
  out["n"] = p.n();
  out["b"] = p.b();
  // Small matrices ship as dense 0/1 rows, large ones as COO pairs.
  if (static_cast<long long>(p.m()) * p.n() <= 4096) {
    out["C"] = {{"format", "dense"}, {"data", p.dense_rows()}};
  } else {
    std::vector<std::array<int, 2>> entries;
    entries.reserve(static_cast<std::size_t>(p.nnz()));
    for (int j = 0; j < p.m(); ++j)
      for (int k : p.users_of(j)) entries.push_back({j, k});
    out["C"] = {{"format", "coo"}, {"data", entries}};
  }
  if (p.utilities()) out["utilities"] = utilities_to_json(*p.utilities());
  return out.dump(2);
}

NetworkProblem problem_from_json_string(const std::string& text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::kParse, std::string("problem file: ") + e.what());
  }
  try {
    const int m = require_field(obj, "m").get<int>();
    const int n = require_field(obj, "n").get<int>();
    Vec b = require_field(obj, "b").get<Vec>();
    const json& c = require_field(obj, "C");
    const std::string format = require_field(c, "format").get<std::string>();
    std::vector<std::vector<int>> routes(std::max(n, 0));
    if (format == "dense") {
      const auto rows = require_field(c, "data")
                            .get<std::vector<std::vector<int>>>();
      if (static_cast<int>(rows.size()) != m)
        fail(Errc::kParse, "problem file: C.data must have m rows");
      for (int j = 0; j < m; ++j) {
        if (static_cast<int>(rows[j].size()) != n)
          fail(Errc::kParse, "problem file: C.data must have n columns");
        for (int k = 0; k < n; ++k) {
          if (rows[j][k] != 0 && rows[j][k] != 1)
            fail(Errc::kParse, "problem file: C entries must be 0 or 1");
          if (rows[j][k] == 1) routes[k].push_back(j);
        }
      }
    } else if (format == "coo") {
      const auto entries = require_field(c, "data")
                               .get<std::vector<std::array<int, 2>>>();
      for (const auto& e : entries) {
        if (e[1] < 0 || e[1] >= n)
          fail(Errc::kParse, "problem file: C entry column out of range");
        routes[e[1]].push_back(e[0]);
      }
    } else {
      fail(Errc::kParse, "problem file: unknown C format '" + format + "'");
    }
    NetworkProblem problem(m, n, std::move(routes), std::move(b));
    if (obj.contains("utilities") && !obj["utilities"].is_null())
      problem.set_utilities(utilities_from_json(obj["utilities"]));
    return problem;
  } catch (const json::exception& e) {
    fail(Errc::kParse, std::string("problem file: ") + e.what());
  }
}

void save_problem(const NetworkProblem& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::kIo, "cannot open '" + path + "' for writing");
  out << problem_to_json_string(problem) << '\n';
  if (!out) fail(Errc::kIo, "write to '" + path + "' failed");
}

NetworkProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::kIo, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return problem_from_json_string(buffer.str());
}

}  // namespace numdual
