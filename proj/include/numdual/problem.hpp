#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "numdual/error.hpp"

namespace numdual {

using Vec = std::vector<double>;

// Concave utility attached to every user.
//
// Quadratic:   u_k(x) = a_k x - (sigma * n / 2) x^2   (strongly concave,
//              modulus mu = sigma * n, so the dual is smooth).
// Logarithmic: u_k(x) = ln x, evaluated on a compact box
//              Q_k = [x_lo, x_hi] to keep best responses bounded.
enum class UtilityFamily { kQuadratic, kLogarithmic };

struct UtilitySpec {
  UtilityFamily family = UtilityFamily::kQuadratic;

  // Quadratic parameters.
  Vec a;               // linear coefficients, one per user, all > 0
  double sigma = 0.1;  // curvature scale, > 0

  // Logarithmic clipping box, 0 < x_lo < x_hi.
  double x_lo = 1e-6;
  double x_hi = 1.0;

  bool operator==(const UtilitySpec&) const = default;
};

// Capacitated network shared by n users over m links.
//
// The routing matrix C is {0,1}-valued with C_k^j = 1 iff user k's traffic
// traverses link j.  It is stored sparsely both ways: links_of(k) is column k
// (the route of user k) and users_of(j) is row j (who loads link j); both are
// sorted ascending, which fixes the summation order of every reduction.
class NetworkProblem {
 public:
  // routes[k] lists the links used by user k (any order, duplicates rejected).
  NetworkProblem(int m, int n, std::vector<std::vector<int>> routes, Vec b);

  int m() const { return m_; }
  int n() const { return n_; }
  const Vec& b() const { return b_; }

  const std::vector<int>& links_of(int k) const;  // column k, ascending
  const std::vector<int>& users_of(int j) const;  // row j, ascending
  int degree(int k) const { return static_cast<int>(links_of(k).size()); }
  long long nnz() const;

  const std::optional<UtilitySpec>& utilities() const { return utilities_; }
  const UtilitySpec& utilities_checked() const;  // throws if unset
  void set_utilities(UtilitySpec spec);           // validates against n

  // Dense {0,1} rows, mostly for tests and small instances.
  std::vector<std::vector<int>> dense_rows() const;

  bool operator==(const NetworkProblem&) const = default;

 private:
  int m_ = 0;
  int n_ = 0;
  Vec b_;
  std::vector<std::vector<int>> cols_;  // per user: sorted link ids
  std::vector<std::vector<int>> rows_;  // per link: sorted user ids
  std::optional<UtilitySpec> utilities_;
};

// All-ones routing matrix (every user crosses every link), b_j = b_value.
NetworkProblem generate_uniform_network(int m, int n, double b_value);

// b_j ~ U[1,6), C entries i.i.d. Bernoulli(1/2); any all-zero column is
// repaired by setting one uniformly chosen entry to 1.
NetworkProblem generate_random_network(int m, int n, std::uint64_t seed);

// Quadratic utilities with a_k i.i.d. uniform on (0, 100], sigma = 0.1.
UtilitySpec make_quadratic_utilities(int n, std::uint64_t seed);

// Logarithmic utilities with the default box x_lo = 1e-6, x_hi = max_j b_j.
UtilitySpec make_log_utilities(const NetworkProblem& problem);

// JSON persistence.  Doubles are written as decimal text that parses back to
// the identical bit pattern, so save -> load is exact.
void save_problem(const NetworkProblem& problem, const std::string& path);
NetworkProblem load_problem(const std::string& path);
std::string problem_to_json_string(const NetworkProblem& problem);
NetworkProblem problem_from_json_string(const std::string& text);

}  // namespace numdual
