#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "numdual/metrics.hpp"
#include "numdual/oracle.hpp"
#include "numdual/problem.hpp"
#include "numdual/solvers.hpp"
#include "test_util.hpp"

using namespace numdual;
using numdual::testing::thrown_code;

namespace {

NetworkProblem tiny_quadratic() {
  NetworkProblem p = generate_uniform_network(1, 2, 5.0);
  UtilitySpec u;
  u.a = {10.0, 10.0};
  u.sigma = 0.1;
  p.set_utilities(u);
  return p;
}

NetworkProblem single_user() {
  // m = n = 1, x(lambda) = 5 (10 - lambda), lambda* = 9, L = 5.
  NetworkProblem p = generate_uniform_network(1, 1, 5.0);
  UtilitySpec u;
  u.a = {10.0};
  u.sigma = 0.2;
  p.set_utilities(u);
  return p;
}

SolverConfig rgem_config(double eps, double R, long long max_iter,
                         std::uint64_t seed = 0) {
  SolverConfig c;
  c.eps = eps;
  c.R = R;
  c.seed = seed;
  c.max_iter = max_iter;
  c.record_every = 1;
  return c;
}

double grad_norm(const NetworkProblem& p, const DualPoint& lam, double delta) {
  const Vec g = regularized_gradient(p, lam, delta);
  double s = 0.0;
  for (double v : g) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("tikhonov weight") {
  CHECK(tikhonov_delta(0.8, 1.0) == 0.1);
  CHECK(tikhonov_delta(1.0, 2.0) == 1.0 / 32.0);
  CHECK(thrown_code([] { tikhonov_delta(0.0, 1.0); }) == Errc::kValidation);
  CHECK(thrown_code([] { tikhonov_delta(1.0, -2.0); }) == Errc::kValidation);
}

TEST_CASE("rgem step parameters at analytic points") {
  // L = 0: alpha_bar = 1 - 1/(n + n) = 1/2 for n = 1.
  RgemParameters a = rgem_parameters(1, 0.0, 0.3);
  CHECK(a.alpha_bar == 0.5);
  CHECK(a.alpha == 0.5);
  CHECK(a.eta == 0.3);
  CHECK(a.tau == 1.0);

  // 16 L / delta = 3: alpha_bar = 1 - 1/(1 + 2) = 2/3, eta = 2 delta, tau = 2.
  RgemParameters b = rgem_parameters(1, 3.0, 16.0);
  CHECK(b.alpha_bar == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(b.eta == doctest::Approx(32.0).epsilon(1e-14));
  CHECK(b.tau == doctest::Approx(2.0).epsilon(1e-14));

  CHECK(thrown_code([] { rgem_parameters(0, 1.0, 1.0); }) == Errc::kValidation);
  CHECK(thrown_code([] { rgem_parameters(2, -1.0, 1.0); }) == Errc::kValidation);
  CHECK(thrown_code([] { rgem_parameters(2, 1.0, 0.0); }) == Errc::kValidation);
}

TEST_CASE("rgem step parameters stay in range") {
  for (long long n : {1LL, 2LL, 10LL, 1000LL}) {
    for (double L : {0.0, 1.0, 100.0}) {
      for (double delta : {1e-4, 1.0}) {
        RgemParameters prm = rgem_parameters(n, L, delta);
        CHECK(prm.alpha_bar > 0.0);
        CHECK(prm.alpha_bar < 1.0);
        CHECK(prm.alpha == static_cast<double>(n) * prm.alpha_bar);
        CHECK(prm.eta > 0.0);
        CHECK(prm.tau >= 0.0);
      }
    }
  }
}

TEST_CASE("rgem runs one user evaluation per iteration") {
  NetworkProblem p = tiny_quadratic();
  SolverConfig c = rgem_config(1e-1, 10.0, 200);
  SolverReport rep = solve_rgem(p, c);
  CHECK(rep.iterations == 200);
  CHECK(rep.loop_user_evals == 200);
  REQUIRE(!rep.history.empty());
  CHECK(rep.history.back().iter == 200);
  CHECK(rep.theoretical_n > 200);
}

TEST_CASE("rgem with one user ignores the seed") {
  NetworkProblem p = single_user();
  SolverConfig c1 = rgem_config(1e-1, 10.0, 150, 1);
  SolverConfig c2 = rgem_config(1e-1, 10.0, 150, 2);
  SolverReport r1 = solve_rgem(p, c1);
  SolverReport r2 = solve_rgem(p, c2);
  CHECK(r1.lambda == r2.lambda);
  CHECK(r1.x_hat == r2.x_hat);
  REQUIRE(r1.history.size() == r2.history.size());
  for (std::size_t i = 0; i < r1.history.size(); ++i) {
    CHECK(r1.history[i].phi == r2.history[i].phi);
    CHECK(r1.history[i].gap == r2.history[i].gap);
    CHECK(r1.history[i].feas == r2.history[i].feas);
  }
}

TEST_CASE("rgem is deterministic for a fixed seed") {
  NetworkProblem p = generate_random_network(3, 8, 31);
  p.set_utilities(make_quadratic_utilities(8, 32));
  SolverConfig c = rgem_config(1e-2, 5.0, 400, 9);
  c.record_duals = true;
  SolverReport a = solve_rgem(p, c);
  SolverReport b = solve_rgem(p, c);
  CHECK(a.lambda == b.lambda);
  CHECK(a.x_hat == b.x_hat);
  REQUIRE(a.dual_trace.size() == b.dual_trace.size());
  for (std::size_t i = 0; i < a.dual_trace.size(); ++i)
    CHECK(a.dual_trace[i].second == b.dual_trace[i].second);
}

TEST_CASE("rgem converges to the regularized optimum") {
  NetworkProblem p = single_user();
  SolverConfig c = rgem_config(1e-1, 10.0, 20000);
  c.record_every = 0;
  SolverReport rep = solve_rgem(p, c);
  const double delta = tikhonov_delta(c.eps, c.R);
  // Interior fixed point of grad phi_delta: 5 lambda - 45 + delta lambda = 0.
  const double star = 45.0 / (5.0 + delta);
  CHECK(rep.lambda.lambda[0] == doctest::Approx(star).epsilon(1e-6));
  CHECK(grad_norm(p, rep.lambda, delta) <= 1e-4);
}

TEST_CASE("rgem regularized gradient norm falls with the budget") {
  NetworkProblem p = tiny_quadratic();
  const double eps = 0.5, R = 10.0;
  const double delta = tikhonov_delta(eps, R);
  std::vector<double> medians;
  for (long long budget : {500LL, 2000LL, 8000LL}) {
    std::vector<double> norms;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      SolverConfig c = rgem_config(eps, R, budget, seed);
      c.record_every = 0;
      SolverReport rep = solve_rgem(p, c);
      norms.push_back(grad_norm(p, rep.lambda, delta));
    }
    std::sort(norms.begin(), norms.end());
    medians.push_back(norms[2]);
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

TEST_CASE("rgem accuracy smoke against the exact optimum") {
  NetworkProblem p = tiny_quadratic();
  const double eps = 0.5, R = 10.0;
  double gap_sum = 0.0, feas_sum = 0.0;
  const int trials = 5;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    SolverConfig c = rgem_config(eps, R, 30000, seed);
    c.record_every = 0;
    SolverReport rep = solve_rgem(p, c);
    CHECK(rep.iterations == rep.theoretical_n);
    gap_sum += 48.75 - total_utility(p, rep.x_hat);
    feas_sum += feasibility_violation(p, rep.x_hat);
  }
  CHECK(gap_sum / trials <= 2.0 * eps);
  CHECK(feas_sum / trials <= 2.0 * eps / (2.0 * R));
}

TEST_CASE("rgem early exit") {
  NetworkProblem p = tiny_quadratic();
  SolverConfig c = rgem_config(2.0, 10.0, 1000000);
  c.early_exit = true;
  SolverReport rep = solve_rgem(p, c);
  CHECK(rep.early_exited);
  CHECK(rep.iterations < rep.theoretical_n);
  const HistoryRow& last = rep.history.back();
  REQUIRE(last.gap.has_value());
  CHECK(*last.gap <= c.eps);
  CHECK(last.feas <= c.eps / (2.0 * c.R));
}

TEST_CASE("rgem requires a smooth dual") {
  NetworkProblem p = generate_uniform_network(2, 3, 2.0);
  p.set_utilities(make_log_utilities(p));
  SolverConfig c = rgem_config(1e-2, 1.0, 100);
  CHECK(thrown_code([&] { solve_rgem(p, c); }) == Errc::kUnsupported);
  CHECK(thrown_code([&] { theoretical_iterations(Method::kRgem, p, c); }) ==
        Errc::kUnsupported);
}
