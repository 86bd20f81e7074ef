#include <algorithm>
#include <cmath>

#include "kernels.hpp"
#include "numdual/solvers.hpp"
#include "solver_util.hpp"

namespace numdual {

// Primal-dual fast gradient method on the dual problem
//
//   min_{lambda >= 0} phi(lambda),
//
// with the classical three-sequence scheme
//
//   y^t = [lambda^t - (1/L) grad phi(lambda^t)]_+
//   z^t = [lambda^0 - (1/L) sum_{j<=t} alpha_j grad phi(lambda^j)]_+
//   lambda^{t+1} = tau_t z^t + (1 - tau_t) y^t,
//
// and the primal estimate x_hat^t = (1/A_t) sum_{j<=t} alpha_j x(lambda^j)
// maintained incrementally alongside.
SolverReport solve_fgm(const NetworkProblem& p, const SolverConfig& config) {
  internal::validate_config(config);
  const internal::Stopwatch clock;

  SolverReport report;
  report.method = Method::kFgm;
  report.config = config;
  report.constants = oracle_constants(p);
  if (!report.constants.L)
    fail(Errc::kUnsupported, "fgm needs a smooth dual (quadratic utilities)");
  const double L = *report.constants.L;
  const int m = p.m(), n = p.n();

  Vec lambda0(m, 0.0);
  if (!config.lambda0.empty()) {
    if (static_cast<int>(config.lambda0.size()) != m)
      fail(Errc::kValidation, "lambda0 must have one price per link");
    double norm_sq = 0.0;
    for (double v : config.lambda0) {
      if (v < 0.0) fail(Errc::kValidation, "lambda0 must be nonnegative");
      norm_sq += v * v;
    }
    if (std::sqrt(norm_sq) > config.R)
      fail(Errc::kValidation, "lambda0 must satisfy ||lambda0|| <= R");
    lambda0 = config.lambda0;
  }

  report.theoretical_n = theoretical_iterations(Method::kFgm, p, config);
  const long long N = std::min(config.max_iter, report.theoretical_n);
  const long long every = internal::resolve_record_every(config, N);
  const double r_hat = 3.0 * config.R;

  Vec lambda = lambda0;          // lambda^t
  Vec y(m, 0.0);                 // y^t
  Vec z(m, 0.0);                 // z^t
  Vec g_acc(m, 0.0);             // sum_{j<=t} alpha_j grad_j
  Vec x_weighted(n, 0.0);        // sum_{j<=t} alpha_j x^j
  double big_a = 0.0;            // A_t

  long long reached = N;
  for (long long t = 0; t <= N; ++t) {
    const PrimalPoint x_t = primal_response(p, DualPoint{lambda});
    report.loop_user_evals += n;
    Vec g = link_loads(p, x_t);
    for (int j = 0; j < m; ++j) g[j] = p.b()[j] - g[j];

    const FgmCoefficients coef = fgm_coefficients(t);
    for (int k = 0; k < n; ++k) x_weighted[k] += coef.alpha * x_t.x[k];
    big_a = coef.big_a;
    for (int j = 0; j < m; ++j) {
      g_acc[j] += coef.alpha * g[j];
      y[j] = internal::fgm_y_component(lambda[j], g[j], L);
    }

    if (config.record_duals && internal::record_due(t, every, N))
      report.dual_trace.emplace_back(t, lambda);

    if (internal::record_due(t, every, N)) {
      PrimalPoint x_hat;
      x_hat.x.resize(n);
      for (int k = 0; k < n; ++k) x_hat.x[k] = x_weighted[k] / big_a;
      HistoryRow row;
      row.iter = t;
      row.phi = dual_value(p, DualPoint{y});
      row.feas = feasibility_violation(p, x_hat);
      row.gap = row.phi - total_utility(p, x_hat);
      row.elapsed_ms = clock.ms();
      report.history.push_back(row);
      if (config.early_exit && t > 0 && *row.gap <= config.eps &&
          row.feas <= config.eps / r_hat) {
        report.early_exited = true;
        reached = t;
        break;
      }
    }

    if (t == N) break;
    for (int j = 0; j < m; ++j) {
      z[j] = internal::fgm_z_component(lambda0[j], g_acc[j], L);
      lambda[j] = internal::fgm_mix(coef.tau, z[j], y[j]);
    }
  }

  report.iterations = reached;
  report.lambda = DualPoint{lambda};
  report.x_hat.x.resize(n);
  for (int k = 0; k < n; ++k) report.x_hat.x[k] = x_weighted[k] / big_a;
  report.wall_ms = clock.ms();
  return report;
}

}  // namespace numdual
