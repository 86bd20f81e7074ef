#include <algorithm>
#include <cmath>

#include "kernels.hpp"
#include "numdual/rng.hpp"
#include "numdual/solvers.hpp"
#include "solver_util.hpp"

namespace numdual {

// Projected stochastic subgradient method on the dual with primal recovery
// by averaging.  One user xi^t is drawn per step and
//
//   lambda^{t+1} = [lambda^t - beta (b - n C_xi x_xi(lambda^t))]_+,
//   beta = R / (M sqrt(N)).
//
// The dual output is the plain average of lambda^0..lambda^{N-1}.  Variant 1
// averages the full best response x(lambda^t) (n evaluations per step);
// variant 2 averages the one-sample unbiased estimate n x_xi e_xi (a single
// evaluation per step).  Both variants walk the identical dual trajectory
// for the same seed.
SolverReport solve_sgm(const NetworkProblem& p, const SolverConfig& config,
                       int variant) {
  internal::validate_config(config);
  if (variant != 1 && variant != 2)
    fail(Errc::kInvalidArgument, "sgm variant must be 1 or 2");
  const internal::Stopwatch clock;

  SolverReport report;
  report.method = variant == 1 ? Method::kSgm1 : Method::kSgm2;
  report.config = config;
  report.constants = oracle_constants(p);
  report.theoretical_n =
      theoretical_iterations(report.method, p, config);

  const int m = p.m(), n = p.n();
  const long long N = config.max_iter;  // step rule fixes beta from N
  const long long every = internal::resolve_record_every(config, N);
  const double M = internal::effective_m(report.constants, config);
  const double beta = config.R / (M * std::sqrt(static_cast<double>(N)));
  const double n_d = static_cast<double>(n);

  Vec lambda(m, 0.0);
  Vec lambda_sum(m, 0.0);
  Vec x_acc(n, 0.0);  // variant-dependent running primal sum

  RandomStream draw(config.seed);
  if (config.record_duals) report.dual_trace.emplace_back(0, lambda);

  long long done = 0;
  for (long long t = 0; t < N; ++t) {
    const int xi = static_cast<int>(draw.next_index(n));
    double x_val;
    if (variant == 1) {
      const PrimalPoint x_full = primal_response(p, DualPoint{lambda});
      report.loop_user_evals += n;
      for (int k = 0; k < n; ++k) x_acc[k] += x_full.x[k];
      x_val = x_full.x[xi];
    } else {
      x_val = best_response(p, xi, user_price(p, DualPoint{lambda}, xi));
      report.loop_user_evals += 1;
      x_acc[xi] += n_d * x_val;
    }
    for (int j = 0; j < m; ++j) lambda_sum[j] += lambda[j];

    const auto& route = p.links_of(xi);
    std::size_t r = 0;
    for (int j = 0; j < m; ++j) {
      const bool incident = r < route.size() && route[r] == j;
      if (incident) ++r;
      const double drift = incident ? p.b()[j] - n_d * x_val : p.b()[j];
      lambda[j] = internal::sgm_step(lambda[j], beta, drift);
    }
    done = t + 1;

    if (config.record_duals && internal::record_due(done, every, N))
      report.dual_trace.emplace_back(done, lambda);

    if (internal::record_due(done, every, N)) {
      const double inv = 1.0 / static_cast<double>(done);
      DualPoint lam_avg;
      lam_avg.lambda.resize(m);
      for (int j = 0; j < m; ++j) lam_avg.lambda[j] = lambda_sum[j] * inv;
      PrimalPoint x_hat;
      x_hat.x.resize(n);
      for (int k = 0; k < n; ++k) x_hat.x[k] = x_acc[k] * inv;
      HistoryRow row;
      row.iter = done;
      row.phi = dual_value(p, lam_avg);
      row.feas = feasibility_violation(p, x_hat);
      const double util = total_utility(p, x_hat);
      if (std::isfinite(util)) row.gap = row.phi - util;
      row.elapsed_ms = clock.ms();
      report.history.push_back(row);
      if (config.early_exit && row.gap && *row.gap <= config.eps &&
          row.feas <= config.eps / config.R) {
        report.early_exited = true;
        break;
      }
    }
  }

  report.iterations = done;
  const double inv = 1.0 / static_cast<double>(done);
  report.lambda.lambda.resize(m);
  for (int j = 0; j < m; ++j) report.lambda.lambda[j] = lambda_sum[j] * inv;
  report.x_hat.x.resize(n);
  for (int k = 0; k < n; ++k) report.x_hat.x[k] = x_acc[k] * inv;
  report.wall_ms = clock.ms();
  return report;
}

}  // namespace numdual
