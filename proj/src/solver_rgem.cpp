#include <algorithm>
#include <cmath>

#include "kernels.hpp"
#include "numdual/rng.hpp"
#include "numdual/solvers.hpp"
#include "solver_util.hpp"

namespace numdual {

// Randomized gradient extrapolation on the Tikhonov-regularized dual
// phi_delta = phi + (delta/2)||lambda||^2, delta = eps/(8 R^2).  The dual is
// a finite sum over users, one summand is refreshed per iteration:
//
//   lambda^t   = [eta lambda^{t-1} - (1/n) sum_k ytilde_k^t]_+ / (delta+eta),
//   ytilde^t   = y^{t-1} + alpha (y^{t-1} - y^{t-2})   (componentwise sums),
//   y_{k_t}^t  = b - n C_{k_t} x_{k_t}(lambda_under_{k_t}^t),
//
// with per-user smoothed prices lambda_under updated lazily on the user's
// incident links only.  Rather than storing every y_k, the loop keeps the
// two running sums S^{t-1} = sum_k y_k^{t-1} and S^{t-2}, which differ in a
// single user term, so an iteration costs O(m + deg(k_t)).
// The output iterate is the theta-weighted average lambda_bar over t = 1..N.
SolverReport solve_rgem(const NetworkProblem& p, const SolverConfig& config) {
  internal::validate_config(config);
  const internal::Stopwatch clock;

  SolverReport report;
  report.method = Method::kRgem;
  report.config = config;
  report.constants = oracle_constants(p);
  if (!report.constants.L)
    fail(Errc::kUnsupported, "rgem needs a smooth dual (quadratic utilities)");
  report.theoretical_n = theoretical_iterations(Method::kRgem, p, config);

  const int m = p.m(), n = p.n();
  const long long N = std::min(config.max_iter, report.theoretical_n);
  const long long every = internal::resolve_record_every(config, N);
  const double delta = tikhonov_delta(config.eps, config.R);
  const RgemParameters prm = rgem_parameters(n, *report.constants.L, delta);
  const double n_d = static_cast<double>(n);

  Vec lambda(m, 0.0);
  Vec lambda_bar(m, 0.0);
  double avg_ratio = 0.0;  // T_t / theta_t for the normalized running average

  Vec s_cur(m, 0.0), s_prev(m, 0.0);  // sum_k y_k at t-1 and t-2
  Vec x_last(n, 0.0);                  // most recent response per drawn user
  std::vector<char> drawn(n, 0);
  // Per-user smoothed prices, stored on the user's own links only.
  std::vector<Vec> local_price(n);
  for (int k = 0; k < n; ++k) local_price[k].assign(p.links_of(k).size(), 0.0);

  RandomStream draw(config.seed);

  // The loop body runs tens of millions of times; hoist the per-user response
  // (same arithmetic as best_response, quadratic family guaranteed above) and
  // track the next recording iteration instead of testing divisibility.
  const UtilitySpec& u = p.utilities_checked();
  const double sn = u.sigma * n_d;
  const double* a = u.a.data();
  const double* cap = p.b().data();
  double* __restrict lam = lambda.data();
  double* __restrict bar = lambda_bar.data();
  double* __restrict sc = s_cur.data();
  double* __restrict sp = s_prev.data();
  long long next_due = every;
  long long user_evals = 0;

  for (long long t = 1; t <= N; ++t) {
    // theta_t = alpha_bar^{-t}; keep T_t/theta_t instead, which stays bounded.
    avg_ratio = 1.0 + prm.alpha_bar * avg_ratio;
    const double w = 1.0 / avg_ratio;
    for (int j = 0; j < m; ++j) {
      const double sy = internal::rgem_extrapolated_sum(sc[j], sp[j], prm.alpha);
      lam[j] = internal::rgem_price(prm.eta, lam[j], sy, n_d, delta);
      bar[j] = internal::running_avg(bar[j], w, lam[j]);
      sp[j] = sc[j];
    }

    const int k = static_cast<int>(draw.next_index(n));
    const auto& route = p.links_of(k);
    Vec& lp = local_price[k];
    double price = 0.0;
    for (std::size_t i = 0; i < route.size(); ++i) {
      lp[i] = internal::rgem_local_price(lam[route[i]], prm.tau, lp[i]);
      price += lp[i];
    }
    const double top = a[k] - price;
    const double x_k = top > 0.0 ? top / sn : 0.0;
    user_evals += 1;

    if (!drawn[k]) {
      drawn[k] = 1;
      for (int j = 0; j < m; ++j) sc[j] += cap[j];
      for (int j : route) sc[j] -= n_d * x_k;
    } else {
      for (int j : route) sc[j] -= n_d * (x_k - x_last[k]);
    }
    x_last[k] = x_k;

    const bool due = t == next_due || t == N;
    if (t == next_due) next_due += every;

    if (due && config.record_duals) report.dual_trace.emplace_back(t, lambda);

    if (due) {
      const DualPoint bar{lambda_bar};
      const PrimalPoint x_bar = primal_response(p, bar);
      HistoryRow row;
      row.iter = t;
      row.phi = dual_value(p, bar);
      row.feas = feasibility_violation(p, x_bar);
      row.gap = row.phi - total_utility(p, x_bar);
      row.elapsed_ms = clock.ms();
      report.history.push_back(row);
      if (config.early_exit && *row.gap <= config.eps &&
          row.feas <= config.eps / (2.0 * config.R)) {
        report.early_exited = true;
        report.iterations = t;
        report.lambda = bar;
        report.x_hat = x_bar;
        report.loop_user_evals = user_evals;
        report.wall_ms = clock.ms();
        return report;
      }
    }
  }

  report.loop_user_evals = user_evals;
  report.iterations = N;
  report.lambda = DualPoint{lambda_bar};
  report.x_hat = primal_response(p, report.lambda);
  report.wall_ms = clock.ms();
  return report;
}

}  // namespace numdual
