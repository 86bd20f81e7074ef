#include "numdual/distributed.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"
#include "numdual/rng.hpp"
#include "solver_util.hpp"

namespace numdual {

namespace {

// The runner below plays the synchronous round structure: per tick it invokes
// link compute phases, delivers price updates, invokes user responses and
// delivers rate reports, always in ascending (link, user) order so that every
// reduction accumulates in the same order as the centralized solver.  Global
// per-tick facts (tick number, schedule coefficients, whether the drawn user
// is new) are round metadata shared with every actor; they are not messages.

struct LinkActor {
  double b = 0.0;
  double lambda = 0.0;
  // FGM state.
  double lambda0 = 0.0;
  double load = 0.0;
  double g_acc = 0.0;
  double y = 0.0;
  double z = 0.0;
  // SGM state.
  double lambda_sum = 0.0;
  double report_value = 0.0;
  bool report_seen = false;
  // RGEM state.
  double s_cur = 0.0;
  double s_prev = 0.0;
  double lambda_bar = 0.0;
  std::vector<double> x_old;  // per incident user, users_of(j) order
};

struct UserActor {
  double price = 0.0;
  double x = 0.0;
  double x_weighted = 0.0;       // FGM primal average numerator
  double x_acc = 0.0;            // SGM one-sample average numerator
  std::vector<double> local_price;  // RGEM, links_of(k) order
  bool drawn = false;
};

class Runner {
 public:
  Runner(const NetworkProblem& p, const MessageHook& hook)
      : p_(p), hook_(hook) {
    links_.resize(p.m());
    users_.resize(p.n());
    for (int j = 0; j < p.m(); ++j) {
      links_[j].b = p.b()[j];
      links_[j].x_old.assign(p.users_of(j).size(), 0.0);
    }
    for (int k = 0; k < p.n(); ++k)
      users_[k].local_price.assign(p.links_of(k).size(), 0.0);
  }

  void send_price(int j, int k, long long tick) {
    deliver({MessageKind::kPriceUpdate, {true, j}, {false, k},
             links_[j].lambda, tick});
  }

  void deliver(const Message& msg) {
    ++count_;
    if (hook_) hook_(msg);
    if (msg.kind == MessageKind::kPriceUpdate) {
      users_[msg.to.index].price += msg.payload;
    } else {
      LinkActor& link = links_[msg.to.index];
      link.load += msg.payload;
      link.report_value = msg.payload;
      link.report_seen = true;
    }
  }

  Vec lambdas() const {
    Vec out(links_.size());
    for (std::size_t j = 0; j < links_.size(); ++j) out[j] = links_[j].lambda;
    return out;
  }

  const NetworkProblem& p_;
  const MessageHook& hook_;
  std::vector<LinkActor> links_;
  std::vector<UserActor> users_;
  long long count_ = 0;
};

DistributedResult run_fgm(const NetworkProblem& p, const SolverConfig& config,
                          const MessageHook& hook) {
  const internal::Stopwatch clock;
  Runner sim(p, hook);
  const int m = p.m(), n = p.n();

  SolverReport report;
  report.method = Method::kFgm;
  report.config = config;
  report.constants = oracle_constants(p);
  if (!report.constants.L)
    fail(Errc::kUnsupported, "fgm needs a smooth dual (quadratic utilities)");
  const double L = *report.constants.L;
  report.theoretical_n = theoretical_iterations(Method::kFgm, p, config);
  const long long N = std::min(config.max_iter, report.theoretical_n);
  const long long every = internal::resolve_record_every(config, N);

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
    for (int j = 0; j < m; ++j) {
      sim.links_[j].lambda = config.lambda0[j];
      sim.links_[j].lambda0 = config.lambda0[j];
    }
  }

  // One price/respond round: users rebuild best responses from the current
  // prices (weighted into the running primal average with weight alpha) and
  // links re-accumulate their loads from the reports.
  const auto exchange = [&](long long tick, double alpha) {
    for (auto& user : sim.users_) user.price = 0.0;
    for (int j = 0; j < m; ++j)
      for (int k : p.users_of(j)) sim.send_price(j, k, tick);
    for (int k = 0; k < n; ++k) {
      UserActor& user = sim.users_[k];
      user.x = best_response(p, k, user.price);
      user.x_weighted += alpha * user.x;
      report.loop_user_evals += 1;
    }
    // Reports arrive per link in ascending user order and accumulate in
    // exactly that order, matching the centralized link_loads reduction.
    for (auto& link : sim.links_) link.load = 0.0;
    for (int j = 0; j < m; ++j)
      for (int k : p.users_of(j))
        sim.deliver({MessageKind::kRateReport, {false, k}, {true, j},
                     sim.users_[k].x, tick});
  };

  const auto record_row = [&](long long t) {
    Vec y(m), x_hat(n);
    const double big_a = fgm_coefficients(t).big_a;
    for (int j = 0; j < m; ++j) {
      const double g = sim.links_[j].b - sim.links_[j].load;
      y[j] = internal::fgm_y_component(sim.links_[j].lambda, g, L);
    }
    for (int k = 0; k < n; ++k) x_hat[k] = sim.users_[k].x_weighted / big_a;
    HistoryRow row;
    row.iter = t;
    row.phi = dual_value(p, DualPoint{y});
    row.feas = feasibility_violation(p, PrimalPoint{x_hat});
    row.gap = row.phi - total_utility(p, PrimalPoint{x_hat});
    row.elapsed_ms = clock.ms();
    report.history.push_back(row);
  };

  // Bootstrap: prices of lambda^0 go out, x^0 comes back.
  exchange(0, fgm_coefficients(0).alpha);
  if (config.record_duals && internal::record_due(0, every, N))
    report.dual_trace.emplace_back(0, sim.lambdas());
  if (internal::record_due(0, every, N)) record_row(0);

  for (long long t = 0; t < N; ++t) {
    const FgmCoefficients coef = fgm_coefficients(t);
    for (int j = 0; j < m; ++j) {
      LinkActor& link = sim.links_[j];
      const double g = link.b - link.load;
      link.g_acc += coef.alpha * g;
      link.y = internal::fgm_y_component(link.lambda, g, L);
      link.z = internal::fgm_z_component(link.lambda0, link.g_acc, L);
      link.lambda = internal::fgm_mix(coef.tau, link.z, link.y);
    }
    exchange(t + 1, fgm_coefficients(t + 1).alpha);
    if (config.record_duals && internal::record_due(t + 1, every, N))
      report.dual_trace.emplace_back(t + 1, sim.lambdas());
    if (internal::record_due(t + 1, every, N)) record_row(t + 1);
  }

  report.iterations = N;
  report.lambda = DualPoint{sim.lambdas()};
  const double big_a = fgm_coefficients(N).big_a;
  report.x_hat.x.resize(n);
  for (int k = 0; k < n; ++k)
    report.x_hat.x[k] = sim.users_[k].x_weighted / big_a;
  report.wall_ms = clock.ms();
  return {std::move(report), sim.count_};
}

DistributedResult run_sgm(const NetworkProblem& p, const SolverConfig& config,
                          Method method, const MessageHook& hook) {
  const internal::Stopwatch clock;
  Runner sim(p, hook);
  const int m = p.m(), n = p.n();

  SolverReport report;
  report.method = method;
  report.config = config;
  report.constants = oracle_constants(p);
  report.theoretical_n = theoretical_iterations(method, p, config);
  const long long N = config.max_iter;
  const long long every = internal::resolve_record_every(config, N);
  const double M = internal::effective_m(report.constants, config);
  const double beta = config.R / (M * std::sqrt(static_cast<double>(N)));
  const double n_d = static_cast<double>(n);

  RandomStream draw(config.seed);
  if (config.record_duals) report.dual_trace.emplace_back(0, sim.lambdas());

  for (long long t = 0; t < N; ++t) {
    const int xi = static_cast<int>(draw.next_index(n));
    for (auto& link : sim.links_) {
      link.lambda_sum += link.lambda;
      link.report_seen = false;
    }
    // Only the drawn user's links talk this tick: prices in, one rate out.
    sim.users_[xi].price = 0.0;
    for (int j : p.links_of(xi)) sim.send_price(j, xi, t);
    UserActor& user = sim.users_[xi];
    user.x = best_response(p, xi, user.price);
    user.x_acc += n_d * user.x;
    report.loop_user_evals += 1;
    for (int j : p.links_of(xi))
      sim.deliver({MessageKind::kRateReport, {false, xi}, {true, j}, user.x, t});
    // Every link steps; the ones that heard nothing use their local b_j only.
    for (int j = 0; j < m; ++j) {
      LinkActor& link = sim.links_[j];
      const double drift =
          link.report_seen ? link.b - n_d * link.report_value : link.b;
      link.lambda = internal::sgm_step(link.lambda, beta, drift);
    }

    const long long done = t + 1;
    if (config.record_duals && internal::record_due(done, every, N))
      report.dual_trace.emplace_back(done, sim.lambdas());
    if (internal::record_due(done, every, N)) {
      const double inv = 1.0 / static_cast<double>(done);
      DualPoint lam_avg;
      lam_avg.lambda.resize(m);
      for (int j = 0; j < m; ++j)
        lam_avg.lambda[j] = sim.links_[j].lambda_sum * inv;
      PrimalPoint x_hat;
      x_hat.x.resize(n);
      for (int k = 0; k < n; ++k) x_hat.x[k] = sim.users_[k].x_acc * inv;
      HistoryRow row;
      row.iter = done;
      row.phi = dual_value(p, lam_avg);
      row.feas = feasibility_violation(p, x_hat);
      const double util = total_utility(p, x_hat);
      if (std::isfinite(util)) row.gap = row.phi - util;
      row.elapsed_ms = clock.ms();
      report.history.push_back(row);
    }
  }

  report.iterations = N;
  const double inv = 1.0 / static_cast<double>(N);
  report.lambda.lambda.resize(m);
  for (int j = 0; j < m; ++j)
    report.lambda.lambda[j] = sim.links_[j].lambda_sum * inv;
  report.x_hat.x.resize(n);
  for (int k = 0; k < n; ++k) report.x_hat.x[k] = sim.users_[k].x_acc * inv;
  report.wall_ms = clock.ms();
  return {std::move(report), sim.count_};
}

DistributedResult run_rgem(const NetworkProblem& p, const SolverConfig& config,
                           const MessageHook& hook) {
  const internal::Stopwatch clock;
  Runner sim(p, hook);
  const int m = p.m(), n = p.n();

  SolverReport report;
  report.method = Method::kRgem;
  report.config = config;
  report.constants = oracle_constants(p);
  if (!report.constants.L)
    fail(Errc::kUnsupported, "rgem needs a smooth dual (quadratic utilities)");
  report.theoretical_n = theoretical_iterations(Method::kRgem, p, config);
  const long long N = std::min(config.max_iter, report.theoretical_n);
  const long long every = internal::resolve_record_every(config, N);
  const double delta = tikhonov_delta(config.eps, config.R);
  const RgemParameters prm = rgem_parameters(n, *report.constants.L, delta);
  const double n_d = static_cast<double>(n);

  RandomStream draw(config.seed);
  double avg_ratio = 0.0;

  for (long long t = 1; t <= N; ++t) {
    // Link-local price update from the two running sums.
    avg_ratio = 1.0 + prm.alpha_bar * avg_ratio;
    const double w = 1.0 / avg_ratio;
    for (auto& link : sim.links_) {
      const double sy =
          internal::rgem_extrapolated_sum(link.s_cur, link.s_prev, prm.alpha);
      link.lambda = internal::rgem_price(prm.eta, link.lambda, sy, n_d, delta);
      link.lambda_bar = internal::running_avg(link.lambda_bar, w, link.lambda);
      link.report_seen = false;
    }

    const int k = static_cast<int>(draw.next_index(n));
    UserActor& user = sim.users_[k];
    const bool first_draw = !user.drawn;  // round metadata for every link
    user.drawn = true;
    user.price = 0.0;
    const auto& route = p.links_of(k);
    // Prices arrive ascending by link; smoothing happens user-side.
    for (std::size_t i = 0; i < route.size(); ++i) {
      user.price = 0.0;
      sim.send_price(route[i], k, t);
      const double arrived = user.price;
      user.local_price[i] =
          internal::rgem_local_price(arrived, prm.tau, user.local_price[i]);
    }
    double price = 0.0;
    for (double lp : user.local_price) price += lp;
    user.x = best_response(p, k, price);
    report.loop_user_evals += 1;
    for (int j : route)
      sim.deliver({MessageKind::kRateReport, {false, k}, {true, j}, user.x, t});

    for (int j = 0; j < m; ++j) {
      LinkActor& link = sim.links_[j];
      link.s_prev = link.s_cur;
      if (first_draw) link.s_cur += link.b;
      if (link.report_seen) {
        const auto& residents = p.users_of(j);
        const std::size_t pos = static_cast<std::size_t>(
            std::lower_bound(residents.begin(), residents.end(), k) -
            residents.begin());
        if (first_draw) {
          link.s_cur -= n_d * link.report_value;
        } else {
          link.s_cur -= n_d * (link.report_value - link.x_old[pos]);
        }
        link.x_old[pos] = link.report_value;
      }
    }

    if (config.record_duals && internal::record_due(t, every, N))
      report.dual_trace.emplace_back(t, sim.lambdas());
    if (internal::record_due(t, every, N)) {
      DualPoint bar;
      bar.lambda.resize(m);
      for (int j = 0; j < m; ++j) bar.lambda[j] = sim.links_[j].lambda_bar;
      const PrimalPoint x_bar = primal_response(p, bar);
      HistoryRow row;
      row.iter = t;
      row.phi = dual_value(p, bar);
      row.feas = feasibility_violation(p, x_bar);
      row.gap = row.phi - total_utility(p, x_bar);
      row.elapsed_ms = clock.ms();
      report.history.push_back(row);
    }
  }

  report.iterations = N;
  report.lambda.lambda.resize(m);
  for (int j = 0; j < m; ++j) report.lambda.lambda[j] = sim.links_[j].lambda_bar;
  report.x_hat = primal_response(p, report.lambda);
  report.wall_ms = clock.ms();
  return {std::move(report), sim.count_};
}

}  // namespace

DistributedResult run_distributed(const NetworkProblem& p, Method method,
                                  const SolverConfig& config,
                                  const MessageHook& hook) {
  internal::validate_config(config);
  DistributedResult result = [&] {
    switch (method) {
      case Method::kFgm:
        return run_fgm(p, config, hook);
      case Method::kSgm1:
      case Method::kSgm2:
        return run_sgm(p, config, method, hook);
      case Method::kRgem:
        return run_rgem(p, config, hook);
      case Method::kEllipsoid:
        fail(Errc::kUnsupported,
             "the ellipsoid method needs a central coordinator");
    }
    fail(Errc::kInternal, "unknown method");
  }();
  result.report.message_count = result.message_count;
  return result;
}

double compare_traces(const SolverReport& a, const SolverReport& b) {
  if (a.dual_trace.empty() || b.dual_trace.empty())
    fail(Errc::kInvalidArgument,
         "compare_traces needs record_duals on both runs");
  double worst = 0.0;
  std::size_t ia = 0, ib = 0;
  long long common = 0;
  while (ia < a.dual_trace.size() && ib < b.dual_trace.size()) {
    const long long ta = a.dual_trace[ia].first;
    const long long tb = b.dual_trace[ib].first;
    if (ta < tb) {
      ++ia;
    } else if (tb < ta) {
      ++ib;
    } else {
      const Vec& va = a.dual_trace[ia].second;
      const Vec& vb = b.dual_trace[ib].second;
      if (va.size() != vb.size())
        fail(Errc::kInvalidArgument, "compare_traces: dimension mismatch");
      for (std::size_t j = 0; j < va.size(); ++j)
        worst = std::max(worst, std::fabs(va[j] - vb[j]));
      ++common;
      ++ia;
      ++ib;
    }
  }
  if (common == 0)
    fail(Errc::kInvalidArgument, "compare_traces: no common iterations");
  return worst;
}

}  // namespace numdual
