#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "numdual/solvers.hpp"
#include "solver_util.hpp"

namespace numdual {

namespace {

Vec to_row_major(const Eigen::MatrixXd& mat) {
  Vec out(static_cast<std::size_t>(mat.rows()) * mat.cols());
  for (int r = 0; r < mat.rows(); ++r)
    for (int c = 0; c < mat.cols(); ++c)
      out[static_cast<std::size_t>(r) * mat.cols() + c] = mat(r, c);
  return out;
}

Eigen::MatrixXd from_row_major(const Vec& data, int m) {
  Eigen::MatrixXd mat(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c)
      mat(r, c) = data[static_cast<std::size_t>(r) * m + c];
  return mat;
}

}  // namespace

// Ellipsoid method over the ball-intersected domain
// Lambda = { lambda >= 0, ||lambda||_2 <= 2R }, tracking the affine map
// E_t = { lambda^t + B_t u : ||u|| <= 1 } that localizes the dual optimum.
// Inside the domain the cut is grad phi; outside it is a separating vector
// (the update then shrinks towards the domain, and the iteration is left out
// of the certificate index set I_N).
EllipsoidResult solve_ellipsoid(const NetworkProblem& p,
                                const SolverConfig& config) {
  internal::validate_config(config);
  const internal::Stopwatch clock;

  EllipsoidResult result;
  SolverReport& report = result.report;
  report.method = Method::kEllipsoid;
  report.config = config;
  report.constants = oracle_constants(p);
  report.theoretical_n = theoretical_iterations(Method::kEllipsoid, p, config);

  const int m = p.m(), n = p.n();
  const long long N = std::min(config.max_iter, report.theoretical_n);
  const long long every = internal::resolve_record_every(config, N);
  const double radius = 2.0 * config.R;
  const double m_d = static_cast<double>(m);
  // Orthogonal-complement scale of the rank-one update; in one dimension
  // there are no orthogonal directions and the factor is irrelevant.
  const double f_orth = m > 1 ? m_d / std::sqrt(m_d * m_d - 1.0) : 0.0;
  const double f_cut = m_d / (m_d + 1.0);

  EllipsoidTrace& trace = result.trace;
  trace.m = m;
  trace.radius = radius;
  trace.steps.reserve(static_cast<std::size_t>(std::min<long long>(N, 1 << 20)));

  Eigen::MatrixXd B = radius * Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);

  // Best dual value seen, used as the report's dual output.
  double best_phi = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_lambda = lambda;
  bool have_best = false;

  long long done = 0;
  for (long long t = 0; t < N; ++t) {
    const double norm = lambda.norm();
    bool nonneg = true;
    int most_negative = -1;
    double lowest = 0.0;
    for (int j = 0; j < m; ++j) {
      if (lambda(j) < lowest) {
        lowest = lambda(j);
        most_negative = j;
        nonneg = false;
      }
    }
    const bool feasible = nonneg && norm <= radius;
    const bool interior = nonneg && norm < radius &&
                          [&] {
                            for (int j = 0; j < m; ++j)
                              if (!(lambda(j) > 0.0)) return false;
                            return true;
                          }();

    Eigen::VectorXd g(m);
    bool zero_gradient = false;
    if (feasible) {
      DualPoint point{Vec(lambda.data(), lambda.data() + m)};
      const Vec grad = dual_gradient(p, point);
      report.loop_user_evals += n;
      for (int j = 0; j < m; ++j) g(j) = grad[j];
      zero_gradient = g.norm() == 0.0;

      const double phi = dual_value(p, point);
      if (!have_best || phi < best_phi) {
        best_phi = phi;
        best_lambda = lambda;
        have_best = true;
      }
      if (internal::record_due(t, every, N - 1)) {
        const PrimalPoint x_t = primal_response(p, point);
        HistoryRow row;
        row.iter = t;
        row.phi = phi;
        row.feas = feasibility_violation(p, x_t);
        const double util = total_utility(p, x_t);
        if (std::isfinite(util)) row.gap = phi - util;
        row.elapsed_ms = clock.ms();
        report.history.push_back(row);
      }
    } else if (!nonneg) {
      g.setZero();
      g(most_negative) = -1.0;  // separates { lambda_j >= 0 }
    } else {
      g = lambda / norm;  // separates { ||lambda|| <= 2R }
    }

    if (config.record_duals && internal::record_due(t, every, N - 1))
      report.dual_trace.emplace_back(t, Vec(lambda.data(), lambda.data() + m));

    EllipsoidStep step;
    step.lambda = Vec(lambda.data(), lambda.data() + m);
    step.g = Vec(g.data(), g.data() + m);
    step.b_matrix = to_row_major(B);
    step.in_domain = interior;
    trace.steps.push_back(std::move(step));
    done = t + 1;

    if (zero_gradient) {
      report.exact_optimum = true;
      report.early_exited = true;
      break;
    }

    Eigen::VectorXd q = B.transpose() * g;
    const double q_norm = q.norm();
    if (q_norm == 0.0) {
      // B has no extent left along g at double precision: the localizer is
      // exhausted and the next center is undefined.  Stop with what we have.
      report.localization_exhausted = true;
      report.early_exited = true;
      break;
    }
    const Eigen::VectorXd p_dir = q / q_norm;
    const Eigen::VectorXd bp = B * p_dir;
    lambda -= bp / (m_d + 1.0);
    B = f_orth * B + (f_cut - f_orth) * bp * p_dir.transpose();
  }

  trace.final_b = to_row_major(B);
  trace.final_lambda = Vec(lambda.data(), lambda.data() + m);

  report.iterations = done;
  if (!have_best) best_lambda = Eigen::VectorXd::Zero(m);
  report.lambda = DualPoint{Vec(best_lambda.data(), best_lambda.data() + m)};
  report.x_hat = primal_response(p, report.lambda);
  report.wall_ms = clock.ms();
  return result;
}

// Accuracy certificate: nonnegative weights xi_t over the in-domain
// iterations, built by decomposing a deep-cut direction pair derived from
// the final ellipsoid's thinnest axis.
CertificateWeights build_certificate(const EllipsoidTrace& trace) {
  const int m = trace.m;
  const std::size_t total = trace.steps.size();
  if (total == 0) fail(Errc::kDegenerate, "certificate needs a nonempty trace");

  const EllipsoidStep& last = trace.steps.back();
  double last_g_norm = 0.0;
  for (double v : last.g) last_g_norm += v * v;
  if (last_g_norm == 0.0) {
    // Exact optimum found: all weight on the final iteration.
    CertificateWeights w;
    w.iter.push_back(static_cast<long long>(total) - 1);
    w.xi.push_back(1.0);
    return w;
  }

  bool any_in_domain = false;
  for (const auto& step : trace.steps) any_in_domain |= step.in_domain;
  if (!any_in_domain)
    fail(Errc::kDegenerate, "certificate needs at least one in-domain iteration");

  Eigen::MatrixXd b_final = from_row_major(trace.final_b, m);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b_final, Eigen::ComputeFullU);
  const Eigen::VectorXd& sv = svd.singularValues();
  int smallest = 0;
  for (int i = 1; i < m; ++i)
    if (sv(i) < sv(smallest)) smallest = i;
  if (sv(smallest) <= 0.0)
    fail(Errc::kDegenerate, "certificate: final ellipsoid is rank-deficient");
  const Eigen::VectorXd h = svd.matrixU().col(smallest) / (2.0 * sv(smallest));

  Eigen::VectorXd g_nu = h;
  Eigen::VectorXd g_mu = -h;
  Vec nu(total, 0.0), mu(total, 0.0);
  // Unwind the rank-one update chain last-to-first: B_{t+1} differs from B_t
  // only along B_t B_t^T g_t, so peeling in reverse removes exactly the
  // component each cut contributed to the final geometry and the residual
  // telescopes to ~0.  Forward order would dump the weight on the earliest
  // (far-from-optimal) iterates and void the recovery guarantee.
  for (std::size_t t = total; t-- > 0;) {
    const Eigen::MatrixXd b_t = from_row_major(trace.steps[t].b_matrix, m);
    Eigen::VectorXd g_t(m);
    for (int j = 0; j < m; ++j) g_t(j) = trace.steps[t].g[j];
    const Eigen::VectorXd q = b_t.transpose() * g_t;
    const double q_sq = q.squaredNorm();
    if (q_sq == 0.0) continue;
    const Eigen::VectorXd btq = b_t * q;
    nu[t] = std::max(0.0, g_nu.dot(btq)) / q_sq;
    g_nu -= nu[t] * g_t;
    mu[t] = std::max(0.0, g_mu.dot(btq)) / q_sq;
    g_mu -= mu[t] * g_t;
  }

  double norm = 0.0;
  for (std::size_t t = 0; t < total; ++t)
    if (trace.steps[t].in_domain) norm += nu[t] + mu[t];
  if (!(norm > 0.0))
    fail(Errc::kDegenerate, "degenerate certificate: in-domain weights vanish");

  CertificateWeights w;
  for (std::size_t t = 0; t < total; ++t) {
    if (!trace.steps[t].in_domain) continue;
    w.iter.push_back(static_cast<long long>(t));
    w.xi.push_back((nu[t] + mu[t]) / norm);
  }
  return w;
}

PrimalPoint recover_primal_from_certificate(const NetworkProblem& p,
                                            const EllipsoidTrace& trace,
                                            const CertificateWeights& weights) {
  if (weights.iter.size() != weights.xi.size())
    fail(Errc::kInvalidArgument, "certificate weights malformed");
  if (weights.iter.empty())
    fail(Errc::kInvalidArgument, "certificate weights empty");
  PrimalPoint x_hat;
  x_hat.x.assign(p.n(), 0.0);
  for (std::size_t i = 0; i < weights.iter.size(); ++i) {
    const long long t = weights.iter[i];
    if (t < 0 || t >= static_cast<long long>(trace.steps.size()))
      fail(Errc::kInvalidArgument, "certificate references unknown iteration");
    if (weights.xi[i] < 0.0)
      fail(Errc::kInvalidArgument, "certificate weights must be nonnegative");
    const PrimalPoint x_t =
        primal_response(p, DualPoint{trace.steps[t].lambda});
    for (int k = 0; k < p.n(); ++k) x_hat.x[k] += weights.xi[i] * x_t.x[k];
  }
  return x_hat;
}

SolverReport certify_solve(const NetworkProblem& p, const SolverConfig& config) {
  EllipsoidResult result = solve_ellipsoid(p, config);
  const CertificateWeights weights = build_certificate(result.trace);
  result.report.x_hat =
      recover_primal_from_certificate(p, result.trace, weights);
  result.report.certificate = weights;
  return result.report;
}

}  // namespace numdual
