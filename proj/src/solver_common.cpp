#include <algorithm>
#include <cmath>

#include "numdual/solvers.hpp"
#include "solver_util.hpp"

namespace numdual {

std::string method_name(Method method) {
  switch (method) {
    case Method::kFgm: return "fgm";
    case Method::kSgm1: return "sgm1";
    case Method::kSgm2: return "sgm2";
    case Method::kEllipsoid: return "ellipsoid";
    case Method::kRgem: return "rgem";
  }
  fail(Errc::kInternal, "unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "fgm") return Method::kFgm;
  if (name == "sgm1") return Method::kSgm1;
  if (name == "sgm2") return Method::kSgm2;
  if (name == "ellipsoid") return Method::kEllipsoid;
  if (name == "rgem") return Method::kRgem;
  fail(Errc::kInvalidArgument, "unknown method '" + name + "'");
}

FgmCoefficients fgm_coefficients(long long t) {
  if (t < 0) fail(Errc::kInvalidArgument, "iteration index must be >= 0");
  FgmCoefficients c;
  c.alpha = 0.5 * static_cast<double>(t + 1);
  c.big_a = 0.25 * static_cast<double>(t + 1) * static_cast<double>(t + 2);
  c.tau = 2.0 / static_cast<double>(t + 3);
  return c;
}

double tikhonov_delta(double eps, double R) {
  if (!(eps > 0.0) || !(R > 0.0))
    fail(Errc::kValidation, "eps and R must be positive");
  return eps / (8.0 * R * R);
}

RgemParameters rgem_parameters(long long n, double L, double delta) {
  if (n < 1) fail(Errc::kValidation, "n must be at least 1");
  if (L < 0.0) fail(Errc::kValidation, "L must be nonnegative");
  if (!(delta > 0.0)) fail(Errc::kValidation, "delta must be positive");
  const double nn = static_cast<double>(n);
  RgemParameters prm;
  prm.alpha_bar = 1.0 - 1.0 / (nn + std::sqrt(nn * nn + 16.0 * nn * L / delta));
  prm.alpha = nn * prm.alpha_bar;
  prm.eta = delta * prm.alpha_bar / (1.0 - prm.alpha_bar);
  prm.tau = 1.0 / (nn * (1.0 - prm.alpha_bar)) - 1.0;
  return prm;
}

namespace {

long long from_double(double x) {
  return static_cast<long long>(std::min(x, 9.0e18));
}

}  // namespace

long long theoretical_iterations(Method method, const NetworkProblem& p,
                                 const SolverConfig& config) {
  internal::validate_config(config);
  const OracleConstants constants = oracle_constants(p);
  const double eps = config.eps;
  const double R = config.R;
  const double M = internal::effective_m(constants, config);

  switch (method) {
    case Method::kFgm: {
      if (!constants.L)
        fail(Errc::kUnsupported,
             "fgm needs a smooth dual (quadratic utilities)");
      const double r_hat = 3.0 * R;
      return from_double(
          internal::clamped_ceil(2.0 * r_hat / 3.0 *
                                 std::sqrt(37.0 * *constants.L / eps)));
    }
    case Method::kSgm1:
    case Method::kSgm2: {
      // Heuristic only: the theorem's constant is not constructive, so this
      // is the O(.) shape with unit constants.  Runs are capped by max_iter.
      const double a = 2.5 * R * M;
      const double log_term =
          std::max(1.0, std::log(M * R / (eps * config.confidence_delta)));
      return from_double(
          internal::clamped_ceil(a * a / (eps * eps) * log_term));
    }
    case Method::kEllipsoid: {
      const double m = static_cast<double>(p.m());
      const double log_term =
          internal::clamped_ceil(std::log(128.0 * M * R / eps));
      return from_double(2.0 * m * (m + 1.0) * log_term);
    }
    case Method::kRgem: {
      if (!constants.L)
        fail(Errc::kUnsupported,
             "rgem needs a smooth dual (quadratic utilities)");
      const double L = *constants.L;
      const double nn = static_cast<double>(p.n());
      const double b_sq = [&] {
        double s = 0.0;
        for (double bj : p.b()) s += bj * bj;
        return s;
      }();
      const double a_const =
          2.0 * (L * R + eps / (8.0 * R)) *
          std::sqrt(6.0 + (16.0 * L * R * R * nn + 8.0 * b_sq) / (nn * eps));
      const double log_term = std::max(1.0, std::log(4.0 * R * a_const / eps));
      const double count =
          2.0 * (nn + std::sqrt(nn * nn + 128.0 * nn * L * R * R / eps)) *
          log_term;
      return from_double(internal::clamped_ceil(count));
    }
  }
  fail(Errc::kInternal, "unknown method");
}

SolverReport solve(const NetworkProblem& p, Method method,
                   const SolverConfig& config) {
  switch (method) {
    case Method::kFgm: return solve_fgm(p, config);
    case Method::kSgm1: return solve_sgm(p, config, 1);
    case Method::kSgm2: return solve_sgm(p, config, 2);
    case Method::kEllipsoid: return solve_ellipsoid(p, config).report;
    case Method::kRgem: return solve_rgem(p, config);
  }
  fail(Errc::kInternal, "unknown method");
}

}  // namespace numdual
