#include "numdual/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace numdual {

namespace {

void check_user(const NetworkProblem& p, int k) {
  if (k < 0 || k >= p.n()) fail(Errc::kInvalidArgument, "user index out of range");
}

void check_lambda(const NetworkProblem& p, const DualPoint& lambda) {
  if (static_cast<int>(lambda.lambda.size()) != p.m())
    fail(Errc::kInvalidArgument, "lambda must have one price per link");
}

}  // namespace

double utility(const NetworkProblem& p, int k, double xk) {
  check_user(p, k);
  const UtilitySpec& u = p.utilities_checked();
  if (u.family == UtilityFamily::kQuadratic)
    return u.a[k] * xk - 0.5 * u.sigma * p.n() * xk * xk;
  return std::log(xk);
}

double best_response(const NetworkProblem& p, int k, double price) {
  check_user(p, k);
  const UtilitySpec& u = p.utilities_checked();
  if (u.family == UtilityFamily::kQuadratic) {
    const double top = u.a[k] - price;
    return top > 0.0 ? top / (u.sigma * p.n()) : 0.0;
  }
  if (price <= 0.0) return u.x_hi;
  return std::clamp(1.0 / price, u.x_lo, u.x_hi);
}

double user_price(const NetworkProblem& p, const DualPoint& lambda, int k) {
  check_user(p, k);
  check_lambda(p, lambda);
  double price = 0.0;
  for (int j : p.links_of(k)) price += lambda.lambda[j];
  return price;
}

PrimalPoint primal_response(const NetworkProblem& p, const DualPoint& lambda) {
  check_lambda(p, lambda);
  PrimalPoint x;
  x.x.resize(p.n());
  for (int k = 0; k < p.n(); ++k) {
    double price = 0.0;
    for (int j : p.links_of(k)) price += lambda.lambda[j];
    x.x[k] = best_response(p, k, price);
  }
  return x;
}

Vec link_loads(const NetworkProblem& p, const PrimalPoint& x) {
  if (static_cast<int>(x.x.size()) != p.n())
    fail(Errc::kInvalidArgument, "x must have one rate per user");
  Vec loads(p.m(), 0.0);
  for (int j = 0; j < p.m(); ++j)
    for (int k : p.users_of(j)) loads[j] += x.x[k];
  return loads;
}

double total_utility(const NetworkProblem& p, const PrimalPoint& x) {
  if (static_cast<int>(x.x.size()) != p.n())
    fail(Errc::kInvalidArgument, "x must have one rate per user");
  double total = 0.0;
  for (int k = 0; k < p.n(); ++k) total += utility(p, k, x.x[k]);
  return total;
}

double dual_value(const NetworkProblem& p, const DualPoint& lambda) {
  check_lambda(p, lambda);
  double value = 0.0;
  for (int j = 0; j < p.m(); ++j) value += lambda.lambda[j] * p.b()[j];
  for (int k = 0; k < p.n(); ++k) {
    double price = 0.0;
    for (int j : p.links_of(k)) price += lambda.lambda[j];
    const double xk = best_response(p, k, price);
    value += utility(p, k, xk) - xk * price;
  }
  return value;
}

Vec dual_gradient(const NetworkProblem& p, const DualPoint& lambda) {
  const PrimalPoint x = primal_response(p, lambda);
  Vec g = link_loads(p, x);
  for (int j = 0; j < p.m(); ++j) g[j] = p.b()[j] - g[j];
  return g;
}

Vec stochastic_gradient(const NetworkProblem& p, const DualPoint& lambda, int k) {
  check_user(p, k);
  check_lambda(p, lambda);
  const double xk = best_response(p, k, user_price(p, lambda, k));
  Vec g = p.b();
  for (int j : p.links_of(k)) g[j] -= p.n() * xk;
  return g;
}

double regularized_value(const NetworkProblem& p, const DualPoint& lambda,
                         double delta) {
  check_lambda(p, lambda);
  double sq = 0.0;
  for (double v : lambda.lambda) sq += v * v;
  return dual_value(p, lambda) + 0.5 * delta * sq;
}

Vec regularized_gradient(const NetworkProblem& p, const DualPoint& lambda,
                         double delta) {
  Vec g = dual_gradient(p, lambda);
  for (int j = 0; j < p.m(); ++j) g[j] += delta * lambda.lambda[j];
  return g;
}

OracleConstants oracle_constants(const NetworkProblem& p) {
  const UtilitySpec& u = p.utilities_checked();
  OracleConstants c;
  double b_norm_sq = 0.0;
  for (double bj : p.b()) b_norm_sq += bj * bj;
  double worst = 0.0;  // max_k xbar_k ||C_k||_2
  for (int k = 0; k < p.n(); ++k) {
    const double xbar = (u.family == UtilityFamily::kQuadratic)
                            ? u.a[k] / (u.sigma * p.n())
                            : u.x_hi;
    worst = std::max(worst, xbar * std::sqrt(static_cast<double>(p.degree(k))));
  }
  c.M = std::sqrt(b_norm_sq) + p.n() * worst;
  if (u.family == UtilityFamily::kQuadratic) {
    c.mu = u.sigma * p.n();
    c.L = static_cast<double>(p.n()) * p.m() * p.m() / *c.mu;
  }
  return c;
}

}  // namespace numdual
