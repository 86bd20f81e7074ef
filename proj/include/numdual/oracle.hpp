#pragma once

#include <optional>

#include "numdual/problem.hpp"

namespace numdual {

// A dual point: one nonnegative price per link.
struct DualPoint {
  Vec lambda;
  bool operator==(const DualPoint&) const = default;
};

// A primal point: one nonnegative rate per user.
struct PrimalPoint {
  Vec x;
  bool operator==(const PrimalPoint&) const = default;
};

// Constants the methods derive from the instance:
//   mu — strong concavity modulus of the utilities (quadratic only),
//   L  — Lipschitz constant of the dual gradient, L = n m^2 / mu,
//   M  — bound on the stochastic subgradient norm,
//        M = ||b||_2 + n * max_k xbar_k ||C_k||_2 with xbar_k the largest
//        possible best response of user k.
struct OracleConstants {
  std::optional<double> mu;
  std::optional<double> L;
  double M = 0.0;
};

double utility(const NetworkProblem& p, int k, double xk);

// argmax_{x >= 0} { u_k(x) - x * price }; closed form per family.
double best_response(const NetworkProblem& p, int k, double price);

// Total route price of user k: (C^T lambda)_k.
double user_price(const NetworkProblem& p, const DualPoint& lambda, int k);

// x(lambda): every user's best response to the current link prices.
PrimalPoint primal_response(const NetworkProblem& p, const DualPoint& lambda);

// Link loads C x, each accumulated over users in ascending index order.
Vec link_loads(const NetworkProblem& p, const PrimalPoint& x);

// U(x) = sum_k u_k(x_k).
double total_utility(const NetworkProblem& p, const PrimalPoint& x);

// Dual function phi(lambda) = <lambda, b> + sum_k { u_k(x_k) - x_k price_k }.
double dual_value(const NetworkProblem& p, const DualPoint& lambda);

// grad phi(lambda) = b - C x(lambda).
Vec dual_gradient(const NetworkProblem& p, const DualPoint& lambda);

// Single-sample estimate b - n C_k x_k(lambda); averaging it over k drawn
// uniformly reproduces dual_gradient exactly.
Vec stochastic_gradient(const NetworkProblem& p, const DualPoint& lambda, int k);

// Tikhonov-regularized dual phi_delta = phi + (delta/2)||lambda||^2.
double regularized_value(const NetworkProblem& p, const DualPoint& lambda,
                         double delta);
Vec regularized_gradient(const NetworkProblem& p, const DualPoint& lambda,
                         double delta);

OracleConstants oracle_constants(const NetworkProblem& p);

}  // namespace numdual
