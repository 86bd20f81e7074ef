#pragma once

#include <string>

#include "numdual/oracle.hpp"

namespace numdual {

// ||[C x - b]_+||_2: Euclidean size of the capacity overshoot.
double feasibility_violation(const NetworkProblem& p, const PrimalPoint& x);

// phi(lambda) - U(x); nonnegative whenever x is feasible (weak duality).
double duality_gap(const NetworkProblem& p, const DualPoint& lambda,
                   const PrimalPoint& x);

struct BruteForceSolution {
  PrimalPoint x;
  double value = 0.0;
  std::optional<DualPoint> lambda;  // optimal prices (KKT backend only)
  std::string backend;
};

// Exact reference optimum for quadratic utilities via KKT active-set
// enumeration over link subsets (2^m systems, so m <= 10).  Every returned
// candidate is verified against the full KKT conditions, which certify
// global optimality for this concave problem.
BruteForceSolution kkt_solve(const NetworkProblem& p);

// Reference optimum by exhaustive feasible-grid search with iterative local
// refinement around the incumbent; any utility family, n <= 4.
BruteForceSolution grid_solve(const NetworkProblem& p, int points_per_axis = 0);

// Dispatch: KKT backend when it applies, grid fallback otherwise.
BruteForceSolution brute_force_solve(const NetworkProblem& p);

}  // namespace numdual
