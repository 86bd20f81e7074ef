#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "numdual/metrics.hpp"
#include "numdual/oracle.hpp"

namespace numdual {

enum class Method { kFgm, kSgm1, kSgm2, kEllipsoid, kRgem };

std::string method_name(Method method);
Method method_from_name(const std::string& name);

// Target accuracy and dual-ball radius shared by generation and solving.
struct ProblemConfig {
  double eps = 1e-2;      // target accuracy
  double R = 1.0;         // known bound with ||lambda*||_2 <= R
  std::uint64_t seed = 0; // randomized-method seed
};

struct SolverConfig : ProblemConfig {
  long long max_iter = 100000;   // hard cap; SGM runs exactly this many steps
  long long record_every = 1;    // history thinning (<=0: ~200 rows)
  double confidence_delta = 0.05;  // reported in SGM's heuristic bound only
  double M_override = 0.0;       // >0 replaces the derived constant M
  bool early_exit = false;       // stop once recorded gap and violation <= targets
  bool record_duals = false;     // keep dual iterates for equivalence checks
  Vec lambda0;                   // FGM start point; empty means zero
};

struct HistoryRow {
  long long iter = 0;
  double phi = 0.0;
  std::optional<double> gap;  // duality gap at the current primal estimate
  double feas = 0.0;
  double elapsed_ms = 0.0;
};

// Convex weights over ellipsoid iterations (the accuracy certificate).
struct CertificateWeights {
  std::vector<long long> iter;  // members of I_N, ascending
  Vec xi;                       // matching weights, sum to 1
};

struct SolverReport {
  Method method = Method::kFgm;
  DualPoint lambda;    // method output dual point
  PrimalPoint x_hat;   // recovered primal estimate
  long long iterations = 0;
  long long theoretical_n = -1;  // scheduled-by-theory count, -1 if none
  std::vector<HistoryRow> history;
  std::vector<std::pair<long long, Vec>> dual_trace;  // when record_duals
  SolverConfig config;
  OracleConstants constants;
  double wall_ms = 0.0;
  bool early_exited = false;
  bool exact_optimum = false;  // ellipsoid saw a zero gradient
  // Ellipsoid shrank below machine precision along the cut direction before
  // its schedule ran out; the run stops with the localizer it has.
  bool localization_exhausted = false;
  long long loop_user_evals = 0;  // best responses inside the iteration loop
  std::optional<CertificateWeights> certificate;
  std::optional<long long> message_count;  // distributed runs only
};

// Fast-gradient schedule: alpha_t = (t+1)/2, A_t = (t+1)(t+2)/4,
// tau_t = 2/(t+3).
struct FgmCoefficients {
  double alpha = 0.0;
  double big_a = 0.0;
  double tau = 0.0;
};
FgmCoefficients fgm_coefficients(long long t);

// Regularization weight for primal recovery: delta = eps / (8 R^2).
double tikhonov_delta(double eps, double R);

// Step-size bundle for the randomized gradient extrapolation method.
struct RgemParameters {
  double alpha_bar = 0.0;  // extrapolation base, in (0,1)
  double alpha = 0.0;      // n * alpha_bar
  double eta = 0.0;
  double tau = 0.0;
};
RgemParameters rgem_parameters(long long n, double L, double delta);

// Iteration counts the convergence theorems prescribe for accuracy eps.
// SGM has no constructive constant, so its value is the O(.)-shaped
// heuristic with unit constants; treat it as an order-of-magnitude hint.
long long theoretical_iterations(Method method, const NetworkProblem& p,
                                 const SolverConfig& config);

SolverReport solve_fgm(const NetworkProblem& p, const SolverConfig& config);

// variant 1 averages full primal responses, variant 2 keeps the sparse
// one-sample average; dual iterates are identical for identical seeds.
SolverReport solve_sgm(const NetworkProblem& p, const SolverConfig& config,
                       int variant);

// Per-iteration ellipsoid state, recorded before the cut is applied.
struct EllipsoidStep {
  Vec lambda;
  Vec g;        // applied cut vector (gradient or separator)
  Vec b_matrix; // B_t, row-major m x m
  bool in_domain = false;
};

struct EllipsoidTrace {
  int m = 0;
  double radius = 0.0;  // domain radius 2R
  std::vector<EllipsoidStep> steps;
  Vec final_b;       // B_N
  Vec final_lambda;  // lambda^N
};

struct EllipsoidResult {
  SolverReport report;
  EllipsoidTrace trace;
};

EllipsoidResult solve_ellipsoid(const NetworkProblem& p,
                                const SolverConfig& config);

// Nonnegative weights over in-domain iterations, summing to one.
CertificateWeights build_certificate(const EllipsoidTrace& trace);

PrimalPoint recover_primal_from_certificate(const NetworkProblem& p,
                                            const EllipsoidTrace& trace,
                                            const CertificateWeights& weights);

// Ellipsoid + certificate + recovery in one call.
SolverReport certify_solve(const NetworkProblem& p, const SolverConfig& config);

SolverReport solve_rgem(const NetworkProblem& p, const SolverConfig& config);

SolverReport solve(const NetworkProblem& p, Method method,
                   const SolverConfig& config);

}  // namespace numdual
