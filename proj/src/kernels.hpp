#pragma once

#include <algorithm>

namespace numdual {
namespace internal {

// Per-component update formulas shared by the centralized solvers and the
// distributed actors.  Both sides must round identically for the equivalence
// checks to hold bit for bit, so the expressions live here and nowhere else.

// Fast gradient method, one price component.
inline double fgm_y_component(double lambda_j, double g_j, double L) {
  return std::max(0.0, lambda_j - g_j / L);
}

inline double fgm_z_component(double lambda0_j, double weighted_g_sum_j,
                              double L) {
  return std::max(0.0, lambda0_j - weighted_g_sum_j / L);
}

// Written as y + tau (z - y) so equal inputs mix to themselves exactly.
inline double fgm_mix(double tau, double z_j, double y_j) {
  return y_j + tau * (z_j - y_j);
}

// Projected stochastic subgradient step; drift_j = b_j - n C_k^j x_k.
inline double sgm_step(double lambda_j, double beta, double drift_j) {
  return std::max(0.0, lambda_j - beta * drift_j);
}

// RGEM price update; sy_j is the extrapolated running sum (sum_k ytilde_k)_j.
inline double rgem_price(double eta, double lambda_j, double sy_j, double n,
                         double delta) {
  return std::max(0.0, eta * lambda_j - sy_j / n) / (delta + eta);
}

inline double rgem_extrapolated_sum(double s_cur_j, double s_prev_j,
                                    double alpha) {
  return s_cur_j + alpha * (s_cur_j - s_prev_j);
}

inline double rgem_local_price(double lambda_j, double tau, double old_j) {
  return (lambda_j + tau * old_j) / (1.0 + tau);
}

// One step of a weighted running average with normalized weight w.
inline double running_avg(double avg, double w, double value) {
  return avg + w * (value - avg);
}

}  // namespace internal
}  // namespace numdual
