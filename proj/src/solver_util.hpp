#pragma once

#include <chrono>
#include <cmath>

#include "numdual/solvers.hpp"

namespace numdual {
namespace internal {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void validate_config(const SolverConfig& config) {
  if (!(config.eps > 0.0)) fail(Errc::kValidation, "eps must be positive");
  if (!(config.R > 0.0)) fail(Errc::kValidation, "R must be positive");
  if (config.max_iter < 1)
    fail(Errc::kValidation, "max_iter must be at least 1");
  if (!(config.confidence_delta > 0.0 && config.confidence_delta < 1.0))
    fail(Errc::kValidation, "confidence_delta must lie in (0,1)");
}

// record_every <= 0 asks for roughly 200 evenly spaced rows.
inline long long resolve_record_every(const SolverConfig& config,
                                      long long total_iters) {
  if (config.record_every > 0) return config.record_every;
  return std::max<long long>(1, total_iters / 200);
}

inline bool record_due(long long t, long long every, long long last) {
  return t % every == 0 || t == last;
}

// Constant M with the config override applied.
inline double effective_m(const OracleConstants& constants,
                          const SolverConfig& config) {
  return config.M_override > 0.0 ? config.M_override : constants.M;
}

inline double clamped_ceil(double value) {
  if (!(value > 0.0)) return 1.0;
  return std::ceil(value);
}

}  // namespace internal
}  // namespace numdual
