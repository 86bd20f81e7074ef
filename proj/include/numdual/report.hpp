#pragma once

#include <string>

#include "numdual/solvers.hpp"

namespace numdual {

// SolverReport <-> JSON document.
std::string report_to_json_string(const SolverReport& report);
SolverReport report_from_json_string(const std::string& text);
void save_report(const SolverReport& report, const std::string& path);
SolverReport load_report(const std::string& path);

// Convergence trace as CSV with header iter,phi,gap,feas,elapsed_ms; numbers
// carry 17 significant digits so identical runs produce identical bytes
// (elapsed_ms is the one timing-dependent column).
std::string report_trace_csv(const SolverReport& report);
void save_trace_csv(const SolverReport& report, const std::string& path);

}  // namespace numdual
