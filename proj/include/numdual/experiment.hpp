#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "numdual/report.hpp"
#include "numdual/solvers.hpp"

namespace numdual {

// One benchmark cell: an instance recipe plus the methods, accuracies and
// seeds to run on it.
struct ExperimentCell {
  std::string kind = "uniform";      // uniform | random
  int m = 0;
  int n = 0;
  double b_value = 1.0;              // uniform networks
  std::uint64_t network_seed = 0;    // random networks
  std::string utility = "quadratic"; // quadratic | log
  std::uint64_t utility_seed = 0;
  std::vector<std::string> methods;
  std::vector<double> eps;
  std::vector<std::uint64_t> seeds = {0};
  double R = 1.0;
  long long max_iter = 100000;
  long long record_every = 0;        // <=0: auto thinning
  double M_override = 0.0;
  bool early_exit = false;
};

struct ExperimentSpec {
  std::string table = "quadratic-table";  // quadratic-table | log-table
  std::string output_dir = "results";
  std::vector<ExperimentCell> cells;
};

ExperimentSpec experiment_spec_from_json_string(const std::string& text);
ExperimentSpec load_experiment_spec(const std::string& path);

// One executed (cell, method, eps, seed) run, copied from its SolverReport.
struct SummaryRow {
  std::string instance;
  int m = 0;
  int n = 0;
  double eps = 0.0;
  std::string method;
  std::uint64_t seed = 0;
  long long iterations = 0;
  long long iters_to_eps = -1;  // first recorded iter with gap <= eps
  double wall_ms = 0.0;
  double final_gap = 0.0;       // NaN when unavailable
  double final_feas = 0.0;
  std::string error;            // per-row failure, run continues
};

struct ExperimentOutcome {
  std::vector<SummaryRow> rows;
  std::string summary_text;  // aligned table, stochastic cells mean +- std
  std::string summary_csv;   // machine-readable twin, one row per run
  int check_failures = 0;
};

// Runs every cell, writing one report JSON and one trace CSV per run into
// out_dir (atomically), plus summary.txt / summary.csv.  With check set,
// instances the brute-force oracle can solve are compared against their
// method's theorem bounds and violations are counted.
ExperimentOutcome run_experiment(const ExperimentSpec& spec,
                                 const std::string& out_dir, bool check);

// Log-scale duality gap (solid) and feasibility violation (dashed) versus
// iteration, one color per report; byte-deterministic in its inputs.
std::string render_convergence_svg(const std::vector<SolverReport>& reports,
                                   const std::vector<std::string>& labels);
void plot_convergence(const std::vector<SolverReport>& reports,
                      const std::vector<std::string>& labels,
                      const std::string& out_path);

}  // namespace numdual
