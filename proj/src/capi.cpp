#include "numdual.h"

#include <cstring>
#include <string>
#include <vector>

#include "numdual/distributed.hpp"
#include "numdual/error.hpp"
#include "numdual/experiment.hpp"
#include "numdual/problem.hpp"
#include "numdual/report.hpp"
#include "numdual/solvers.hpp"

struct nd_problem {
  numdual::NetworkProblem impl;
};
struct nd_report {
  numdual::SolverReport impl;
};

namespace {

thread_local std::string g_last_error;

int set_error(const numdual::Error& e) {
  g_last_error = e.what();
  return static_cast<int>(e.code());
}

int set_error(const std::exception& e) {
  g_last_error = e.what();
  return ND_EINTERNAL;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ND_OK;
  } catch (const numdual::Error& e) {
    return set_error(e);
  } catch (const std::exception& e) {
    return set_error(e);
  }
}

int require(bool ok, const char* what) {
  if (ok) return ND_OK;
  g_last_error = what;
  return ND_EINVAL;
}

char* copy_out(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

numdual::SolverConfig to_config(const nd_solver_config* cfg) {
  numdual::SolverConfig config;
  if (!cfg) return config;
  config.eps = cfg->eps;
  config.R = cfg->R;
  config.seed = cfg->seed;
  config.max_iter = cfg->max_iter;
  config.record_every = cfg->record_every;
  config.confidence_delta = cfg->confidence_delta;
  config.M_override = cfg->M_override;
  config.early_exit = cfg->early_exit != 0;
  config.record_duals = cfg->record_duals != 0;
  return config;
}

}  // namespace

const char* nd_last_error(void) { return g_last_error.c_str(); }

void nd_string_free(char* s) { delete[] s; }

int nd_problem_load(const char* path, nd_problem** out) {
  if (int rc = require(path && out, "path and out must be non-null")) return rc;
  return guarded([&] { *out = new nd_problem{numdual::load_problem(path)}; });
}

int nd_problem_from_json(const char* text, nd_problem** out) {
  if (int rc = require(text && out, "text and out must be non-null")) return rc;
  return guarded(
      [&] { *out = new nd_problem{numdual::problem_from_json_string(text)}; });
}

int nd_problem_save(const nd_problem* p, const char* path) {
  if (int rc = require(p && path, "problem and path must be non-null"))
    return rc;
  return guarded([&] { numdual::save_problem(p->impl, path); });
}

int nd_problem_to_json(const nd_problem* p, char** out) {
  if (int rc = require(p && out, "problem and out must be non-null")) return rc;
  return guarded(
      [&] { *out = copy_out(numdual::problem_to_json_string(p->impl)); });
}

int nd_problem_generate_uniform(int m, int n, double b_value,
                                nd_problem** out) {
  if (int rc = require(out != nullptr, "out must be non-null")) return rc;
  return guarded([&] {
    *out = new nd_problem{numdual::generate_uniform_network(m, n, b_value)};
  });
}

int nd_problem_generate_random(int m, int n, uint64_t seed, nd_problem** out) {
  if (int rc = require(out != nullptr, "out must be non-null")) return rc;
  return guarded([&] {
    *out = new nd_problem{numdual::generate_random_network(m, n, seed)};
  });
}

int nd_problem_set_quadratic_utilities(nd_problem* p, uint64_t seed) {
  if (int rc = require(p != nullptr, "problem must be non-null")) return rc;
  return guarded([&] {
    p->impl.set_utilities(numdual::make_quadratic_utilities(p->impl.n(), seed));
  });
}

int nd_problem_set_log_utilities(nd_problem* p) {
  if (int rc = require(p != nullptr, "problem must be non-null")) return rc;
  return guarded(
      [&] { p->impl.set_utilities(numdual::make_log_utilities(p->impl)); });
}

int nd_problem_dims(const nd_problem* p, int* m, int* n) {
  if (int rc = require(p && m && n, "all arguments must be non-null"))
    return rc;
  *m = p->impl.m();
  *n = p->impl.n();
  return ND_OK;
}

void nd_problem_free(nd_problem* p) { delete p; }

void nd_solver_config_init(nd_solver_config* cfg) {
  if (!cfg) return;
  const numdual::SolverConfig defaults;
  cfg->eps = defaults.eps;
  cfg->R = defaults.R;
  cfg->seed = defaults.seed;
  cfg->max_iter = defaults.max_iter;
  cfg->record_every = defaults.record_every;
  cfg->confidence_delta = defaults.confidence_delta;
  cfg->M_override = defaults.M_override;
  cfg->early_exit = defaults.early_exit ? 1 : 0;
  cfg->record_duals = defaults.record_duals ? 1 : 0;
}

int nd_solve(const nd_problem* p, const char* method,
             const nd_solver_config* cfg, nd_report** out) {
  if (int rc = require(p && method && out,
                       "problem, method and out must be non-null"))
    return rc;
  return guarded([&] {
    *out = new nd_report{numdual::solve(
        p->impl, numdual::method_from_name(method), to_config(cfg))};
  });
}

int nd_solve_distributed(const nd_problem* p, const char* method,
                         const nd_solver_config* cfg, nd_report** out) {
  if (int rc = require(p && method && out,
                       "problem, method and out must be non-null"))
    return rc;
  return guarded([&] {
    *out = new nd_report{
        numdual::run_distributed(p->impl, numdual::method_from_name(method),
                                 to_config(cfg))
            .report};
  });
}

int nd_certify(const nd_problem* p, const nd_solver_config* cfg,
               nd_report** out) {
  if (int rc = require(p && out, "problem and out must be non-null")) return rc;
  return guarded(
      [&] { *out = new nd_report{numdual::certify_solve(p->impl, to_config(cfg))}; });
}

int nd_report_to_json(const nd_report* r, char** out) {
  if (int rc = require(r && out, "report and out must be non-null")) return rc;
  return guarded(
      [&] { *out = copy_out(numdual::report_to_json_string(r->impl)); });
}

int nd_report_from_json(const char* text, nd_report** out) {
  if (int rc = require(text && out, "text and out must be non-null")) return rc;
  return guarded(
      [&] { *out = new nd_report{numdual::report_from_json_string(text)}; });
}

int nd_report_load(const char* path, nd_report** out) {
  if (int rc = require(path && out, "path and out must be non-null")) return rc;
  return guarded([&] { *out = new nd_report{numdual::load_report(path)}; });
}

int nd_report_trace_csv(const nd_report* r, char** out) {
  if (int rc = require(r && out, "report and out must be non-null")) return rc;
  return guarded(
      [&] { *out = copy_out(numdual::report_trace_csv(r->impl)); });
}

int nd_compare_traces(const nd_report* a, const nd_report* b, double* out) {
  if (int rc = require(a && b && out, "all arguments must be non-null"))
    return rc;
  return guarded(
      [&] { *out = numdual::compare_traces(a->impl, b->impl); });
}

void nd_report_free(nd_report* r) { delete r; }

int nd_run_experiment(const char* spec_path, const char* out_dir, int check,
                      int* check_failures, char** summary) {
  if (int rc = require(spec_path != nullptr, "spec_path must be non-null"))
    return rc;
  return guarded([&] {
    const numdual::ExperimentSpec spec =
        numdual::load_experiment_spec(spec_path);
    const std::string dir =
        (out_dir && *out_dir) ? out_dir : spec.output_dir;
    const numdual::ExperimentOutcome outcome =
        numdual::run_experiment(spec, dir, check != 0);
    if (check_failures) *check_failures = outcome.check_failures;
    if (summary) *summary = copy_out(outcome.summary_text);
  });
}

int nd_plot_convergence(const nd_report* const* reports,
                        const char* const* labels, size_t count,
                        const char* out_path) {
  if (int rc = require(reports && out_path && count > 0,
                       "reports, out_path and a positive count are required"))
    return rc;
  return guarded([&] {
    std::vector<numdual::SolverReport> rs;
    std::vector<std::string> ls;
    rs.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      if (!reports[i]) numdual::fail(numdual::Errc::kInvalidArgument,
                                     "null report in plot input");
      rs.push_back(reports[i]->impl);
      if (labels) ls.emplace_back(labels[i] ? labels[i] : "");
    }
    numdual::plot_convergence(rs, ls, out_path);
  });
}
