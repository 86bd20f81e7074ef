/* C interface to the dual-method toolkit.  All functions return ND_OK or an
 * error code; nd_last_error() describes the most recent failure on the
 * calling thread.  Strings returned through out-parameters are heap copies
 * the caller releases with nd_string_free(). */
#ifndef NUMDUAL_H_
#define NUMDUAL_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  ND_OK = 0,
  ND_EINVAL = 1,      /* bad argument */
  ND_EPARSE = 2,      /* malformed input text */
  ND_EVALIDATION = 3, /* structurally valid input violating a model rule */
  ND_EUNSUPPORTED = 4,
  ND_EIO = 5,
  ND_EDEGENERATE = 6,
  ND_EINTERNAL = 7
};

typedef struct nd_problem nd_problem;
typedef struct nd_report nd_report;

/* Most recent error message on this thread; never NULL, empty when no
 * failure has occurred.  Owned by the library, do not free. */
const char* nd_last_error(void);
void nd_string_free(char* s);

/* ---- problems ---- */
int nd_problem_load(const char* path, nd_problem** out);
int nd_problem_from_json(const char* text, nd_problem** out);
int nd_problem_save(const nd_problem* p, const char* path);
int nd_problem_to_json(const nd_problem* p, char** out);
int nd_problem_generate_uniform(int m, int n, double b_value,
                                nd_problem** out);
int nd_problem_generate_random(int m, int n, uint64_t seed, nd_problem** out);
int nd_problem_set_quadratic_utilities(nd_problem* p, uint64_t seed);
int nd_problem_set_log_utilities(nd_problem* p);
int nd_problem_dims(const nd_problem* p, int* m, int* n);
void nd_problem_free(nd_problem* p);

/* ---- solving ---- */
typedef struct nd_solver_config {
  double eps;
  double R;
  uint64_t seed;
  long long max_iter;
  long long record_every; /* <= 0: automatic thinning */
  double confidence_delta;
  double M_override; /* > 0 replaces the derived bound */
  int early_exit;
  int record_duals;
} nd_solver_config;

/* Fills cfg with the library defaults (eps 1e-2, R 1, seed 0, ...). */
void nd_solver_config_init(nd_solver_config* cfg);

/* method: "fgm" | "sgm1" | "sgm2" | "ellipsoid" | "rgem" */
int nd_solve(const nd_problem* p, const char* method,
             const nd_solver_config* cfg, nd_report** out);
int nd_solve_distributed(const nd_problem* p, const char* method,
                         const nd_solver_config* cfg, nd_report** out);
/* Ellipsoid with the accuracy certificate and certified primal recovery. */
int nd_certify(const nd_problem* p, const nd_solver_config* cfg,
               nd_report** out);

/* ---- reports ---- */
int nd_report_to_json(const nd_report* r, char** out);
int nd_report_from_json(const char* text, nd_report** out);
int nd_report_load(const char* path, nd_report** out);
int nd_report_trace_csv(const nd_report* r, char** out);
/* Sup-norm distance between two recorded dual traces (needs record_duals). */
int nd_compare_traces(const nd_report* a, const nd_report* b, double* out);
void nd_report_free(nd_report* r);

/* ---- benchmark harness ---- */
/* Runs the cells in the spec file, writes artifacts under out_dir (NULL or
 * empty: the spec's own output_dir), and returns the number of bound
 * violations through check_failures (0 when check is 0).  summary may be
 * NULL; otherwise it receives the rendered summary table. */
int nd_run_experiment(const char* spec_path, const char* out_dir, int check,
                      int* check_failures, char** summary);
/* reports/labels are parallel arrays; labels may be NULL for method names. */
int nd_plot_convergence(const nd_report* const* reports,
                        const char* const* labels, size_t count,
                        const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* NUMDUAL_H_ */
