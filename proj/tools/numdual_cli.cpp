// Command-line front end; talks to the library through the C interface only.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "numdual.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSpec = 2;    // bad input: flags, files, spec contents
constexpr int kExitSolver = 3;  // the method itself failed
constexpr int kExitCheck = 4;   // a requested check did not hold

struct ProblemDeleter {
  void operator()(nd_problem* p) const { nd_problem_free(p); }
};
struct ReportDeleter {
  void operator()(nd_report* r) const { nd_report_free(r); }
};
using ProblemPtr = std::unique_ptr<nd_problem, ProblemDeleter>;
using ReportPtr = std::unique_ptr<nd_report, ReportDeleter>;

int exit_code_for(int rc) {
  switch (rc) {
    case ND_OK: return kExitOk;
    case ND_EINVAL:
    case ND_EPARSE:
    case ND_EVALIDATION:
    case ND_EIO: return kExitSpec;
    default: return kExitSolver;
  }
}

int report_failure(int rc) {
  std::cerr << "error: " << nd_last_error() << "\n";
  return exit_code_for(rc);
}

bool write_text(const std::string& path, const char* text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return true;
  }
  std::ofstream out(path);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

struct SolveFlags {
  std::string problem_path;
  std::string method = "fgm";
  double eps = 1e-2;
  double R = 1.0;
  std::uint64_t seed = 0;
  long long max_iter = 100000;
  long long record_every = 0;
  double M_override = 0.0;
  bool early_exit = false;
  std::string out;
  std::string format = "json";
};

void add_solve_flags(CLI::App* cmd, SolveFlags* f, bool with_method) {
  cmd->add_option("--problem", f->problem_path, "problem JSON file")
      ->required();
  if (with_method)
    cmd->add_option("--method", f->method, "fgm|sgm1|sgm2|ellipsoid|rgem");
  cmd->add_option("--eps", f->eps, "target accuracy");
  cmd->add_option("--R", f->R, "dual norm bound");
  cmd->add_option("--seed", f->seed, "RNG seed");
  cmd->add_option("--max-iter", f->max_iter, "iteration cap");
  cmd->add_option("--record-every", f->record_every,
                  "history thinning (<=0: auto)");
  cmd->add_option("--M-override", f->M_override,
                  "replace the derived gradient bound");
  cmd->add_flag("--early-exit", f->early_exit,
                "stop once the measured gap and feasibility reach target");
  cmd->add_option("--out", f->out, "output file ('-' for stdout)");
  cmd->add_option("--format", f->format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
}

nd_solver_config config_from(const SolveFlags& f) {
  nd_solver_config cfg;
  nd_solver_config_init(&cfg);
  cfg.eps = f.eps;
  cfg.R = f.R;
  cfg.seed = f.seed;
  cfg.max_iter = f.max_iter;
  cfg.record_every = f.record_every;
  cfg.M_override = f.M_override;
  cfg.early_exit = f.early_exit ? 1 : 0;
  return cfg;
}

int emit_report(const nd_report* report, const std::string& out,
                const std::string& format) {
  char* text = nullptr;
  const int rc = format == "csv" ? nd_report_trace_csv(report, &text)
                                 : nd_report_to_json(report, &text);
  if (rc != ND_OK) return report_failure(rc);
  const bool ok = write_text(out, text);
  nd_string_free(text);
  return ok ? kExitOk : kExitSpec;
}

int cmd_generate(const std::string& kind, int m, int n, double b_value,
                 std::uint64_t seed, const std::string& utility,
                 std::uint64_t utility_seed, const std::string& out) {
  nd_problem* raw = nullptr;
  const int rc = kind == "uniform"
                     ? nd_problem_generate_uniform(m, n, b_value, &raw)
                     : nd_problem_generate_random(m, n, seed, &raw);
  if (rc != ND_OK) return report_failure(rc);
  ProblemPtr problem(raw);
  if (!utility.empty()) {
    const int urc = utility == "quadratic"
                        ? nd_problem_set_quadratic_utilities(problem.get(),
                                                             utility_seed)
                        : nd_problem_set_log_utilities(problem.get());
    if (urc != ND_OK) return report_failure(urc);
  }
  if (out.empty() || out == "-") {
    char* text = nullptr;
    if (int jrc = nd_problem_to_json(problem.get(), &text))
      return report_failure(jrc);
    std::cout << text;
    nd_string_free(text);
    return kExitOk;
  }
  if (int src = nd_problem_save(problem.get(), out.c_str()))
    return report_failure(src);
  return kExitOk;
}

int load_problem(const std::string& path, ProblemPtr* out) {
  nd_problem* raw = nullptr;
  if (int rc = nd_problem_load(path.c_str(), &raw)) return report_failure(rc);
  out->reset(raw);
  return kExitOk;
}

int cmd_solve(const SolveFlags& f) {
  ProblemPtr problem;
  if (int rc = load_problem(f.problem_path, &problem)) return rc;
  const nd_solver_config cfg = config_from(f);
  nd_report* raw = nullptr;
  if (int rc = nd_solve(problem.get(), f.method.c_str(), &cfg, &raw))
    return report_failure(rc);
  ReportPtr report(raw);
  return emit_report(report.get(), f.out, f.format);
}

int cmd_certify(const SolveFlags& f) {
  ProblemPtr problem;
  if (int rc = load_problem(f.problem_path, &problem)) return rc;
  const nd_solver_config cfg = config_from(f);
  nd_report* raw = nullptr;
  if (int rc = nd_certify(problem.get(), &cfg, &raw))
    return report_failure(rc);
  ReportPtr report(raw);
  return emit_report(report.get(), f.out, f.format);
}

int cmd_distributed(const SolveFlags& f, double tol) {
  ProblemPtr problem;
  if (int rc = load_problem(f.problem_path, &problem)) return rc;
  nd_solver_config cfg = config_from(f);
  cfg.record_duals = 1;

  nd_report* central_raw = nullptr;
  if (int rc = nd_solve(problem.get(), f.method.c_str(), &cfg, &central_raw))
    return report_failure(rc);
  ReportPtr central(central_raw);
  nd_report* dist_raw = nullptr;
  if (int rc = nd_solve_distributed(problem.get(), f.method.c_str(), &cfg,
                                    &dist_raw))
    return report_failure(rc);
  ReportPtr dist(dist_raw);

  double deviation = 0.0;
  if (int rc = nd_compare_traces(central.get(), dist.get(), &deviation))
    return report_failure(rc);
  std::printf("max dual-iterate deviation: %.17g (tolerance %.17g)\n",
              deviation, tol);
  if (!f.out.empty())
    if (int rc = emit_report(dist.get(), f.out, f.format)) return rc;
  if (deviation > tol) {
    std::cerr << "equivalence check failed\n";
    return kExitCheck;
  }
  std::puts("equivalence check passed");
  return kExitOk;
}

int cmd_bench(const std::string& spec_path, const std::string& out_dir,
              bool check) {
  int failures = 0;
  char* summary = nullptr;
  if (int rc = nd_run_experiment(spec_path.c_str(), out_dir.c_str(),
                                 check ? 1 : 0, &failures, &summary))
    return report_failure(rc);
  std::cout << summary;
  nd_string_free(summary);
  if (check && failures > 0) {
    std::cerr << failures << " run(s) violated their theorem bounds\n";
    return kExitCheck;
  }
  return kExitOk;
}

int cmd_plot(const std::vector<std::string>& report_paths,
             const std::vector<std::string>& labels, const std::string& out) {
  if (!labels.empty() && labels.size() != report_paths.size()) {
    std::cerr << "error: need one --label per --report\n";
    return kExitSpec;
  }
  std::vector<ReportPtr> owned;
  std::vector<const nd_report*> reports;
  for (const std::string& path : report_paths) {
    nd_report* raw = nullptr;
    if (int rc = nd_report_load(path.c_str(), &raw))
      return report_failure(rc);
    owned.emplace_back(raw);
    reports.push_back(raw);
  }
  std::vector<const char*> label_ptrs;
  for (const std::string& label : labels) label_ptrs.push_back(label.c_str());
  if (int rc = nd_plot_convergence(
          reports.data(), labels.empty() ? nullptr : label_ptrs.data(),
          reports.size(), out.c_str()))
    return report_failure(rc);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual decomposition methods for network resource allocation"};
  app.require_subcommand(1);

  // generate
  std::string gen_kind = "uniform", gen_utility, gen_out;
  int gen_m = 0, gen_n = 0;
  double gen_b = 1.0;
  std::uint64_t gen_seed = 0, gen_useed = 0;
  CLI::App* generate = app.add_subcommand("generate", "build an instance");
  generate->add_option("--kind", gen_kind, "uniform|random")
      ->check(CLI::IsMember({"uniform", "random"}));
  generate->add_option("--m", gen_m, "links")->required();
  generate->add_option("--n", gen_n, "users")->required();
  generate->add_option("--b-value", gen_b, "uniform capacity");
  generate->add_option("--seed", gen_seed, "network seed (random kind)");
  generate->add_option("--utility", gen_utility, "quadratic|log")
      ->check(CLI::IsMember({"quadratic", "log"}));
  generate->add_option("--utility-seed", gen_useed, "utility seed");
  generate->add_option("--out", gen_out, "output file ('-' for stdout)");

  SolveFlags solve_flags;
  CLI::App* solve = app.add_subcommand("solve", "run one method");
  add_solve_flags(solve, &solve_flags, true);

  SolveFlags certify_flags;
  CLI::App* certify = app.add_subcommand(
      "certify", "ellipsoid with accuracy certificate and primal recovery");
  add_solve_flags(certify, &certify_flags, false);

  SolveFlags dist_flags;
  double dist_tol = 1e-9;
  CLI::App* distributed = app.add_subcommand(
      "distributed", "check protocol equivalence against the reference loop");
  add_solve_flags(distributed, &dist_flags, true);
  distributed->add_option("--tol", dist_tol, "max allowed iterate deviation");

  std::string bench_spec, bench_out;
  bool bench_check = false;
  CLI::App* bench = app.add_subcommand("bench", "run an experiment spec");
  bench->add_option("--spec", bench_spec, "experiment spec JSON")->required();
  bench->add_option("--out", bench_out, "results directory");
  bench->add_flag("--check", bench_check, "compare against theorem bounds");

  std::vector<std::string> plot_reports, plot_labels;
  std::string plot_out;
  CLI::App* plot = app.add_subcommand("plot", "convergence SVG from reports");
  plot->add_option("--report", plot_reports, "report JSON file (repeatable)")
      ->required();
  plot->add_option("--label", plot_labels, "legend label (repeatable)");
  plot->add_option("--out", plot_out, "output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitSpec;
  }

  if (generate->parsed())
    return cmd_generate(gen_kind, gen_m, gen_n, gen_b, gen_seed, gen_utility,
                        gen_useed, gen_out);
  if (solve->parsed()) return cmd_solve(solve_flags);
  if (certify->parsed()) return cmd_certify(certify_flags);
  if (distributed->parsed()) return cmd_distributed(dist_flags, dist_tol);
  if (bench->parsed()) return cmd_bench(bench_spec, bench_out, bench_check);
  if (plot->parsed()) return cmd_plot(plot_reports, plot_labels, plot_out);
  return kExitSpec;
}
