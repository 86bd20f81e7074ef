#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "numdual.h"

namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("numdual_capi_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

nd_problem* quadratic_problem(int m, int n, double b, uint64_t seed) {
  nd_problem* p = nullptr;
  REQUIRE(nd_problem_generate_uniform(m, n, b, &p) == ND_OK);
  REQUIRE(nd_problem_set_quadratic_utilities(p, seed) == ND_OK);
  return p;
}

std::string take_string(char* s) {
  REQUIRE(s != nullptr);
  std::string out = s;
  nd_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("config defaults") {
  nd_solver_config cfg;
  std::memset(&cfg, 0xff, sizeof cfg);
  nd_solver_config_init(&cfg);
  CHECK(cfg.eps == 1e-2);
  CHECK(cfg.R == 1.0);
  CHECK(cfg.seed == 0);
  CHECK(cfg.max_iter == 100000);
  CHECK(cfg.record_every == 1);
  CHECK(cfg.confidence_delta == 0.05);
  CHECK(cfg.M_override == 0.0);
  CHECK(cfg.early_exit == 0);
  CHECK(cfg.record_duals == 0);
  nd_solver_config_init(nullptr);  // tolerated
}

TEST_CASE("problem lifecycle") {
  nd_problem* p = quadratic_problem(2, 4, 3.0, 7);
  int m = 0, n = 0;
  CHECK(nd_problem_dims(p, &m, &n) == ND_OK);
  CHECK(m == 2);
  CHECK(n == 4);

  char* text = nullptr;
  REQUIRE(nd_problem_to_json(p, &text) == ND_OK);
  const std::string json = take_string(text);
  nd_problem* clone = nullptr;
  REQUIRE(nd_problem_from_json(json.c_str(), &clone) == ND_OK);
  char* text2 = nullptr;
  REQUIRE(nd_problem_to_json(clone, &text2) == ND_OK);
  CHECK(take_string(text2) == json);
  nd_problem_free(clone);

  const std::string dir = temp_dir("problem");
  const std::string path = dir + "/p.json";
  REQUIRE(nd_problem_save(p, path.c_str()) == ND_OK);
  nd_problem* loaded = nullptr;
  REQUIRE(nd_problem_load(path.c_str(), &loaded) == ND_OK);
  CHECK(nd_problem_dims(loaded, &m, &n) == ND_OK);
  CHECK(m == 2);
  CHECK(n == 4);
  nd_problem_free(loaded);
  nd_problem_free(p);
  fs::remove_all(dir);
}

TEST_CASE("problem error paths") {
  nd_problem* p = nullptr;
  CHECK(nd_problem_from_json("{ bad", &p) == ND_EPARSE);
  CHECK(std::strlen(nd_last_error()) > 0);
  CHECK(nd_problem_generate_uniform(0, 4, 1.0, &p) == ND_EVALIDATION);
  CHECK(nd_problem_generate_uniform(2, 4, 1.0, nullptr) == ND_EINVAL);
  CHECK(nd_problem_load("/nonexistent/p.json", &p) == ND_EIO);
  CHECK(nd_problem_set_quadratic_utilities(nullptr, 0) == ND_EINVAL);
  CHECK(nd_problem_dims(nullptr, nullptr, nullptr) == ND_EINVAL);
}

TEST_CASE("solve and report round trip") {
  nd_problem* p = quadratic_problem(1, 2, 5.0, 0);
  nd_solver_config cfg;
  nd_solver_config_init(&cfg);
  cfg.max_iter = 50;
  cfg.record_duals = 1;

  nd_report* r = nullptr;
  REQUIRE(nd_solve(p, "fgm", &cfg, &r) == ND_OK);
  CHECK(std::strlen(nd_last_error()) == 0);  // success clears the slot

  char* json = nullptr;
  REQUIRE(nd_report_to_json(r, &json) == ND_OK);
  const std::string text = take_string(json);
  CHECK(text.find("\"method\": \"fgm\"") != std::string::npos);

  nd_report* back = nullptr;
  REQUIRE(nd_report_from_json(text.c_str(), &back) == ND_OK);
  char *csv_a = nullptr, *csv_b = nullptr;
  REQUIRE(nd_report_trace_csv(r, &csv_a) == ND_OK);
  REQUIRE(nd_report_trace_csv(back, &csv_b) == ND_OK);
  const std::string trace = take_string(csv_a);
  CHECK(trace == take_string(csv_b));
  CHECK(trace.rfind("iter,phi,gap,feas,elapsed_ms\n", 0) == 0);

  double dist = -1.0;
  REQUIRE(nd_compare_traces(r, back, &dist) == ND_OK);
  CHECK(dist == 0.0);

  const std::string dir = temp_dir("report");
  const std::string path = dir + "/r.json";
  {
    std::ofstream out(path);
    out << text;
  }
  nd_report* loaded = nullptr;
  REQUIRE(nd_report_load(path.c_str(), &loaded) == ND_OK);
  char* csv_c = nullptr;
  REQUIRE(nd_report_trace_csv(loaded, &csv_c) == ND_OK);
  CHECK(take_string(csv_c) == trace);

  nd_report_free(loaded);
  nd_report_free(back);
  nd_report_free(r);
  nd_problem_free(p);
  fs::remove_all(dir);
}

TEST_CASE("solve error paths") {
  nd_problem* p = quadratic_problem(1, 2, 5.0, 0);
  nd_solver_config cfg;
  nd_solver_config_init(&cfg);
  nd_report* r = nullptr;

  CHECK(nd_solve(p, "newton", &cfg, &r) == ND_EINVAL);
  CHECK(std::strlen(nd_last_error()) > 0);
  CHECK(nd_solve(nullptr, "fgm", &cfg, &r) == ND_EINVAL);
  cfg.eps = -1.0;
  CHECK(nd_solve(p, "fgm", &cfg, &r) == ND_EVALIDATION);
  nd_problem_free(p);

  nd_problem* logged = nullptr;
  REQUIRE(nd_problem_generate_uniform(2, 3, 2.0, &logged) == ND_OK);
  REQUIRE(nd_problem_set_log_utilities(logged) == ND_OK);
  nd_solver_config_init(&cfg);
  CHECK(nd_solve(logged, "fgm", &cfg, &r) == ND_EUNSUPPORTED);
  CHECK(nd_solve_distributed(logged, "ellipsoid", &cfg, &r) == ND_EUNSUPPORTED);
  nd_problem_free(logged);

  CHECK(nd_report_from_json("{ bad", &r) == ND_EPARSE);
  CHECK(nd_report_from_json("{}", &r) == ND_EPARSE);
  CHECK(nd_report_load("/nonexistent/r.json", &r) == ND_EIO);
}

TEST_CASE("distributed run matches the centralized dual path") {
  nd_problem* p = quadratic_problem(2, 6, 3.0, 1);
  nd_solver_config cfg;
  nd_solver_config_init(&cfg);
  cfg.eps = 1e-3;
  cfg.R = 5.0;
  cfg.max_iter = 60;
  cfg.record_duals = 1;

  nd_report *central = nullptr, *dist = nullptr;
  REQUIRE(nd_solve(p, "sgm2", &cfg, &central) == ND_OK);
  REQUIRE(nd_solve_distributed(p, "sgm2", &cfg, &dist) == ND_OK);
  double gap = -1.0;
  REQUIRE(nd_compare_traces(central, dist, &gap) == ND_OK);
  CHECK(gap == 0.0);

  char* json = nullptr;
  REQUIRE(nd_report_to_json(dist, &json) == ND_OK);
  CHECK(take_string(json).find("\"message_count\"") != std::string::npos);

  nd_report_free(dist);
  nd_report_free(central);
  nd_problem_free(p);
}

TEST_CASE("certified ellipsoid run through the c api") {
  nd_problem* p = nullptr;
  REQUIRE(nd_problem_generate_uniform(2, 3, 2.0, &p) == ND_OK);
  REQUIRE(nd_problem_set_log_utilities(p) == ND_OK);
  nd_solver_config cfg;
  nd_solver_config_init(&cfg);
  cfg.eps = 5e-2;
  cfg.R = 3.0;

  nd_report* r = nullptr;
  REQUIRE(nd_certify(p, &cfg, &r) == ND_OK);
  char* json = nullptr;
  REQUIRE(nd_report_to_json(r, &json) == ND_OK);
  const std::string text = take_string(json);
  CHECK(text.find("\"certificate\"") != std::string::npos);
  CHECK(text.find("\"x_hat\"") != std::string::npos);
  nd_report_free(r);
  nd_problem_free(p);
}

TEST_CASE("experiment harness through the c api") {
  const std::string dir = temp_dir("exp");
  const std::string spec_path = dir + "/spec.json";
  {
    std::ofstream out(spec_path);
    out << R"({
      "table": "quadratic-table",
      "output_dir": ")" << dir << R"(/from_spec",
      "cells": [
        {
          "network": {"kind": "uniform", "m": 1, "n": 2, "b_value": 5.0},
          "methods": ["fgm"],
          "eps": [10.0],
          "R": 150.0,
          "max_iter": 100000
        }
      ]
    })";
  }

  int failures = -1;
  char* summary = nullptr;
  REQUIRE(nd_run_experiment(spec_path.c_str(), (dir + "/out").c_str(), 0,
                            &failures, &summary) == ND_OK);
  CHECK(failures == 0);
  CHECK(take_string(summary).rfind("table: quadratic-table", 0) == 0);
  CHECK(fs::exists(dir + "/out/summary.csv"));

  // NULL out_dir falls back to the spec's own output directory.
  REQUIRE(nd_run_experiment(spec_path.c_str(), nullptr, 1, &failures,
                            nullptr) == ND_OK);
  CHECK(failures == 0);
  CHECK(fs::exists(dir + "/from_spec/summary.csv"));

  CHECK(nd_run_experiment(nullptr, nullptr, 0, nullptr, nullptr) == ND_EINVAL);
  CHECK(nd_run_experiment("/nonexistent/spec.json", nullptr, 0, nullptr,
                          nullptr) == ND_EIO);
  fs::remove_all(dir);
}

TEST_CASE("convergence plot through the c api") {
  nd_problem* p = quadratic_problem(1, 2, 5.0, 0);
  nd_solver_config cfg;
  nd_solver_config_init(&cfg);
  cfg.eps = 1e-1;
  cfg.R = 10.0;
  cfg.max_iter = 40;

  nd_report *a = nullptr, *b = nullptr;
  REQUIRE(nd_solve(p, "fgm", &cfg, &a) == ND_OK);
  REQUIRE(nd_solve(p, "sgm2", &cfg, &b) == ND_OK);
  const nd_report* reports[] = {a, b};
  const char* labels[] = {"first", "second"};

  const std::string dir = temp_dir("plot");
  const std::string path = dir + "/plot.svg";
  REQUIRE(nd_plot_convergence(reports, labels, 2, path.c_str()) == ND_OK);
  CHECK(fs::exists(path));
  REQUIRE(nd_plot_convergence(reports, nullptr, 2,
                              (dir + "/plain.svg").c_str()) == ND_OK);

  CHECK(nd_plot_convergence(nullptr, nullptr, 1, path.c_str()) == ND_EINVAL);
  CHECK(nd_plot_convergence(reports, nullptr, 0, path.c_str()) == ND_EINVAL);
  const nd_report* holey[] = {a, nullptr};
  CHECK(nd_plot_convergence(holey, nullptr, 2, path.c_str()) == ND_EINVAL);

  nd_report_free(b);
  nd_report_free(a);
  nd_problem_free(p);
  fs::remove_all(dir);
}
