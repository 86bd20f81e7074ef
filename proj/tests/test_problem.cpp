#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>

#include "numdual/problem.hpp"
#include "test_util.hpp"

using namespace numdual;
using numdual::testing::thrown_code;
using numdual::testing::thrown_message;

TEST_CASE("handmade problem exposes both sparse views") {
  NetworkProblem p(2, 3, {{0}, {1}, {1, 0}}, {1.0, 2.0});
  CHECK(p.m() == 2);
  CHECK(p.n() == 3);
  CHECK(p.nnz() == 4);
  CHECK(p.links_of(0) == std::vector<int>{0});
  CHECK(p.links_of(2) == std::vector<int>{0, 1});  // sorted on construction
  CHECK(p.users_of(0) == std::vector<int>{0, 2});
  CHECK(p.users_of(1) == std::vector<int>{1, 2});
  CHECK(p.degree(2) == 2);
  CHECK(p.dense_rows() ==
        std::vector<std::vector<int>>{{1, 0, 1}, {0, 1, 1}});
}

TEST_CASE("construction rejects malformed instances") {
  CHECK(thrown_code([] { NetworkProblem(0, 1, {{}}, {}); }) ==
        Errc::kValidation);
  CHECK(thrown_code([] { NetworkProblem(1, 0, {}, {1.0}); }) ==
        Errc::kValidation);
  CHECK(thrown_code([] { NetworkProblem(2, 1, {{0}}, {1.0}); }) ==
        Errc::kValidation);  // b wrong length
  CHECK(thrown_message([] { NetworkProblem(1, 1, {{0}}, {0.0}); }) ==
        "capacity must be positive (b[0] = 0)");
  CHECK(thrown_code([] { NetworkProblem(1, 2, {{0}, {}}, {1.0}); }) ==
        Errc::kValidation);  // empty route
  CHECK(thrown_code([] { NetworkProblem(1, 1, {{1}}, {1.0}); }) ==
        Errc::kValidation);  // link id out of range
  CHECK(thrown_code([] { NetworkProblem(2, 1, {{0, 0}}, {1.0, 1.0}); }) ==
        Errc::kValidation);  // duplicate link on a route
  NetworkProblem p(1, 1, {{0}}, {1.0});
  CHECK(thrown_code([&] { p.links_of(1); }) == Errc::kInvalidArgument);
  CHECK(thrown_code([&] { p.users_of(-1); }) == Errc::kInvalidArgument);
  CHECK(thrown_code([&] { p.utilities_checked(); }) == Errc::kValidation);
}

TEST_CASE("uniform generator builds the all-ones instance") {
  NetworkProblem p = generate_uniform_network(2, 3, 5.0);
  CHECK(p.b() == Vec{5.0, 5.0});
  for (int k = 0; k < 3; ++k) CHECK(p.links_of(k) == std::vector<int>{0, 1});
  CHECK(p.nnz() == 6);
  NetworkProblem tiny = generate_uniform_network(1, 1, 1.0);
  CHECK(tiny.dense_rows() == std::vector<std::vector<int>>{{1}});
  NetworkProblem tall = generate_uniform_network(6, 3, 5.0);
  CHECK(tall.m() == 6);
  CHECK(tall.nnz() == 18);
  CHECK(thrown_code([] { generate_uniform_network(1, 1, 0.0); }) ==
        Errc::kValidation);
}

TEST_CASE("random generator is a pure function of its seed") {
  NetworkProblem a = generate_random_network(3, 4, 42);
  NetworkProblem b = generate_random_network(3, 4, 42);
  CHECK(a == b);
  NetworkProblem c = generate_random_network(3, 4, 43);
  CHECK_FALSE(a == c);
}

TEST_CASE("random generator honours the documented distributions") {
  NetworkProblem p = generate_random_network(10, 100, 1);
  for (double bj : p.b()) {
    CHECK(bj >= 1.0);
    CHECK(bj < 6.0);
  }
  for (int k = 0; k < p.n(); ++k) CHECK(p.degree(k) >= 1);
  const double density =
      static_cast<double>(p.nnz()) / (p.m() * p.n());
  CHECK(density > 0.35);
  CHECK(density < 0.65);
  // Repair rule keeps every column nonzero even on skinny instances.
  NetworkProblem skinny = generate_random_network(2, 5, 7);
  for (int k = 0; k < skinny.n(); ++k) CHECK(skinny.degree(k) >= 1);
}

TEST_CASE("quadratic utility generator") {
  UtilitySpec u = make_quadratic_utilities(1500, 0);
  CHECK(u.family == UtilityFamily::kQuadratic);
  CHECK(u.sigma == 0.1);
  for (double ak : u.a) {
    CHECK(ak > 0.0);
    CHECK(ak <= 100.0);
  }
  CHECK(make_quadratic_utilities(1, 3).a == make_quadratic_utilities(1, 3).a);
  const UtilitySpec wide = make_quadratic_utilities(10000, 5);
  double mean = 0.0;
  for (double ak : wide.a) mean += ak;
  mean /= 10000.0;
  CHECK(mean > 48.0);
  CHECK(mean < 52.0);
}

TEST_CASE("log utility generator uses the capacity box") {
  NetworkProblem p = generate_random_network(4, 6, 9);
  UtilitySpec u = make_log_utilities(p);
  CHECK(u.family == UtilityFamily::kLogarithmic);
  CHECK(u.x_lo == 1e-6);
  double bmax = 0.0;
  for (double bj : p.b()) bmax = std::max(bmax, bj);
  CHECK(u.x_hi == bmax);
}

TEST_CASE("set_utilities validates the spec") {
  NetworkProblem p = generate_uniform_network(1, 2, 5.0);
  UtilitySpec u;
  u.a = {1.0};  // wrong length
  CHECK(thrown_code([&] { p.set_utilities(u); }) == Errc::kValidation);
  u.a = {1.0, -1.0};
  CHECK(thrown_code([&] { p.set_utilities(u); }) == Errc::kValidation);
  u.a = {1.0, 1.0};
  u.sigma = 0.0;
  CHECK(thrown_code([&] { p.set_utilities(u); }) == Errc::kValidation);
  UtilitySpec lg;
  lg.family = UtilityFamily::kLogarithmic;
  lg.x_lo = 2.0;
  lg.x_hi = 1.0;
  CHECK(thrown_code([&] { p.set_utilities(lg); }) == Errc::kValidation);
  u.sigma = 0.1;
  p.set_utilities(u);
  CHECK(p.utilities_checked().a == Vec{1.0, 1.0});
}

TEST_CASE("json round-trip is exact for both matrix formats") {
  // Small instance serializes dense.
  NetworkProblem small = generate_random_network(3, 5, 11);
  small.set_utilities(make_quadratic_utilities(5, 2));
  CHECK(problem_to_json_string(small).find("\"dense\"") != std::string::npos);
  CHECK(problem_from_json_string(problem_to_json_string(small)) == small);

  // Large random capacities stress the 17-digit decimal round-trip.
  NetworkProblem big = generate_random_network(5, 1000, 13);
  big.set_utilities(make_log_utilities(big));
  CHECK(problem_to_json_string(big).find("\"coo\"") != std::string::npos);
  CHECK(problem_from_json_string(problem_to_json_string(big)) == big);

  // Without utilities the field stays absent.
  NetworkProblem bare = generate_uniform_network(2, 3, 5.0);
  CHECK(problem_to_json_string(bare).find("utilities") == std::string::npos);
  CHECK(problem_from_json_string(problem_to_json_string(bare)) == bare);
}

TEST_CASE("file round-trip and io failures") {
  namespace fs = std::filesystem;
  const std::string path =
      (fs::temp_directory_path() / "nd_problem_roundtrip.json").string();
  NetworkProblem p = generate_uniform_network(2, 3, 5.0);
  p.set_utilities(make_quadratic_utilities(3, 1));
  save_problem(p, path);
  CHECK(load_problem(path) == p);
  std::remove(path.c_str());
  CHECK(thrown_code([&] { load_problem(path); }) == Errc::kIo);
  CHECK(thrown_code([&] { save_problem(p, "/nonexistent-dir/x.json"); }) ==
        Errc::kIo);
}

TEST_CASE("parse errors name the offending field") {
  CHECK(thrown_code([] { problem_from_json_string("{not json"); }) ==
        Errc::kParse);
  CHECK(thrown_message([] {
          problem_from_json_string(R"({"m":1,"b":[1.0],"C":{}})");
        }).find("'n'") != std::string::npos);
  CHECK(thrown_message([] {
          problem_from_json_string(
              R"({"m":1,"n":1,"b":[1.0],"C":{"format":"csr","data":[]}})");
        }).find("csr") != std::string::npos);
  // Structurally fine but invalid contents surface as validation errors.
  CHECK(thrown_code([] {
          problem_from_json_string(
              R"({"m":2,"n":1,"b":[0.0,5.0],"C":{"format":"dense","data":[[1],[1]]}})");
        }) == Errc::kValidation);
  CHECK(thrown_code([] {
          problem_from_json_string(
              R"({"m":2,"n":1,"b":[1.0,5.0],"C":{"format":"dense","data":[[0],[0]]}})");
        }) == Errc::kValidation);
  CHECK(thrown_code([] {
          problem_from_json_string(
              R"({"m":1,"n":1,"b":[1.0],"C":{"format":"dense","data":[[2]]}})");
        }) == Errc::kParse);
}
