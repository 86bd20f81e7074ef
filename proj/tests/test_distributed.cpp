#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "numdual/distributed.hpp"
#include "numdual/problem.hpp"
#include "numdual/rng.hpp"
#include "numdual/solvers.hpp"
#include "test_util.hpp"

using namespace numdual;
using numdual::testing::thrown_code;

namespace {

NetworkProblem bench_instance() {
  NetworkProblem p = generate_random_network(3, 10, 42);
  p.set_utilities(make_quadratic_utilities(10, 43));
  return p;
}

SolverConfig bench_config(std::uint64_t seed = 5) {
  SolverConfig c;
  c.eps = 1e-3;  // keeps the fgm schedule far above the cap
  c.R = 5.0;
  c.seed = seed;
  c.max_iter = 100;
  c.record_every = 1;
  c.record_duals = true;
  return c;
}

bool incident(const NetworkProblem& p, int j, int k) {
  const auto& route = p.links_of(k);
  return std::find(route.begin(), route.end(), j) != route.end();
}

// Asserts the link<->user locality contract on every delivered message.
MessageHook locality_checker(const NetworkProblem& p, long long* count) {
  return [&p, count](const Message& msg) {
    ++*count;
    int link = -1, user = -1;
    if (msg.kind == MessageKind::kPriceUpdate) {
      REQUIRE(msg.from.is_link);
      REQUIRE(!msg.to.is_link);
      link = msg.from.index;
      user = msg.to.index;
    } else {
      REQUIRE(!msg.from.is_link);
      REQUIRE(msg.to.is_link);
      user = msg.from.index;
      link = msg.to.index;
    }
    REQUIRE(link >= 0);
    REQUIRE(link < p.m());
    REQUIRE(user >= 0);
    REQUIRE(user < p.n());
    REQUIRE(incident(p, link, user));
    REQUIRE(std::isfinite(msg.payload));
  };
}

}  // namespace

TEST_CASE("distributed runs reproduce the centralized dual paths") {
  NetworkProblem p = bench_instance();
  for (Method method :
       {Method::kFgm, Method::kSgm1, Method::kSgm2, Method::kRgem}) {
    CAPTURE(method_name(method));
    SolverConfig c = bench_config();
    SolverReport central = solve(p, method, c);
    DistributedResult dist = run_distributed(p, method, c);
    CHECK(compare_traces(central, dist.report) == 0.0);
    CHECK(central.lambda == dist.report.lambda);
    CHECK(dist.report.message_count == dist.message_count);
    // The actors keep the one-sample primal estimate, so sgm1's full-average
    // x_hat has no distributed twin; every other method matches exactly.
    if (method == Method::kSgm1) continue;
    CHECK(central.x_hat == dist.report.x_hat);
    REQUIRE(central.history.size() == dist.report.history.size());
    for (std::size_t i = 0; i < central.history.size(); ++i) {
      CHECK(central.history[i].phi == dist.report.history[i].phi);
      CHECK(central.history[i].gap == dist.report.history[i].gap);
      CHECK(central.history[i].feas == dist.report.history[i].feas);
    }
  }
}

TEST_CASE("distributed fgm equivalence holds from a warm start") {
  NetworkProblem p = bench_instance();
  SolverConfig c = bench_config();
  c.lambda0 = Vec(static_cast<std::size_t>(p.m()), 0.5);
  SolverReport central = solve_fgm(p, c);
  DistributedResult dist = run_distributed(p, Method::kFgm, c);
  CHECK(compare_traces(central, dist.report) == 0.0);

  SolverConfig bad = c;
  bad.lambda0 = {-1.0, 0.0, 0.0};
  CHECK(thrown_code([&] { run_distributed(p, Method::kFgm, bad); }) ==
        Errc::kValidation);
}

TEST_CASE("every message respects the routing matrix") {
  NetworkProblem p = bench_instance();
  for (Method method :
       {Method::kFgm, Method::kSgm1, Method::kSgm2, Method::kRgem}) {
    CAPTURE(method_name(method));
    long long seen = 0;
    DistributedResult dist =
        run_distributed(p, method, bench_config(), locality_checker(p, &seen));
    CHECK(seen == dist.message_count);
    CHECK(dist.message_count > 0);
  }
}

TEST_CASE("fgm message volume is two passes over the routing matrix per round") {
  NetworkProblem p = bench_instance();
  SolverConfig c = bench_config();
  DistributedResult dist = run_distributed(p, Method::kFgm, c);
  const long long rounds = dist.report.iterations + 1;  // bootstrap exchange
  CHECK(dist.message_count == rounds * 2 * p.nnz());
}

TEST_CASE("sgm talks only to the drawn user's links") {
  NetworkProblem p = bench_instance();
  SolverConfig c = bench_config(11);

  // Replay the draw sequence the solver consumes.
  std::vector<int> drawn;
  RandomStream draws(c.seed);
  for (long long t = 0; t < c.max_iter; ++t)
    drawn.push_back(static_cast<int>(draws.next_index(p.n())));

  long long expected = 0;
  for (int k : drawn) expected += 2 * p.degree(k);

  std::map<long long, std::set<int>> links_per_tick;
  std::map<long long, std::set<int>> users_per_tick;
  MessageHook hook = [&](const Message& msg) {
    const int link = msg.kind == MessageKind::kPriceUpdate ? msg.from.index
                                                           : msg.to.index;
    const int user = msg.kind == MessageKind::kPriceUpdate ? msg.to.index
                                                           : msg.from.index;
    links_per_tick[msg.tick].insert(link);
    users_per_tick[msg.tick].insert(user);
  };
  DistributedResult dist = run_distributed(p, Method::kSgm2, c, hook);
  CHECK(dist.message_count == expected);

  for (const auto& [tick, users] : users_per_tick) {
    REQUIRE(tick >= 0);
    REQUIRE(tick < c.max_iter);
    const int xi = drawn[static_cast<std::size_t>(tick)];
    CHECK(users == std::set<int>{xi});
    const auto& route = p.links_of(xi);
    CHECK(links_per_tick[tick] == std::set<int>(route.begin(), route.end()));
  }
}

TEST_CASE("rgem message volume follows the drawn degrees") {
  NetworkProblem p = bench_instance();
  SolverConfig c = bench_config(13);
  std::vector<int> drawn;
  RandomStream draws(c.seed);
  for (long long t = 0; t < c.max_iter; ++t)
    drawn.push_back(static_cast<int>(draws.next_index(p.n())));
  long long expected = 0;
  for (int k : drawn) expected += 2 * p.degree(k);
  DistributedResult dist = run_distributed(p, Method::kRgem, c);
  CHECK(dist.message_count == expected);
}

TEST_CASE("sgm distributed runs differ across seeds") {
  NetworkProblem p = bench_instance();
  DistributedResult a = run_distributed(p, Method::kSgm2, bench_config(1));
  DistributedResult b = run_distributed(p, Method::kSgm2, bench_config(2));
  CHECK(compare_traces(a.report, b.report) > 0.0);
}

TEST_CASE("the ellipsoid method has no distributed protocol") {
  NetworkProblem p = bench_instance();
  CHECK(thrown_code([&] {
          run_distributed(p, Method::kEllipsoid, bench_config());
        }) == Errc::kUnsupported);
}

TEST_CASE("distributed fgm needs a smooth dual") {
  NetworkProblem p = generate_uniform_network(2, 3, 2.0);
  p.set_utilities(make_log_utilities(p));
  CHECK(thrown_code([&] {
          run_distributed(p, Method::kFgm, bench_config());
        }) == Errc::kUnsupported);
}

TEST_CASE("trace comparison demands comparable recordings") {
  NetworkProblem p = bench_instance();
  SolverConfig with = bench_config();
  SolverConfig without = bench_config();
  without.record_duals = false;
  SolverReport a = solve(p, Method::kSgm2, with);
  SolverReport b = solve(p, Method::kSgm2, without);
  CHECK(thrown_code([&] { compare_traces(a, b); }) == Errc::kInvalidArgument);

  SolverReport odd, even;
  odd.dual_trace = {{1, {0.0}}, {3, {0.0}}};
  even.dual_trace = {{0, {0.0}}, {2, {0.0}}};
  CHECK(thrown_code([&] { compare_traces(odd, even); }) ==
        Errc::kInvalidArgument);

  SolverReport narrow, wide;
  narrow.dual_trace = {{0, {0.0}}};
  wide.dual_trace = {{0, {0.0, 0.0}}};
  CHECK(thrown_code([&] { compare_traces(narrow, wide); }) ==
        Errc::kInvalidArgument);

  // Identical traces compare to zero deviation.
  CHECK(compare_traces(a, a) == 0.0);
}
