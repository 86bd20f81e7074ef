#include "numdual/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <Eigen/Dense>

namespace numdual {

double feasibility_violation(const NetworkProblem& p, const PrimalPoint& x) {
  const Vec loads = link_loads(p, x);
  double sq = 0.0;
  for (int j = 0; j < p.m(); ++j) {
    const double over = loads[j] - p.b()[j];
    if (over > 0.0) sq += over * over;
  }
  return std::sqrt(sq);
}

double duality_gap(const NetworkProblem& p, const DualPoint& lambda,
                   const PrimalPoint& x) {
  return dual_value(p, lambda) - total_utility(p, x);
}

namespace {

// Largest rate user k could ever pick at an optimum: beyond the unconstrained
// maximizer (quadratic) or the clipping box (log) utility only falls while
// constraints tighten, and no user can exceed the smallest capacity it uses.
double upper_rate_bound(const NetworkProblem& p, int k) {
  const UtilitySpec& u = p.utilities_checked();
  double cap = std::numeric_limits<double>::infinity();
  for (int j : p.links_of(k)) cap = std::min(cap, p.b()[j]);
  if (u.family == UtilityFamily::kQuadratic)
    return std::min(cap, u.a[k] / (u.sigma * p.n()));
  return std::min(cap, u.x_hi);
}

double lower_rate_bound(const NetworkProblem& p) {
  const UtilitySpec& u = p.utilities_checked();
  return u.family == UtilityFamily::kLogarithmic ? u.x_lo : 0.0;
}

// Rough accelerated projected-gradient pass over the dual.  Only the sign
// pattern a_k vs price_k matters: it seeds the exact active-set iteration in
// kkt_solve so it starts near the optimal responding set instead of cycling
// through far-away ones.
std::vector<char> warm_responding_set(const NetworkProblem& p) {
  const UtilitySpec& u = p.utilities_checked();
  const int m = p.m(), n = p.n();
  const double curvature = u.sigma * n;
  double row = 1.0;
  for (int k = 0; k < n; ++k)
    row = std::max(row, static_cast<double>(p.links_of(k).size()));
  const double lips = n * row * row / curvature;
  Vec lam(m, 0.0), prev(m, 0.0), y(m, 0.0);
  for (int t = 1; t <= 4000; ++t) {
    const Vec loads = link_loads(p, primal_response(p, DualPoint{y}));
    for (int j = 0; j < m; ++j)
      lam[j] = std::max(0.0, y[j] - (p.b()[j] - loads[j]) / lips);
    const double beta = (t - 1.0) / (t + 2.0);
    for (int j = 0; j < m; ++j)
      y[j] = std::max(0.0, lam[j] + beta * (lam[j] - prev[j]));
    prev = lam;
  }
  std::vector<char> in_p(n);
  for (int k = 0; k < n; ++k) {
    double price = 0.0;
    for (int j : p.links_of(k)) price += lam[j];
    in_p[k] = u.a[k] > price ? 1 : 0;
  }
  return in_p;
}

// Strict feasibility: any slack here would let the refinement loop "improve"
// past the true optimum by a tolerance-sized margin.
bool grid_feasible(const NetworkProblem& p, const Vec& x) {
  const Vec loads = link_loads(p, PrimalPoint{x});
  for (int j = 0; j < p.m(); ++j)
    if (loads[j] > p.b()[j]) return false;
  return true;
}

}  // namespace

BruteForceSolution grid_solve(const NetworkProblem& p, int points_per_axis) {
  const int n = p.n();
  if (n > 4)
    fail(Errc::kUnsupported, "grid_solve handles at most 4 users");
  int g = points_per_axis;
  if (g <= 1) g = (n == 1) ? 1025 : (n == 2) ? 257 : (n == 3) ? 49 : 21;

  Vec lo(n, lower_rate_bound(p)), hi(n);
  for (int k = 0; k < n; ++k) {
    hi[k] = upper_rate_bound(p, k);
    if (hi[k] < lo[k]) hi[k] = lo[k];
  }

  Vec best_x(lo);
  double best_value = -std::numeric_limits<double>::infinity();
  if (grid_feasible(p, best_x)) best_value = total_utility(p, PrimalPoint{best_x});

  // Full scan, then repeatedly re-grid a shrinking box around the incumbent;
  // with a concave objective this converges to the maximizer.
  Vec box_lo = lo, box_hi = hi;
  for (int round = 0; round < 12; ++round) {
    std::vector<int> idx(n, 0);
    Vec x(n);
    while (true) {
      for (int k = 0; k < n; ++k) {
        const double t = (g == 1) ? 0.0 : static_cast<double>(idx[k]) / (g - 1);
        x[k] = box_lo[k] + t * (box_hi[k] - box_lo[k]);
      }
      if (grid_feasible(p, x)) {
        const double value = total_utility(p, PrimalPoint{x});
        if (value > best_value) {
          best_value = value;
          best_x = x;
        }
      }
      int k = 0;
      while (k < n && ++idx[k] == g) idx[k++] = 0;
      if (k == n) break;
    }
    // Shrink towards the incumbent, never leaving the global bounds.
    for (int k = 0; k < n; ++k) {
      const double step =
          (g == 1) ? 0.0 : (box_hi[k] - box_lo[k]) / (g - 1);
      box_lo[k] = std::max(lo[k], best_x[k] - 3.0 * step);
      box_hi[k] = std::min(hi[k], best_x[k] + 3.0 * step);
    }
  }

  BruteForceSolution out;
  out.x = PrimalPoint{best_x};
  out.value = best_value;
  out.backend = "grid";
  return out;
}

BruteForceSolution kkt_solve(const NetworkProblem& p) {
  const UtilitySpec& u = p.utilities_checked();
  if (u.family != UtilityFamily::kQuadratic)
    fail(Errc::kUnsupported, "kkt_solve requires quadratic utilities");
  if (p.m() > 10)
    fail(Errc::kUnsupported, "kkt_solve handles at most 10 links");

  const int m = p.m(), n = p.n();
  const double curvature = u.sigma * n;  // u_k'' = -sigma * n

  BruteForceSolution best;
  best.value = -std::numeric_limits<double>::infinity();
  best.backend = "kkt";

  const std::vector<char> warm = warm_responding_set(p);

  Vec lambda(m), prices(n), x(n);
  // Try every candidate set S of links held exactly at capacity.
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> active;
    for (int j = 0; j < m; ++j)
      if (mask & (1 << j)) active.push_back(j);
    const int s = static_cast<int>(active.size());

    // Find the responding-user set P = {k : a_k > price_k} consistent with
    // prices solving sum_{k in P} C_k^j x_k = b_j on S.  Wholesale updates of
    // P can cycle, so flip one user per pass and detect repeats; on a cycle
    // fall back to the lowest-index rule from the all-in set.
    std::fill(lambda.begin(), lambda.end(), 0.0);
    bool settled = (s == 0);
    for (int strategy = 0; strategy < 2 && !settled; ++strategy) {
      std::vector<char> in_p =
          (strategy == 0) ? warm : std::vector<char>(n, 1);
      std::set<std::vector<char>> seen{in_p};
      for (int pass = 0; pass < 2 * n + 60; ++pass) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(s, s);
        Eigen::VectorXd rhs(s);
        for (int uu = 0; uu < s; ++uu)
          rhs(uu) = -p.b()[active[uu]];
        for (int k = 0; k < n; ++k) {
          if (!in_p[k]) continue;
          const auto& route = p.links_of(k);
          std::vector<int> pos;  // positions of this user's active links
          for (int uu = 0; uu < s; ++uu)
            if (std::binary_search(route.begin(), route.end(), active[uu]))
              pos.push_back(uu);
          for (int uu : pos) {
            rhs(uu) += u.a[k] / curvature;
            for (int vv : pos) A(uu, vv) += 1.0 / curvature;
          }
        }
        Eigen::VectorXd sol =
            A.completeOrthogonalDecomposition().solve(rhs);
        std::fill(lambda.begin(), lambda.end(), 0.0);
        for (int uu = 0; uu < s; ++uu) lambda[active[uu]] = sol(uu);

        int worst = -1;
        double worst_v = 0.0;
        for (int k = 0; k < n; ++k) {
          double price = 0.0;
          for (int j : p.links_of(k)) price += lambda[j];
          prices[k] = price;
          const double margin = u.a[k] - price;  // >0 means k wants to send
          const double v = in_p[k] ? -margin : margin;
          if (v <= 1e-9 * (1.0 + std::fabs(u.a[k]))) continue;
          if (strategy == 0 ? v > worst_v : worst < 0) {
            worst_v = v;
            worst = k;
          }
        }
        if (worst < 0) {
          settled = true;
          break;
        }
        in_p[worst] ^= 1;
        if (!seen.insert(in_p).second) break;  // cycling; try next strategy
      }
    }
    if (!settled) continue;

    // Tiny negative multipliers are numerical noise; anything worse
    // disqualifies the subset.
    double scale = 1.0;
    for (int j = 0; j < m; ++j) scale = std::max(scale, std::fabs(lambda[j]));
    bool dual_ok = true;
    for (int j = 0; j < m; ++j) {
      if (lambda[j] < -1e-9 * scale) dual_ok = false;
      if (lambda[j] < 0.0) lambda[j] = 0.0;
    }
    if (!dual_ok) continue;

    for (int k = 0; k < n; ++k) {
      double price = 0.0;
      for (int j : p.links_of(k)) price += lambda[j];
      x[k] = best_response(p, k, price);
    }
    const Vec loads = link_loads(p, PrimalPoint{x});
    bool kkt_ok = true;
    for (int j = 0; j < m && kkt_ok; ++j) {
      const double slack = p.b()[j] - loads[j];
      if (slack < -1e-8 * (1.0 + p.b()[j])) kkt_ok = false;          // feasible
      if (lambda[j] > 1e-12 && std::fabs(slack) > 1e-7 * (1.0 + p.b()[j]))
        kkt_ok = false;                                              // complementary
    }
    if (!kkt_ok) continue;

    const double value = total_utility(p, PrimalPoint{x});
    if (value > best.value) {
      best.value = value;
      best.x = PrimalPoint{x};
      best.lambda = DualPoint{lambda};
    }
  }

  if (!std::isfinite(best.value))
    fail(Errc::kInternal, "kkt_solve found no KKT-certified candidate");
  return best;
}

BruteForceSolution brute_force_solve(const NetworkProblem& p) {
  const UtilitySpec& u = p.utilities_checked();
  if (u.family == UtilityFamily::kQuadratic && p.m() <= 10) return kkt_solve(p);
  if (p.n() <= 4) return grid_solve(p);
  fail(Errc::kUnsupported,
       "brute_force_solve needs quadratic utilities with m <= 10 or n <= 4");
}

}  // namespace numdual
