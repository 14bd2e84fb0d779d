#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sdors/lp.hpp"
#include "sdors/rng.hpp"

using namespace sdors;

namespace {

MipModel knapsack_relaxation() {
  // min -4a - b - 3c - 8d  s.t.  2a + b + 3c + 3d <= 5,  0 <= vars <= 1
  MipModel m;
  m.add_col("a", VarKind::Continuous, 0, 1, -4);
  m.add_col("b", VarKind::Continuous, 0, 1, -1);
  m.add_col("c", VarKind::Continuous, 0, 1, -3);
  m.add_col("d", VarKind::Continuous, 0, 1, -8);
  m.add_row({{{0, 2.0}, {1, 1.0}, {2, 3.0}, {3, 3.0}}, RowSense::LE, 5.0, "cap"});
  return m;
}

void check_optimal_contracts(const MipModel& m, const LpSolution& sol) {
  REQUIRE(sol.status == LpStatus::Optimal);
  // primal feasibility
  for (int j = 0; j < m.num_cols(); ++j) {
    CHECK(sol.x[j] >= m.cols[j].lb - 1e-7);
    CHECK(sol.x[j] <= m.cols[j].ub + 1e-7);
  }
  for (const auto& row : m.rows) CHECK(row.violation(sol.x) <= 1e-7);
  // strong duality
  double dual = dual_objective(m, sol);
  CHECK(std::abs(sol.objective - dual) <= 1e-6 * (1.0 + std::abs(sol.objective)));
  // complementary slackness
  for (int i = 0; i < m.num_rows(); ++i) {
    double slack = m.rows[i].rhs - m.rows[i].activity(sol.x);
    CHECK(std::abs(sol.row_dual[i] * slack) <= 1e-5 * (1.0 + std::abs(sol.objective)));
  }
  // dual sign feasibility at bounds
  for (int j = 0; j < m.num_cols(); ++j) {
    double d = sol.red_cost[j];
    bool at_lb = std::abs(sol.x[j] - m.cols[j].lb) <= 1e-6;
    bool at_ub = std::abs(sol.x[j] - m.cols[j].ub) <= 1e-6;
    if (!at_lb && !at_ub) CHECK(std::abs(d) <= 1e-6);
  }
}

MipModel random_lp(SplitMix64& rng, int n, int m) {
  MipModel model;
  for (int j = 0; j < n; ++j) {
    double lb = rng.next_int(-3, 0);
    double ub = lb + rng.next_int(1, 5);
    model.add_col("x" + std::to_string(j), VarKind::Continuous, lb, ub,
                  rng.next_int(-10, 10));
  }
  for (int i = 0; i < m; ++i) {
    LinearRow row;
    for (int j = 0; j < n; ++j) {
      int c = rng.next_int(-4, 4);
      if (c != 0) row.coef.emplace_back(j, static_cast<double>(c));
    }
    int k = rng.next_int(0, 2);
    row.sense = k == 0 ? RowSense::LE : (k == 1 ? RowSense::GE : RowSense::EQ);
    row.rhs = rng.next_int(-6, 8);
    if (!row.coef.empty()) model.add_row(std::move(row));
  }
  return model;
}

}  // namespace

TEST_CASE("fixed variable, zero objective") {
  MipModel m;
  m.add_col("x", VarKind::Continuous, 0, 2, 0);
  m.add_row({{{0, 1.0}}, RowSense::EQ, 1.0, "fix"});
  LpSolution sol = solve_lp(m);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(0.0));
  CHECK(sol.x[0] == doctest::Approx(1.0));
}

TEST_CASE("fractional knapsack relaxation solves to the greedy optimum") {
  MipModel m = knapsack_relaxation();
  LpSolution sol = solve_lp(m);
  check_optimal_contracts(m, sol);
  // greedy ratio fill: d (8/3), then a (2) exhausts the capacity; value -12
  CHECK(sol.objective == doctest::Approx(-12.0));
  bool feasible = false;
  CHECK(oracle::lp_optimum_by_vertices(m, &feasible) == doctest::Approx(-12.0));
  CHECK(feasible);
}

TEST_CASE("conflicting bounds rows are infeasible") {
  MipModel m;
  m.add_col("x", VarKind::Continuous, -10, 10, 1);
  m.add_row({{{0, 1.0}}, RowSense::GE, 2.0, ""});
  m.add_row({{{0, 1.0}}, RowSense::LE, 1.0, ""});
  CHECK(solve_lp(m).status == LpStatus::Infeasible);
}

TEST_CASE("missing bound yields unbounded") {
  MipModel m;
  m.add_col("x", VarKind::Continuous, 0, kInf, -1);
  m.add_row({{{0, 1.0}}, RowSense::GE, 1.0, ""});
  CHECK(solve_lp(m).status == LpStatus::Unbounded);
}

TEST_CASE("agreement with vertex enumeration on random small LPs") {
  SplitMix64 rng(2024);
  int solved = 0;
  for (int trial = 0; trial < 300; ++trial) {
    int n = rng.next_int(2, 5);
    MipModel m = random_lp(rng, n, rng.next_int(1, 5));
    bool feasible = false;
    double ref = oracle::lp_optimum_by_vertices(m, &feasible);
    LpSolution sol = solve_lp(m);
    if (!feasible) {
      CHECK(sol.status == LpStatus::Infeasible);
      continue;
    }
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(ref).epsilon(1e-6));
    check_optimal_contracts(m, sol);
    ++solved;
  }
  CHECK(solved > 100);  // the generator must exercise the optimal path
}

TEST_CASE("warm solve equals cold solve on the unchanged model") {
  MipModel m = knapsack_relaxation();
  LpBasis basis;
  LpSolution cold = solve_lp(m, nullptr, &basis);
  LpSolution warm = solve_lp_warm(m, basis);
  REQUIRE(warm.status == LpStatus::Optimal);
  CHECK(warm.objective == doctest::Approx(cold.objective));
  CHECK(warm.iterations <= cold.iterations);
}

TEST_CASE("adding a redundant row keeps the warm objective") {
  MipModel m = knapsack_relaxation();
  LpBasis basis;
  LpSolution cold = solve_lp(m, nullptr, &basis);
  MipModel m2 = m;
  m2.add_row({{{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}}, RowSense::LE, 100.0, "loose"});
  LpSolution warm = solve_lp_warm(m2, basis);
  REQUIRE(warm.status == LpStatus::Optimal);
  CHECK(warm.objective == doctest::Approx(cold.objective));
}

TEST_CASE("a violated cut weakly increases the objective, warm or cold") {
  SplitMix64 rng(555);
  for (int trial = 0; trial < 100; ++trial) {
    int n = rng.next_int(2, 5);
    MipModel m = random_lp(rng, n, rng.next_int(1, 4));
    LpBasis basis;
    LpSolution first = solve_lp(m, nullptr, &basis);
    if (first.status != LpStatus::Optimal) continue;
    // cut off the optimum: sum of coordinates bounded away from the current value
    LinearRow cut;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      cut.coef.emplace_back(j, 1.0);
      act += first.x[j];
    }
    cut.sense = RowSense::LE;
    cut.rhs = act - 0.25;
    MipModel m2 = m;
    m2.add_row(cut);
    LpSolution warm = solve_lp_warm(m2, basis);
    LpSolution cold = solve_lp(m2);
    CHECK(warm.status == cold.status);
    if (cold.status == LpStatus::Optimal) {
      CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-7));
      CHECK(cold.objective >= first.objective - 1e-7);
    }
  }
}
