#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sdors/bnc.hpp"
#include "sdors/sampling.hpp"
#include "sdors/three_stage.hpp"

using namespace sdors;

namespace {

Instance desk_instance(int patients, int hospitals, int days, int rooms, std::uint64_t seed) {
  GenConfig cfg;
  cfg.patients = patients;
  cfg.hospitals = hospitals;
  cfg.days = days;
  cfg.rooms = rooms;
  cfg.seed = seed;
  return generate_instance(cfg);
}

// direct enumeration of the (h,d) subproblem: all room assignments of the
// patient list, per-scenario exhaustive knapsacks
double inner_optimum_bruteforce(const Instance& inst, const ScenarioSet& scen, int h, int d,
                                const std::vector<int>& phat, int rooms) {
  const int k = static_cast<int>(phat.size());
  std::vector<int> assign(k, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double total = 0.0;
    for (int s = 0; s < scen.count(); ++s)
      for (int r = 0; r < rooms; ++r) {
        SubproblemSpec spec;
        spec.capacity = inst.time_limit[h][d];
        for (int i = 0; i < k; ++i)
          if (assign[i] == r) {
            spec.patients.push_back(phat[i]);
            spec.weights.push_back(scen.durations[s][phat[i]]);
            spec.values.push_back(inst.patients[phat[i]].cancel_penalty);
          }
        total += oracle::knapsack_cancel_cost(spec);
      }
    best = std::min(best, total / scen.count());
    int i = 0;
    while (i < k && ++assign[i] >= rooms) assign[i++] = 0;
    if (i == k) break;
  }
  return best;
}

}  // namespace

TEST_CASE("master pre-creates the g switches and enforces room counts") {
  Instance inst = desk_instance(4, 2, 2, 3, 17);
  ScenarioSet scen = sample_scenarios(inst, 2, 18);
  ThreeStageModel ms = build_lbbd_master(inst, scen);
  int g_cols = 0;
  for (const auto& col : ms.model.cols)
    if (col.name.rfind("g_", 0) == 0) ++g_cols;
  CHECK(g_cols == 2 * 2 * (3 + 1));
  // y is integer with the room count as its upper bound
  CHECK(ms.model.cols[ms.idx.y(0, 0)].kind == VarKind::Integer);
  CHECK(ms.model.cols[ms.idx.y(0, 0)].ub == doctest::Approx(3.0));

  // LP relaxation of the aggregate master never exceeds the full model's
  SolveOptions opts;
  opts.gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Instance i2 = desk_instance(5, 1, 2, 2, seed);
    ScenarioSet s2 = sample_scenarios(i2, 2, seed + 50);
    ThreeStageModel m2 = build_lbbd_master(i2, s2);
    DeModel de = build_de(i2, s2);
    LpSolution agg = solve_lp(m2.model);
    LpSolution full = solve_lp(de.model);
    REQUIRE(agg.status == LpStatus::Optimal);
    REQUIRE(full.status == LpStatus::Optimal);
    CHECK(agg.objective <= full.objective + 1e-6);
  }
}

TEST_CASE("optimality cut pair encodes the switch logic") {
  Instance inst = desk_instance(3, 1, 1, 2, 23);
  ScenarioSet scen = sample_scenarios(inst, 1, 24);
  ThreeStageModel ms = build_lbbd_master(inst, scen);
  std::vector<int> phat{0, 1, 2};
  double qbar = 111.5;
  auto [lower, binder] = lbbd_cut_3(ms.idx, phat, 0, 0, 1, qbar);

  std::vector<double> x(ms.model.num_cols(), 0.0);
  // full retention with the switch on: Q >= qbar
  for (int p : phat) x[ms.idx.x(0, 0, p)] = 1.0;
  x[ms.idx.g(0, 0, 1)] = 1.0;
  x[ms.idx.y(0, 0)] = 1.0;
  x[ms.idx.q(0, 0)] = qbar - 1.0;
  CHECK(lower.row.violation(x) > 0.0);
  x[ms.idx.q(0, 0)] = qbar;
  CHECK(lower.row.violation(x) <= 1e-9);
  CHECK(binder.row.violation(x) <= 1e-9);

  // switch off: the Q bound relaxes but more rooms are forced
  x[ms.idx.g(0, 0, 1)] = 0.0;
  x[ms.idx.q(0, 0)] = 0.0;
  CHECK(lower.row.violation(x) <= 1e-9);
  CHECK(binder.row.violation(x) > 0.0);  // y=1 < 2 is no longer allowed
  x[ms.idx.y(0, 0)] = 2.0;
  CHECK(binder.row.violation(x) <= 1e-9);
}

TEST_CASE("cut pair never excludes exactly-priced feasible aggregates") {
  Instance inst = desk_instance(6, 1, 1, 2, 29);
  ScenarioSet scen = sample_scenarios(inst, 2, 30);
  ThreeStageModel ms = build_lbbd_master(inst, scen);
  const int P = 6;

  // generating proposal: first four patients, one room
  std::vector<int> phat{0, 1, 2, 3};
  int yhat = 1;
  double qbar = inner_optimum_bruteforce(inst, scen, 0, 0, phat, yhat);
  auto [lower, binder] = lbbd_cut_3(ms.idx, phat, 0, 0, yhat, qbar);

  for (unsigned set = 0; set < (1u << P); ++set) {
    std::vector<int> sub;
    for (int p = 0; p < P; ++p)
      if (set >> p & 1u) sub.push_back(p);
    for (int y = sub.empty() ? 0 : 1; y <= 2; ++y) {
      if (!sub.empty() && y == 0) continue;
      double truth = sub.empty() ? 0.0 : inner_optimum_bruteforce(inst, scen, 0, 0, sub, y);
      std::vector<double> x(ms.model.num_cols(), 0.0);
      for (int p : sub) x[ms.idx.x(0, 0, p)] = 1.0;
      x[ms.idx.y(0, 0)] = y;
      x[ms.idx.q(0, 0)] = truth;
      for (int j = 0; j <= ms.idx.R; ++j) x[ms.idx.g(0, 0, j)] = (y <= j) ? 1.0 : 0.0;
      CHECK(lower.row.violation(x) <= 1e-6);
      CHECK(binder.row.violation(x) <= 1e-6);
    }
  }
}

TEST_CASE("early stop fires exactly when the bound seals the candidate") {
  CHECK_FALSE(early_stop(kInf, -100.0, 5.0));          // no incumbent sentinel
  CHECK(early_stop(-100.0, -100.0, 5.0));              // bound already worse
  CHECK_FALSE(early_stop(-95.0, -100.0, 5.0));         // exactly at the edge
  CHECK_FALSE(early_stop(-90.0, -100.0, 5.0));         // candidate still viable
  CHECK_FALSE(early_stop(-100.0, -100.0, 0.0));        // zero bound never seals
}

TEST_CASE("inner decomposition equals direct enumeration and the full engine") {
  for (std::uint64_t seed : {11, 12, 13}) {
    Instance inst = desk_instance(5, 1, 1, 2, seed);
    ScenarioSet scen = sample_scenarios(inst, 3, seed + 5);
    std::vector<int> phat{0, 1, 2, 3, 4};
    InnerResult res = solve_lbbd_subproblem(inst, scen, 0, 0, phat, 2, 0.0, nullptr);
    REQUIRE(res.exact);
    double ref = inner_optimum_bruteforce(inst, scen, 0, 0, phat, 2);
    CHECK(res.qbar == doctest::Approx(ref).epsilon(1e-7));
    CHECK(res.ub == doctest::Approx(ref).epsilon(1e-7));
  }
}

TEST_CASE("inner decomposition collapses for a single room") {
  Instance inst = desk_instance(4, 1, 1, 1, 44);
  ScenarioSet scen = sample_scenarios(inst, 3, 45);
  std::vector<int> phat{0, 1, 2, 3};
  InnerResult res = solve_lbbd_subproblem(inst, scen, 0, 0, phat, 1, 0.0, nullptr);
  REQUIRE(res.exact);
  double expect = 0.0;
  std::vector<std::uint8_t> all(4, 1);
  for (int s = 0; s < 3; ++s)
    expect += oracle::knapsack_cancel_cost(build_cancellation_subproblem(inst, all, 0, 0, s, scen));
  CHECK(res.qbar == doctest::Approx(expect / 3.0).epsilon(1e-7));
}

TEST_CASE("two fitting patients across two rooms cancel nothing") {
  Instance inst = desk_instance(2, 1, 1, 2, 52);
  ScenarioSet scen = sample_scenarios(inst, 2, 53);
  InnerResult res = solve_lbbd_subproblem(inst, scen, 0, 0, {0, 1}, 2, 0.0, nullptr);
  REQUIRE(res.exact);
  CHECK(res.qbar == doctest::Approx(0.0));
}

TEST_CASE("assignment lp cut is tight at its origin under strong duality") {
  Instance inst = desk_instance(5, 1, 1, 2, 61);
  ScenarioSet scen = sample_scenarios(inst, 2, 62);
  std::vector<double> xhat(5, 0.0);
  xhat[0] = xhat[1] = xhat[3] = 1.0;
  AssignmentLpCut cut = assignment_lp_cut(inst, scen, 0, 0, xhat, 2.0);
  double rhs = cut.delta_sum + cut.beta * 2.0;
  for (int p = 0; p < 5; ++p) rhs += cut.gamma[p] * xhat[p];
  CHECK(rhs == doctest::Approx(cut.objective).epsilon(1e-6));
  // with slack capacity everywhere the bound cannot exceed the exact cost
  double exact = inner_optimum_bruteforce(inst, scen, 0, 0, {0, 1, 3}, 2);
  CHECK(cut.objective <= exact + 1e-6);
}

TEST_CASE("qlb2 aggregate bounds never exceed the exact inner cost") {
  SplitMix64 rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    Instance inst = desk_instance(5, 1, 1, 2, 700 + trial);
    ScenarioSet scen = sample_scenarios(inst, 2, 800 + trial);
    ThreeStageModel ms = build_lbbd_master(inst, scen);
    std::vector<Cut> cuts = qlb2_bounds(inst, scen, ms.idx);
    REQUIRE(cuts.size() == 1);
    std::vector<int> sub;
    for (int p = 0; p < 5; ++p)
      if (rng.next_unit() < 0.6) sub.push_back(p);
    int y = 1 + rng.next_int(0, 1);
    double truth = sub.empty() ? 0.0 : inner_optimum_bruteforce(inst, scen, 0, 0, sub, y);
    std::vector<double> x(ms.model.num_cols(), 0.0);
    for (int p : sub) x[ms.idx.x(0, 0, p)] = 1.0;
    x[ms.idx.y(0, 0)] = y;
    x[ms.idx.q(0, 0)] = truth;
    CHECK(cuts[0].row.violation(x) <= 1e-9);
  }
}

TEST_CASE("three-stage reaches the exact optimum on small instances") {
  for (std::uint64_t seed : {211, 212}) {
    Instance inst = desk_instance(5, 1, 2, 1, seed);
    ScenarioSet scen = sample_scenarios(inst, 2, seed + 9);
    double exact = oracle::de_optimum(inst, scen);
    AlgoConfig cfg;
    cfg.gap = 0.0;
    TwoStageResult res = solve_three_stage(inst, scen, cfg);
    REQUIRE(res.report.has_incumbent);
    CHECK(res.report.objective == doctest::Approx(exact).epsilon(1e-7));
    validate_schedule(inst, res.schedule);
    CHECK(res.schedule.objective() == doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("three-stage still converges when the warm start is unavailable") {
  Instance inst = desk_instance(4, 1, 1, 2, 219);
  for (auto& p : inst.patients) {
    p.urgency = 5;
    p.wait_days = 120;
    apply_cost_formulas(inst, p);
  }
  inst.time_limit = {{90}};  // nothing fits: FFD must fail, the model must not
  ScenarioSet scen;
  scen.durations = {{160, 170, 150, 160}};
  AlgoConfig cfg;
  cfg.gap = 0.0;
  TwoStageResult res = solve_three_stage(inst, scen, cfg);
  REQUIRE(res.report.has_incumbent);  // complete recourse: cancel everyone
  CHECK(res.report.objective == doctest::Approx(oracle::de_optimum(inst, scen)).epsilon(1e-7));
}

TEST_CASE("early stopping does not change the converged objective") {
  for (std::uint64_t seed : {301, 302}) {
    Instance inst = desk_instance(6, 1, 2, 2, seed);
    ScenarioSet scen = sample_scenarios(inst, 2, seed + 77);
    AlgoConfig cfg;
    cfg.gap = 0.0;
    TwoStageResult a = solve_three_stage(inst, scen, cfg);
    AlgoConfig no_ffd = cfg;  // different phase-one path exercises stopping
    no_ffd.use_ffd = false;
    TwoStageResult b = solve_three_stage(inst, scen, no_ffd);
    REQUIRE(a.report.has_incumbent);
    REQUIRE(b.report.has_incumbent);
    CHECK(a.report.objective == doctest::Approx(b.report.objective).epsilon(1e-7));
  }
}
