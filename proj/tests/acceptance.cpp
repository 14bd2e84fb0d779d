// Acceptance suite: one pass/fail line per criterion, exit code equals the
// number of failures. Tolerances are pinned in code next to each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sdors/bdd.hpp"
#include "sdors/bnc.hpp"
#include "sdors/core_models.hpp"
#include "sdors/json_io.hpp"
#include "sdors/lp.hpp"
#include "sdors/saa.hpp"
#include "sdors/sampling.hpp"
#include "sdors/three_stage.hpp"
#include "sdors/two_stage.hpp"

using namespace sdors;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, double seconds,
            const std::string& detail = "") {
  std::printf("%s  criterion %d: %s (%.2fs)%s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              seconds, detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename F>
void run(int id, const std::string& name, F&& body) {
  auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, name, pass, secs, detail);
}

Instance desk_instance(int patients, int hospitals, int days, int rooms, std::uint64_t seed) {
  GenConfig cfg;
  cfg.patients = patients;
  cfg.hospitals = hospitals;
  cfg.days = days;
  cfg.rooms = rooms;
  cfg.seed = seed;
  return generate_instance(cfg);
}

TwoStageResult solve_stochastic(const Instance& inst, const ScenarioSet& scen, double gap,
                                ExactCutFamily family = ExactCutFamily::Lbbd) {
  AlgoConfig cfg;
  cfg.family = family;
  cfg.gap = gap;
  return solve_two_stage(inst, scen, cfg);
}

Schedule solve_deterministic(const Instance& inst) {
  std::vector<int> nominal(inst.num_patients(), static_cast<int>(std::lround(inst.duration.mean)));
  DorsModel dors = build_deterministic_dors(inst, nominal);
  SolveOptions opts;
  opts.gap = 0.01;
  SolveReport rep = solve(dors.model, nullptr, nullptr, opts);
  if (!rep.has_incumbent) throw std::runtime_error("deterministic baseline infeasible");
  Schedule sched = empty_schedule(inst);
  const FirstStageIndex& idx = dors.idx;
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d) {
      sched.suite_open[h][d] = rep.x[idx.u(h, d)] > 0.5;
      int open = 0;
      for (int r = 0; r < idx.R; ++r)
        if (rep.x[idx.y(h, d, r)] > 0.5) open = r + 1;
      sched.rooms_open[h][d] = open;
      for (int r = 0; r < idx.R; ++r)
        for (int p = 0; p < idx.P; ++p)
          if (rep.x[idx.x(h, d, p, r)] > 0.5) {
            sched.room_patients[h][d][r].push_back(p);
            sched.postponed[p] = 0;
          }
    }
  sched.operational_cost = operational_cost(inst, sched);
  return sched;
}

double saa_gap_for(const Instance& inst, int scenarios_per_rep, std::uint64_t seed) {
  SaaConfig cfg;
  cfg.replications = 10;
  cfg.scenarios_per_replication = scenarios_per_rep;
  cfg.select_samples = 200;
  cfg.ub_samples = 1000;
  cfg.seed = seed;
  SaaReport rep = saa_bounds(inst, cfg, [](const Instance& i, const ScenarioSet& s) {
    return solve_stochastic(i, s, 0.01);
  });
  return rep.worst_case_gap;
}

}  // namespace

int main() {
  run(1, "four-patient diagram fidelity", [](std::string& detail) {
    auto t0 = std::chrono::steady_clock::now();
    SubproblemSpec spec;
    spec.patients = {0, 1, 2, 3};
    spec.weights = {2, 1, 3, 3};
    spec.values = {4.0, 1.0, 3.0, 8.0};
    spec.capacity = 5;
    std::vector<int> order{0, 1, 2, 3};
    Diagram dia = build_diagram(spec, order);
    PathResult path = shortest_path(dia);
    double micros =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();

    bool ok = std::abs(path.cancel_cost - 4.0) < 1e-12;
    // the keep-first-two path must exist with length exactly -5
    const DiagramNode& root = dia.nodes[dia.root()];
    ok = ok && root.one_arc >= 0;
    double len = 0.0;
    if (ok) {
      const DiagramArc& a1 = dia.arcs[root.one_arc];
      const DiagramNode& b = dia.nodes[a1.to];
      ok = ok && b.one_arc >= 0;
      if (ok) {
        const DiagramArc& a2 = dia.arcs[b.one_arc];
        const DiagramNode& dn = dia.nodes[a2.to];
        ok = ok && dn.one_arc < 0 && dn.zero_arc >= 0;
        if (ok) {
          const DiagramArc& a3 = dia.arcs[dn.zero_arc];
          const DiagramNode& fn = dia.nodes[a3.to];
          ok = ok && fn.zero_arc >= 0 && dia.arcs[fn.zero_arc].to == dia.terminal();
          if (ok) len = a1.cost + a2.cost + a3.cost + dia.arcs[fn.zero_arc].cost;
        }
      }
    }
    ok = ok && std::abs(len + 5.0) < 1e-12;
    ok = ok && dia.nodes.size() == 8;
    ok = ok && micros < 1000.0;  // < 1 ms
    detail = "Qbar=" + std::to_string(path.cancel_cost) + " pathlen=" + std::to_string(len) +
             " build+solve=" + std::to_string(micros) + "us";
    return ok;
  });

  run(2, "cross-algorithm exactness on 25 random instances", [](std::string& detail) {
    SplitMix64 rng(2024);
    const std::vector<std::array<int, 3>> shapes = {
        {1, 1, 1}, {1, 2, 1}, {2, 1, 1}, {2, 2, 1}, {1, 1, 2}, {2, 1, 2}, {1, 2, 2}};
    int enumerated = 0;
    for (int k = 0; k < 25; ++k) {
      int patients = rng.next_int(4, 10);
      auto [H, D, R] = shapes[rng.next_int(0, static_cast<int>(shapes.size()) - 1)];
      int S = rng.next_int(1, 5);
      Instance inst = desk_instance(patients, H, D, R, 10000 + k);
      ScenarioSet scen = sample_scenarios(inst, S, 20000 + k);

      AlgoConfig base;
      base.gap = 0.0;
      TwoStageResult de_res = solve_de_direct(inst, scen, base);
      if (!de_res.report.has_incumbent) {
        detail = "instance " + std::to_string(k) + ": no incumbent from the full model";
        return false;
      }
      double ref = de_res.report.objective;
      AlgoConfig lbbd = base;
      lbbd.family = ExactCutFamily::Lbbd;
      AlgoConfig bdd = base;
      bdd.family = ExactCutFamily::Bdd;
      double v_lbbd = solve_two_stage(inst, scen, lbbd).report.objective;
      double v_bdd = solve_two_stage(inst, scen, bdd).report.objective;
      double v_three = solve_three_stage(inst, scen, base).report.objective;
      double scale = 1.0;
      if (std::abs(v_lbbd - ref) > 1e-6 * scale || std::abs(v_bdd - ref) > 1e-6 * scale ||
          std::abs(v_three - ref) > 1e-6 * scale) {
        detail = "instance " + std::to_string(k) + ": de=" + std::to_string(ref) +
                 " lbbd=" + std::to_string(v_lbbd) + " bdd=" + std::to_string(v_bdd) +
                 " three=" + std::to_string(v_three);
        return false;
      }
      if (patients <= 8 && H * D * R <= 4) {
        double brute = oracle::de_optimum(inst, scen);
        if (std::abs(brute - ref) > 1e-6) {
          detail = "instance " + std::to_string(k) + ": enumeration " + std::to_string(brute) +
                   " vs " + std::to_string(ref);
          return false;
        }
        ++enumerated;
      }
    }
    detail = "25 instances agreed; " + std::to_string(enumerated) + " verified by enumeration";
    return true;
  });

  run(3, "cut validity suites", [](std::string& detail) {
    SplitMix64 rng(303);
    long checked = 0;
    // (a) optimality cuts against exhaustive (x, Q-exact) points
    for (int trial = 0; trial < 200; ++trial) {
      SubproblemSpec spec = oracle::random_spec(rng, 8);
      const int n = spec.size();
      Diagram dia = build_diagram(spec);
      std::vector<std::uint8_t> origin(n);
      for (auto& b : origin) b = rng.next_unit() < 0.8;
      double qbar = oracle::knapsack_cancel_cost(spec, &origin);

      // LBBD form evaluated over every assignment
      std::vector<int> phat;
      for (int i = 0; i < n; ++i)
        if (origin[i]) phat.push_back(i);
      DiagramDuals duals = extract_duals(dia, &origin);
      BddCut bdd = bdd_benders_cut(dia, duals);
      for (unsigned set = 0; set < (1u << n); ++set) {
        std::vector<std::uint8_t> x(n);
        for (int i = 0; i < n; ++i) x[i] = set >> i & 1u;
        double truth = oracle::knapsack_cancel_cost(spec, &x);
        double lbbd_rhs = qbar;
        for (int i : phat)
          if (!x[i]) lbbd_rhs -= spec.values[i];
        if (truth < lbbd_rhs - 1e-6) {
          detail = "LBBD cut violated by " + std::to_string(lbbd_rhs - truth);
          return false;
        }
        std::vector<std::uint8_t> by_patient(n);
        for (int i = 0; i < n; ++i) by_patient[spec.patients[i]] = x[i];
        if (truth < bdd.eval(by_patient) - 1e-6) {
          detail = "BDD cut violated by " + std::to_string(bdd.eval(by_patient) - truth);
          return false;
        }
        ++checked;
      }
    }
    // (b) overtime-ratio bounds below the exact cost, room and aggregate form
    for (int trial = 0; trial < 100; ++trial) {
      Instance inst = desk_instance(6, 1, 1, 2, 40000 + trial);
      ScenarioSet scen = sample_scenarios(inst, 2, 41000 + trial);
      TwoStageModel ts = build_two_stage_master(inst, scen);
      std::vector<Cut> roomcuts = relaxation_bounds(inst, scen, ts.idx);
      std::vector<std::uint8_t> mask(6);
      for (auto& b : mask) b = rng.next_unit() < 0.6;
      for (const Cut& cut : roomcuts) {
        std::vector<double> x(ts.model.num_cols(), 0.0);
        for (int p = 0; p < 6; ++p)
          if (mask[p]) x[ts.idx.x(cut.h, cut.d, p, cut.r)] = 1.0;
        double sum = 0.0;
        for (auto [j, c] : cut.row.coef)
          if (j != ts.idx.q(cut.h, cut.d, cut.r, cut.s)) sum += c * x[j];
        double implied = cut.row.rhs - sum;
        auto sub = build_cancellation_subproblem(inst, mask, cut.h, cut.d, cut.s, scen);
        if (implied > oracle::knapsack_cancel_cost(sub) + 1e-6) {
          detail = "room bound exceeded the exact cost";
          return false;
        }
      }
      ThreeStageModel ms = build_lbbd_master(inst, scen);
      std::vector<Cut> agg = qlb2_bounds(inst, scen, ms.idx);
      std::vector<int> sub;
      for (int p = 0; p < 6; ++p)
        if (mask[p]) sub.push_back(p);
      for (int y = 1; y <= 2; ++y) {
        double truth = 0.0;
        for (int s = 0; s < scen.count(); ++s) {
          // exact aggregate: best split over y rooms by enumeration
          double best = kInf;
          const int k = static_cast<int>(sub.size());
          std::vector<int> assign(k, 0);
          if (k == 0) best = 0.0;
          while (k > 0) {
            double tot = 0.0;
            for (int r = 0; r < y; ++r) {
              SubproblemSpec rs;
              rs.capacity = inst.time_limit[0][0];
              for (int i = 0; i < k; ++i)
                if (assign[i] == r) {
                  rs.patients.push_back(sub[i]);
                  rs.weights.push_back(scen.durations[s][sub[i]]);
                  rs.values.push_back(inst.patients[sub[i]].cancel_penalty);
                }
              tot += oracle::knapsack_cancel_cost(rs);
            }
            best = std::min(best, tot);
            int i = 0;
            while (i < k && ++assign[i] >= y) assign[i++] = 0;
            if (i == k) break;
          }
          truth += best;
        }
        truth /= scen.count();
        std::vector<double> x(ms.model.num_cols(), 0.0);
        for (int p : sub) x[ms.idx.x(0, 0, p)] = 1.0;
        x[ms.idx.y(0, 0)] = y;
        x[ms.idx.q(0, 0)] = truth;
        for (const Cut& cut : agg)
          if (cut.row.violation(x) > 1e-6) {
            detail = "aggregate bound exceeded the exact cost";
            return false;
          }
      }
    }
    detail = std::to_string(checked) + " cut evaluations, zero violations > 1e-6";
    return true;
  });

  run(4, "diagram duals match the lp kernel", [](std::string& detail) {
    SplitMix64 rng(404);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      SubproblemSpec spec = oracle::random_spec(rng, 10);
      Diagram dia = build_diagram(spec);
      std::vector<std::uint8_t> mask(spec.size());
      for (auto& b : mask) b = rng.next_unit() < 0.7;
      PathResult path = shortest_path(dia, &mask);
      DiagramDuals duals = extract_duals(dia, &mask);
      if (!duals_feasible(dia, duals, &mask, 1e-9)) {
        detail = "dual infeasibility at trial " + std::to_string(trial);
        return false;
      }
      worst = std::max(worst, std::abs(dual_objective(dia, duals, &mask) - path.value));

      MipModel flow;
      for (std::size_t a = 0; a < dia.arcs.size(); ++a)
        flow.add_col("f", VarKind::Continuous, 0.0, kInf, dia.arcs[a].cost);
      LinearRow src;
      for (std::size_t a = 0; a < dia.arcs.size(); ++a)
        if (dia.arcs[a].from == dia.root()) src.coef.emplace_back(static_cast<int>(a), 1.0);
      src.sense = RowSense::EQ;
      src.rhs = 1.0;
      flow.add_row(std::move(src));
      for (int v = 1; v < static_cast<int>(dia.nodes.size()) - 1; ++v) {
        LinearRow row;
        for (std::size_t a = 0; a < dia.arcs.size(); ++a) {
          if (dia.arcs[a].from == v) row.coef.emplace_back(static_cast<int>(a), 1.0);
          if (dia.arcs[a].to == v) row.coef.emplace_back(static_cast<int>(a), -1.0);
        }
        row.sense = RowSense::EQ;
        row.rhs = 0.0;
        flow.add_row(std::move(row));
      }
      for (std::size_t a = 0; a < dia.arcs.size(); ++a)
        if (dia.arcs[a].one) {
          double cap = mask[dia.order[dia.arcs[a].layer]] ? 1.0 : 0.0;
          flow.add_row({{{static_cast<int>(a), 1.0}}, RowSense::LE, cap, ""});
        }
      LpSolution lp = solve_lp(flow);
      if (lp.status != LpStatus::Optimal) {
        detail = "flow LP not optimal";
        return false;
      }
      worst = std::max(worst, std::abs(lp.objective - path.value));
    }
    detail = "max discrepancy " + std::to_string(worst);
    return worst <= 1e-6;
  });

  run(5, "worst-case gap arithmetic on the published interval rows", [](std::string& detail) {
    struct Row {
      double lm, lw, um, uw, pct;
    };
    const Row rows[] = {
        {-127363, 239.67, -124145, 125.00, 2.81},
        {-126633, 151.93, -124577, 109.22, 1.83},
        {-126175, 131.77, -124405, 112.17, 1.59},
        {-125967, 133.24, -124510, 83.22, 1.33},
    };
    double worst = 0.0;
    for (const Row& r : rows)
      worst = std::max(worst, std::abs(worst_case_gap(r.lm, r.lw, r.um, r.uw) * 100.0 - r.pct));
    detail = "max deviation " + std::to_string(worst) + " pp";
    return worst <= 0.01;
  });

  run(6, "saa worst-case gap trend over scenario counts", [](std::string& detail) {
    Instance inst = desk_instance(12, 2, 2, 2, 777);
    std::vector<int> levels{5, 10, 20};
    std::vector<double> medians;
    for (int level : levels) {
      std::vector<double> gaps;
      for (std::uint64_t rerun = 0; rerun < 3; ++rerun)
        gaps.push_back(saa_gap_for(inst, level, 5000 + rerun));
      std::sort(gaps.begin(), gaps.end());
      medians.push_back(gaps[1]);
    }
    detail = "medians " + std::to_string(medians[0] * 100) + "% " +
             std::to_string(medians[1] * 100) + "% " + std::to_string(medians[2] * 100) + "%";
    return medians[0] >= medians[1] - 1e-12 && medians[1] >= medians[2] - 1e-12;
  });

  run(7, "stochastic schedules beat the deterministic baseline directionally",
      [](std::string& detail) {
        std::string cells;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
          Instance inst = desk_instance(12, 2, 2, 2, 600 + seed);
          ScenarioSet scen = sample_scenarios(inst, 20, 700 + seed);
          TwoStageResult sto = solve_stochastic(inst, scen, 0.01);
          if (!sto.report.has_incumbent) {
            detail = "stochastic solve failed on seed " + std::to_string(seed);
            return false;
          }
          Schedule det = solve_deterministic(inst);
          EvalReport es = evaluate_schedule(inst, sto.schedule, 1000, 900 + seed);
          EvalReport ed = evaluate_schedule(inst, det, 1000, 900 + seed);
          cells += " [" + std::to_string(ed.cancel_rate_mean * 100) + "% vs " +
                   std::to_string(es.cancel_rate_mean * 100) + "%]";
          if (!(es.cancel_rate_mean < ed.cancel_rate_mean &&
                es.utilization_mean > ed.utilization_mean)) {
            detail = "direction failed on seed " + std::to_string(seed) + ":" + cells;
            return false;
          }
        }
        detail = "deterministic vs stochastic cancellation rates:" + cells;
        return true;
      });

  run(8, "sensitivity directions for penalties and time limits", [](std::string& detail) {
    Instance base = desk_instance(12, 2, 2, 2, 888);
    auto pipeline = [&](const Instance& inst, std::uint64_t seed) {
      ScenarioSet scen = sample_scenarios(inst, 20, seed);
      TwoStageResult res = solve_stochastic(inst, scen, 0.01);
      if (!res.report.has_incumbent) throw std::runtime_error("solve failed");
      return evaluate_schedule(inst, res.schedule, 1000, seed + 1);
    };
    EvalReport baseline = pipeline(base, 3100);
    EvalReport cheap = pipeline(sensitivity_case(base, 2), 3100);
    EvalReport tight = pipeline(sensitivity_case(base, 3), 3100);
    detail = "baseline " + std::to_string(baseline.cancel_rate_mean * 100) + "%, case2 " +
             std::to_string(cheap.cancel_rate_mean * 100) + "%, case3 " +
             std::to_string(tight.cancel_rate_mean * 100) + "%";
    return cheap.cancel_rate_mean > baseline.cancel_rate_mean &&
           tight.cancel_rate_mean < baseline.cancel_rate_mean;
  });

  run(9, "engine soundness and determinism", [](std::string& detail) {
    SplitMix64 rng(909);
    int solved = 0;
    for (int trial = 0; trial < 100; ++trial) {
      int n = rng.next_int(4, 14);
      MipModel m;
      for (int j = 0; j < n; ++j)
        m.add_col("b", VarKind::Binary, 0, 1, rng.next_int(-20, 20));
      int rows = rng.next_int(2, 8);
      for (int i = 0; i < rows; ++i) {
        LinearRow row;
        for (int j = 0; j < n; ++j) {
          int c = rng.next_int(-3, 3);
          if (c != 0) row.coef.emplace_back(j, static_cast<double>(c));
        }
        if (row.coef.empty()) continue;
        int kind = rng.next_int(0, 5);
        row.sense = kind <= 2 ? RowSense::LE : (kind <= 4 ? RowSense::GE : RowSense::EQ);
        row.rhs = rng.next_int(row.sense == RowSense::GE ? -4 : -1,
                               row.sense == RowSense::EQ ? 2 : 6);
        m.add_row(std::move(row));
      }
      bool feasible = false;
      double ref = oracle::mip_optimum(m, &feasible);
      SolveOptions opts;
      opts.gap = 0.0;
      SolveReport rep = solve(m, nullptr, nullptr, opts);
      if (!feasible) {
        if (rep.reason != TerminationReason::Infeasible) {
          detail = "claimed feasible on an infeasible model";
          return false;
        }
        continue;
      }
      if (!rep.has_incumbent || std::abs(rep.objective - ref) > 1e-9) {
        detail = "objective mismatch vs enumeration at trial " + std::to_string(trial);
        return false;
      }
      SolveReport again = solve(m, nullptr, nullptr, opts);
      if (rep.to_json(false).dump() != again.to_json(false).dump()) {
        detail = "reports differ between identical runs";
        return false;
      }
      ++solved;
    }
    detail = std::to_string(solved) + " optimal models matched enumeration, byte-identical reruns";
    return solved >= 50;
  });

  std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
