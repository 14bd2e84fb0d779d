#include "sdors/two_stage.hpp"

#include <algorithm>
#include <numeric>

namespace sdors {

namespace {

std::uint64_t mix_hash(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9E3779B97f4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t patient_set_hash(const SubproblemSpec& spec) {
  std::uint64_t h = 0x243F6A8885A308D3ULL;
  for (int p : spec.patients) h = mix_hash(h, static_cast<std::uint64_t>(p));
  return h;
}

}  // namespace

FfdResult ffd_initial(const Instance& inst, const ScenarioSet& scen) {
  validate(inst, scen);
  FfdResult res;

  std::vector<std::pair<int, int>> hd_order;
  for (int h = 0; h < inst.hospitals; ++h)
    for (int d = 0; d < inst.days; ++d) hd_order.emplace_back(h, d);
  std::stable_sort(hd_order.begin(), hd_order.end(), [&](auto a, auto b) {
    return inst.time_limit[a.first][a.second] > inst.time_limit[b.first][b.second];
  });

  struct Room {
    int h, d, r;
    int residual;
    bool open = false;
  };
  std::vector<Room> rooms;
  for (auto [h, d] : hd_order)
    for (int r = 0; r < inst.rooms; ++r) rooms.push_back({h, d, r, inst.time_limit[h][d], false});

  std::vector<int> order(inst.num_patients());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const Patient &pa = inst.patients[a], &pb = inst.patients[b];
    if (pa.mandatory != pb.mandatory) return pa.mandatory;
    if (pa.health_score != pb.health_score) return pa.health_score > pb.health_score;
    return pa.id < pb.id;
  });

  Schedule sched = empty_schedule(inst);
  for (int p : order) {
    const int t = scen.durations[0][p];
    Room* placed = nullptr;
    for (auto& room : rooms)
      if (room.open && room.residual >= t) {
        placed = &room;
        break;
      }
    if (!placed) {
      for (auto& room : rooms)
        if (!room.open && inst.time_limit[room.h][room.d] >= t) {
          room.open = true;
          placed = &room;
          break;
        }
    }
    if (!placed) {
      if (inst.patients[p].mandatory) {
        res.ok = false;
        res.reason = "no room fits mandatory patient " + std::to_string(p);
        return res;
      }
      continue;  // postponed
    }
    placed->residual -= t;
    sched.room_patients[placed->h][placed->d][placed->r].push_back(p);
    sched.postponed[p] = 0;
    sched.suite_open[placed->h][placed->d] = 1;
    sched.rooms_open[placed->h][placed->d] =
        std::max(sched.rooms_open[placed->h][placed->d], placed->r + 1);
  }

  sched.operational_cost = operational_cost(inst, sched);
  double cancel = 0.0;
  std::vector<std::uint8_t> mask(inst.num_patients(), 0);
  for (int h = 0; h < inst.hospitals; ++h)
    for (int d = 0; d < inst.days; ++d)
      for (int r = 0; r < sched.rooms_open[h][d]; ++r) {
        if (sched.room_patients[h][d][r].empty()) continue;
        std::fill(mask.begin(), mask.end(), 0);
        for (int p : sched.room_patients[h][d][r]) mask[p] = 1;
        for (int s = 0; s < scen.count(); ++s)
          cancel += exact_cancel_cost(build_cancellation_subproblem(inst, mask, h, d, s, scen));
      }
  sched.expected_cancel_cost = cancel / scen.count();
  res.ok = true;
  res.schedule = std::move(sched);
  return res;
}

Cut lbbd_cut(const Instance& inst, const TwoStageIndex& idx, const SubproblemSpec& spec,
             double qbar, int h, int d, int r, int s) {
  (void)inst;
  Cut cut;
  cut.family = CutFamily::Lbbd;
  cut.h = h;
  cut.d = d;
  cut.r = r;
  cut.s = s;
  cut.row.sense = RowSense::GE;
  cut.row.coef.emplace_back(idx.q(h, d, r, s), 1.0);
  double total = 0.0;
  for (int i = 0; i < spec.size(); ++i) {
    cut.row.coef.emplace_back(idx.x(h, d, spec.patients[i], r), -spec.values[i]);
    total += spec.values[i];
  }
  cut.row.rhs = qbar - total;
  cut.row.name = "lbbd_" + std::to_string(h) + "_" + std::to_string(d) + "_" + std::to_string(r) +
                 "_" + std::to_string(s);
  return cut;
}

Cut bdd_cut_row(const TwoStageIndex& idx, const BddCut& bc, int h, int d, int r, int s) {
  Cut cut;
  cut.family = CutFamily::BddBenders;
  cut.h = h;
  cut.d = d;
  cut.r = r;
  cut.s = s;
  cut.row.sense = RowSense::GE;
  cut.row.coef.emplace_back(idx.q(h, d, r, s), 1.0);
  for (auto [p, c] : bc.patient_coef)
    if (c != 0.0) cut.row.coef.emplace_back(idx.x(h, d, p, r), -c);
  cut.row.rhs = bc.rhs;
  cut.row.name = "bdd_" + std::to_string(h) + "_" + std::to_string(d) + "_" + std::to_string(r) +
                 "_" + std::to_string(s);
  return cut;
}

Cut benders_lp_cut(const TwoStageIndex& idx, const SubproblemSpec& spec, const KnapsackLpResult& lp,
                   int capacity, int h, int d, int r, int s) {
  Cut cut;
  cut.family = CutFamily::BendersLp;
  cut.h = h;
  cut.d = d;
  cut.r = r;
  cut.s = s;
  cut.row.sense = RowSense::GE;
  cut.row.coef.emplace_back(idx.q(h, d, r, s), 1.0);
  for (int i = 0; i < spec.size(); ++i) {
    double c = spec.values[i] + lp.delta[i];
    if (c != 0.0) cut.row.coef.emplace_back(idx.x(h, d, spec.patients[i], r), -c);
  }
  cut.row.rhs = lp.eta * capacity;
  cut.row.name = "blp_" + std::to_string(h) + "_" + std::to_string(d) + "_" + std::to_string(r) +
                 "_" + std::to_string(s);
  return cut;
}

std::vector<Cut> relaxation_bounds(const Instance& inst, const ScenarioSet& scen,
                                   const TwoStageIndex& idx) {
  std::vector<Cut> cuts;
  for (int s = 0; s < scen.count(); ++s) {
    double ratio = kInf;
    for (int p = 0; p < inst.num_patients(); ++p)
      ratio = std::min(ratio, inst.patients[p].cancel_penalty / scen.durations[s][p]);
    for (int h = 0; h < inst.hospitals; ++h)
      for (int d = 0; d < inst.days; ++d)
        for (int r = 0; r < inst.rooms; ++r) {
          Cut cut;
          cut.family = CutFamily::RelaxationBound;
          cut.h = h;
          cut.d = d;
          cut.r = r;
          cut.s = s;
          cut.row.sense = RowSense::GE;
          cut.row.coef.emplace_back(idx.q(h, d, r, s), 1.0);
          for (int p = 0; p < inst.num_patients(); ++p)
            cut.row.coef.emplace_back(idx.x(h, d, p, r), -ratio * scen.durations[s][p]);
          cut.row.rhs = -ratio * inst.time_limit[h][d];
          cut.row.name = "qlb_" + std::to_string(h) + "_" + std::to_string(d) + "_" +
                         std::to_string(r) + "_" + std::to_string(s);
          cuts.push_back(std::move(cut));
        }
  }
  return cuts;
}

double complete_recourse(const Instance& inst, const ScenarioSet& scen, const TwoStageIndex& idx,
                         const MipModel& model, std::vector<double>& x) {
  std::vector<std::uint8_t> mask(inst.num_patients(), 0);
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      for (int r = 0; r < idx.R; ++r) {
        bool any = false;
        for (int p = 0; p < idx.P; ++p) {
          mask[p] = x[idx.x(h, d, p, r)] > 0.5;
          any = any || mask[p];
        }
        for (int s = 0; s < idx.S; ++s)
          x[idx.q(h, d, r, s)] =
              any ? exact_cancel_cost(build_cancellation_subproblem(inst, mask, h, d, s, scen)) : 0.0;
      }
  return model.objective_value(x);
}

TwoStageContext::TwoStageContext(const Instance& inst, const ScenarioSet& scen, AlgoConfig cfg)
    : inst_(inst), scen_(scen), cfg_(cfg), master_(build_two_stage_master(inst, scen)) {}

bool TwoStageContext::remember(CutFamily family, int h, int d, int r, int s,
                               std::uint64_t pmask_hash) {
  std::uint64_t key = mix_hash(pmask_hash, static_cast<std::uint64_t>(family));
  key = mix_hash(key, (static_cast<std::uint64_t>(h) << 48) ^ (static_cast<std::uint64_t>(d) << 32) ^
                          (static_cast<std::uint64_t>(r) << 16) ^ static_cast<std::uint64_t>(s));
  return seen_.insert(key).second;
}

std::vector<Cut> TwoStageContext::exact_cuts_for(const SubproblemSpec& spec, int h, int d, int r,
                                                 int s, double qbar_out[1]) {
  std::vector<Cut> cuts;
  Diagram dia = build_diagram(spec);
  PathResult path = shortest_path(dia);
  qbar_out[0] = path.cancel_cost;
  std::uint64_t ph = patient_set_hash(spec);
  bool lbbd = cfg_.family == ExactCutFamily::Lbbd || cfg_.family == ExactCutFamily::Both;
  bool bdd = cfg_.family == ExactCutFamily::Bdd || cfg_.family == ExactCutFamily::Both;
  if (lbbd && remember(CutFamily::Lbbd, h, d, r, s, ph))
    cuts.push_back(lbbd_cut(inst_, master_.idx, spec, path.cancel_cost, h, d, r, s));
  if (bdd && remember(CutFamily::BddBenders, h, d, r, s, ph)) {
    DiagramDuals duals = extract_duals(dia);
    cuts.push_back(bdd_cut_row(master_.idx, bdd_benders_cut(dia, duals), h, d, r, s));
  }
  return cuts;
}

std::optional<Injection> TwoStageContext::apply_phase_one() {
  const TwoStageIndex& idx = master_.idx;
  std::optional<Injection> warm;
  if (cfg_.use_ffd) {
    ffd_ = ffd_initial(inst_, scen_);
    if (ffd_.ok) {
      Injection inj;
      inj.x = solution_from_schedule(inst_, idx, master_.model.num_cols(), ffd_.schedule);
      inj.objective = complete_recourse(inst_, scen_, idx, master_.model, inj.x);
      if (cfg_.use_initial_cuts) {
        std::vector<std::uint8_t> mask(inst_.num_patients(), 0);
        for (int h = 0; h < idx.H; ++h)
          for (int d = 0; d < idx.D; ++d)
            for (int r = 0; r < idx.R; ++r) {
              bool any = false;
              for (int p = 0; p < idx.P; ++p) {
                mask[p] = inj.x[idx.x(h, d, p, r)] > 0.5;
                any = any || mask[p];
              }
              if (!any) continue;
              for (int s = 0; s < scen_.count(); ++s) {
                SubproblemSpec spec = build_cancellation_subproblem(inst_, mask, h, d, s, scen_);
                double qbar[1];
                for (Cut& cut : exact_cuts_for(spec, h, d, r, s, qbar))
                  master_.model.add_row(std::move(cut.row));
                KnapsackLpResult lp = knapsack_lp_duals(spec);
                master_.model.add_row(
                    benders_lp_cut(idx, spec, lp, inst_.time_limit[h][d], h, d, r, s).row);
              }
            }
      }
      warm = std::move(inj);
    }
  }
  if (cfg_.use_relaxation_bounds)
    for (Cut& cut : relaxation_bounds(inst_, scen_, idx)) master_.model.add_row(std::move(cut.row));
  return warm;
}

CallbackVerdict TwoStageContext::lazy_callback(const NodeView& node) {
  const TwoStageIndex& idx = master_.idx;
  CallbackVerdict verdict;
  std::vector<Cut> cuts;
  std::vector<std::uint8_t> mask(inst_.num_patients(), 0);
  Injection inj;
  inj.x = node.x;

  for (int s = 0; s < idx.S; ++s)
    for (int h = 0; h < idx.H; ++h)
      for (int d = 0; d < idx.D; ++d)
        for (int r = 0; r < idx.R; ++r) {
          bool any = false;
          for (int p = 0; p < idx.P; ++p) {
            mask[p] = node.x[idx.x(h, d, p, r)] > 0.5;
            any = any || mask[p];
          }
          if (!any) {
            inj.x[idx.q(h, d, r, s)] = 0.0;
            continue;
          }
          SubproblemSpec spec = build_cancellation_subproblem(inst_, mask, h, d, s, scen_);
          double qhat = node.x[idx.q(h, d, r, s)];
          Diagram dia = build_diagram(spec);
          PathResult path = shortest_path(dia);
          double qbar = path.cancel_cost;
          if (qhat < qbar - 1e-6) {
            std::uint64_t ph = patient_set_hash(spec);
            bool lbbd = cfg_.family == ExactCutFamily::Lbbd || cfg_.family == ExactCutFamily::Both;
            bool bdd = cfg_.family == ExactCutFamily::Bdd || cfg_.family == ExactCutFamily::Both;
            if (lbbd && remember(CutFamily::Lbbd, h, d, r, s, ph))
              cuts.push_back(lbbd_cut(inst_, idx, spec, qbar, h, d, r, s));
            if (bdd && remember(CutFamily::BddBenders, h, d, r, s, ph)) {
              DiagramDuals duals = extract_duals(dia);
              cuts.push_back(bdd_cut_row(idx, bdd_benders_cut(dia, duals), h, d, r, s));
            }
          }
          KnapsackLpResult lp = knapsack_lp_duals(spec);
          if (qhat < lp.objective - 1e-6 &&
              remember(CutFamily::BendersLp, h, d, r, s, patient_set_hash(spec)))
            cuts.push_back(benders_lp_cut(idx, spec, lp, inst_.time_limit[h][d], h, d, r, s));
          inj.x[idx.q(h, d, r, s)] = qbar;
        }

  inj.objective = master_.model.objective_value(inj.x);
  verdict.inject = std::move(inj);
  for (Cut& cut : cuts) verdict.cuts.push_back({std::move(cut.row), cut.family});
  return verdict;
}

CallbackVerdict TwoStageContext::user_callback(const NodeView& node) {
  const TwoStageIndex& idx = master_.idx;
  CallbackVerdict verdict;
  std::vector<std::uint8_t> support(inst_.num_patients(), 0);
  for (int s = 0; s < idx.S; ++s)
    for (int h = 0; h < idx.H; ++h)
      for (int d = 0; d < idx.D; ++d)
        for (int r = 0; r < idx.R; ++r) {
          std::vector<double> caps;
          bool any = false;
          for (int p = 0; p < idx.P; ++p) {
            support[p] = node.x[idx.x(h, d, p, r)] > 1e-6;
            any = any || support[p];
          }
          if (!any) continue;
          SubproblemSpec spec = build_cancellation_subproblem(inst_, support, h, d, s, scen_);
          caps.reserve(spec.size());
          for (int p : spec.patients) caps.push_back(node.x[idx.x(h, d, p, r)]);
          KnapsackLpResult lp = knapsack_lp_duals(spec, &caps);
          if (node.x[idx.q(h, d, r, s)] < lp.objective - 1e-6)
            verdict.cuts.push_back(
                {benders_lp_cut(idx, spec, lp, inst_.time_limit[h][d], h, d, r, s).row,
                 CutFamily::BendersLp});
        }
  return verdict;
}

TwoStageResult solve_de_direct(const Instance& inst, const ScenarioSet& scen,
                               const AlgoConfig& cfg) {
  DeModel de = build_de(inst, scen);
  SolveOptions opts;
  opts.gap = cfg.gap;
  opts.node_limit = cfg.node_limit;
  opts.time_limit_s = cfg.time_limit_s;
  if (cfg.use_ffd) {
    FfdResult ffd = ffd_initial(inst, scen);
    if (ffd.ok) {
      Injection warm;
      warm.x = solution_from_schedule(inst, de.idx, de.model.num_cols(), ffd.schedule);
      std::vector<std::uint8_t> mask(inst.num_patients(), 0);
      for (int h = 0; h < de.idx.H; ++h)
        for (int d = 0; d < de.idx.D; ++d)
          for (int r = 0; r < de.idx.R; ++r) {
            bool any = false;
            for (int p = 0; p < de.idx.P; ++p) {
              mask[p] = warm.x[de.idx.x(h, d, p, r)] > 0.5;
              any = any || mask[p];
            }
            if (!any) continue;
            for (int s = 0; s < scen.count(); ++s) {
              auto spec = build_cancellation_subproblem(inst, mask, h, d, s, scen);
              PathResult path = shortest_path(build_diagram(spec));
              for (int p : path.keep) warm.x[de.idx.z(h, d, p, r, s)] = 1.0;
            }
          }
      warm.objective = de.model.objective_value(warm.x);
      opts.warm_start = std::move(warm);
    }
  }
  SolveReport report = solve(de.model, nullptr, nullptr, opts);
  TwoStageResult res;
  res.schedule = report.has_incumbent ? schedule_from_solution(inst, scen, de.idx, report.x)
                                      : empty_schedule(inst);
  res.report = std::move(report);
  return res;
}

TwoStageResult solve_two_stage(const Instance& inst, const ScenarioSet& scen,
                               const AlgoConfig& cfg) {
  TwoStageContext ctx(inst, scen, cfg);
  SolveOptions opts;
  opts.gap = cfg.gap;
  opts.node_limit = cfg.node_limit;
  opts.time_limit_s = cfg.time_limit_s;
  opts.warm_start = ctx.apply_phase_one();

  NodeCallback user;
  if (cfg.use_user_cuts) user = [&](const NodeView& n) { return ctx.user_callback(n); };
  SolveReport report =
      solve(ctx.master(), [&](const NodeView& n) { return ctx.lazy_callback(n); }, user, opts);

  TwoStageResult res;
  res.schedule = report.has_incumbent
                     ? schedule_from_solution(inst, scen, ctx.index(), report.x)
                     : empty_schedule(inst);
  res.report = std::move(report);
  return res;
}

}  // namespace sdors
