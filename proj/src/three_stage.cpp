#include "sdors/three_stage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sdors {

namespace {

std::string tag(const char* sym, std::initializer_list<int> ix) {
  std::string s(sym);
  for (int v : ix) s += "_" + std::to_string(v);
  return s;
}

std::uint64_t mix_hash(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9E3779B97f4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

ThreeStageModel build_lbbd_master(const Instance& inst, const ScenarioSet& scen) {
  validate(inst, scen);
  ThreeStageModel ms;
  MipModel& m = ms.model;
  ThreeStageIndex& idx = ms.idx;
  idx.H = inst.hospitals;
  idx.D = inst.days;
  idx.P = inst.num_patients();
  idx.R = inst.rooms;
  idx.S = scen.count();

  idx.u0 = m.num_cols();
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      m.add_col(tag("u", {h, d}), VarKind::Binary, 0, 1, inst.suite_open_cost[h][d]);
  idx.y0 = m.num_cols();
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      m.add_col(tag("y", {h, d}), VarKind::Integer, 0, idx.R, inst.room_open_cost[h][d]);
  idx.x0 = m.num_cols();
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      for (int p = 0; p < idx.P; ++p)
        m.add_col(tag("x", {h, d, p}), VarKind::Binary, 0, 1, inst.patients[p].sched_benefit[d]);
  idx.w_col.assign(idx.P, -1);
  for (int p = 0; p < idx.P; ++p)
    if (!inst.patients[p].mandatory)
      idx.w_col[p] = m.add_col(tag("w", {p}), VarKind::Binary, 0, 1, inst.patients[p].unsched_penalty);
  idx.q0 = m.num_cols();
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d) m.add_col(tag("Q", {h, d}), VarKind::Continuous, 0.0, kInf, 1.0);
  idx.g0 = m.num_cols();
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      for (int j = 0; j <= idx.R; ++j) m.add_col(tag("g", {h, d, j}), VarKind::Binary, 0, 1, 0.0);

  for (int p = 0; p < idx.P; ++p) {
    LinearRow row;
    for (int h = 0; h < idx.H; ++h)
      for (int d = 0; d < idx.D; ++d) row.coef.emplace_back(idx.x(h, d, p), 1.0);
    if (idx.w(p) >= 0) row.coef.emplace_back(idx.w(p), 1.0);
    row.sense = RowSense::EQ;
    row.rhs = 1.0;
    row.name = tag("assign", {p});
    m.add_row(std::move(row));
  }
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      m.add_row({{{idx.y(h, d), 1.0}, {idx.u(h, d), -static_cast<double>(idx.R)}},
                 RowSense::LE,
                 0.0,
                 tag("yu", {h, d})});
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      for (int p = 0; p < idx.P; ++p)
        m.add_row({{{idx.x(h, d, p), 1.0}, {idx.y(h, d), -1.0}}, RowSense::LE, 0.0,
                   tag("xy", {h, d, p})});
  return ms;
}

std::pair<Cut, Cut> lbbd_cut_3(const ThreeStageIndex& idx, const std::vector<int>& phat, int h,
                               int d, int yhat, double qbar) {
  Cut lower;
  lower.family = CutFamily::Lbbd;
  lower.h = h;
  lower.d = d;
  lower.row.sense = RowSense::GE;
  lower.row.coef.emplace_back(idx.q(h, d), 1.0);
  lower.row.coef.emplace_back(idx.g(h, d, yhat), -qbar);
  for (int p : phat) lower.row.coef.emplace_back(idx.x(h, d, p), -qbar);
  lower.row.rhs = -qbar * static_cast<double>(phat.size());
  lower.row.name = tag("lbbd3q", {h, d, yhat});

  Cut binder;
  binder.family = CutFamily::Lbbd;
  binder.h = h;
  binder.d = d;
  binder.row.sense = RowSense::GE;
  binder.row.coef.emplace_back(idx.y(h, d), 1.0);
  binder.row.coef.emplace_back(idx.g(h, d, yhat), 1.0 + yhat);
  binder.row.rhs = 1.0 + yhat;
  binder.row.name = tag("lbbd3y", {h, d, yhat});
  return {std::move(lower), std::move(binder)};
}

std::vector<Cut> qlb2_bounds(const Instance& inst, const ScenarioSet& scen,
                             const ThreeStageIndex& idx) {
  const int S = scen.count();
  std::vector<double> ratio(S, kInf);
  for (int s = 0; s < S; ++s)
    for (int p = 0; p < inst.num_patients(); ++p)
      ratio[s] = std::min(ratio[s], inst.patients[p].cancel_penalty / scen.durations[s][p]);
  double ratio_sum = std::accumulate(ratio.begin(), ratio.end(), 0.0);

  std::vector<Cut> cuts;
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d) {
      Cut cut;
      cut.family = CutFamily::RelaxationBound;
      cut.h = h;
      cut.d = d;
      cut.row.sense = RowSense::GE;
      cut.row.coef.emplace_back(idx.q(h, d), 1.0);
      for (int p = 0; p < idx.P; ++p) {
        double c = 0.0;
        for (int s = 0; s < S; ++s) c += ratio[s] * scen.durations[s][p];
        cut.row.coef.emplace_back(idx.x(h, d, p), -c / S);
      }
      cut.row.coef.emplace_back(idx.y(h, d), ratio_sum * inst.time_limit[h][d] / S);
      cut.row.rhs = 0.0;
      cut.row.name = tag("qlb2", {h, d});
      cuts.push_back(std::move(cut));
    }
  return cuts;
}

bool early_stop(double global_ub, double incumbent_op_cost, double q_lower_bound) {
  return global_ub < incumbent_op_cost + q_lower_bound - 1e-9;
}

namespace {

struct InnerIndex {
  int k = 0, rooms = 0, scenarios = 0;
  int x0 = 0, t0 = 0;
  int x(int i, int r) const { return x0 + i * rooms + r; }
  int theta(int s, int r) const { return t0 + s * rooms + r; }
};

struct InnerContext {
  const Instance* inst;
  const ScenarioSet* scen;
  int h, d, yhat;
  std::vector<int> phat;
  MipModel model;
  InnerIndex idx;
  std::vector<Diagram> diagrams;  // per scenario, over phat
  std::unordered_set<std::uint64_t> seen;

  SubproblemSpec spec_for(int s) const {
    SubproblemSpec spec;
    spec.capacity = inst->time_limit[h][d];
    for (int p : phat) {
      spec.patients.push_back(p);
      spec.weights.push_back(scen->durations[s][p]);
      spec.values.push_back(inst->patients[p].cancel_penalty);
    }
    return spec;
  }

  void build() {
    const int k = static_cast<int>(phat.size());
    idx.k = k;
    idx.rooms = yhat;
    idx.scenarios = scen->count();
    idx.x0 = 0;
    for (int i = 0; i < k; ++i)
      for (int r = 0; r < yhat; ++r)
        model.add_col(tag("x", {i, r}), VarKind::Binary, 0, 1,
                      inst->patients[phat[i]].cancel_penalty);
    idx.t0 = model.num_cols();
    double total = 0.0;
    for (int p : phat) total += inst->patients[p].cancel_penalty;
    const double w = 1.0 / idx.scenarios;
    for (int s = 0; s < idx.scenarios; ++s)
      for (int r = 0; r < yhat; ++r)
        model.add_col(tag("th", {s, r}), VarKind::Continuous, -total, 0.0, w);
    for (int i = 0; i < k; ++i) {
      LinearRow row;
      for (int r = 0; r < yhat; ++r) row.coef.emplace_back(idx.x(i, r), 1.0);
      row.sense = RowSense::EQ;
      row.rhs = 1.0;
      row.name = tag("asg", {i});
      model.add_row(std::move(row));
    }
    // theta >= -(assigned cancellation value): relaxed time-limit bound
    for (int s = 0; s < idx.scenarios; ++s)
      for (int r = 0; r < yhat; ++r) {
        LinearRow row;
        row.coef.emplace_back(idx.theta(s, r), 1.0);
        for (int i = 0; i < k; ++i)
          row.coef.emplace_back(idx.x(i, r), inst->patients[phat[i]].cancel_penalty);
        row.sense = RowSense::GE;
        row.rhs = 0.0;
        row.name = tag("tlb", {s, r});
        model.add_row(std::move(row));
      }
    // rooms are interchangeable: order them by assigned cancellation cost
    for (int r = 1; r < yhat; ++r) {
      LinearRow row;
      for (int i = 0; i < k; ++i) {
        double c = inst->patients[phat[i]].cancel_penalty;
        if (c == 0.0) continue;
        row.coef.emplace_back(idx.x(i, r), c);
        row.coef.emplace_back(idx.x(i, r - 1), -c);
      }
      row.sense = RowSense::LE;
      row.rhs = 0.0;
      row.name = tag("rsym", {r});
      if (!row.coef.empty()) model.add_row(std::move(row));
    }
    diagrams.reserve(idx.scenarios);
    for (int s = 0; s < idx.scenarios; ++s) diagrams.push_back(build_diagram(spec_for(s)));
  }

  CallbackVerdict lazy(const NodeView& node) {
    CallbackVerdict verdict;
    Injection inj;
    inj.x = node.x;
    std::vector<std::uint8_t> mask(idx.k, 0);
    for (int s = 0; s < idx.scenarios; ++s)
      for (int r = 0; r < idx.rooms; ++r) {
        bool any = false;
        for (int i = 0; i < idx.k; ++i) {
          mask[i] = node.x[idx.x(i, r)] > 0.5;
          any = any || mask[i];
        }
        double that = node.x[idx.theta(s, r)];
        if (!any) {
          inj.x[idx.theta(s, r)] = 0.0;
          continue;
        }
        PathResult path = shortest_path(diagrams[s], &mask);
        inj.x[idx.theta(s, r)] = path.value;
        if (that < path.value - 1e-6) {
          std::uint64_t key = mix_hash(static_cast<std::uint64_t>(s) << 32 | r, 1);
          for (int i = 0; i < idx.k; ++i) key = mix_hash(key, mask[i]);
          if (seen.insert(key).second) {
            DiagramDuals duals = extract_duals(diagrams[s], &mask);
            BddCut bc = bdd_theta_cut(diagrams[s], duals);
            LinearRow row;
            row.sense = RowSense::GE;
            row.coef.emplace_back(idx.theta(s, r), 1.0);
            for (int i = 0; i < diagrams[s].spec.size(); ++i) {
              double c = bc.patient_coef[i].second;
              if (c != 0.0) row.coef.emplace_back(idx.x(i, r), -c);
            }
            row.rhs = bc.rhs;
            row.name = tag("ibdd", {s, r});
            verdict.cuts.push_back({std::move(row), CutFamily::BddBenders});
          }
        }
        // knapsack-LP cut
        SubproblemSpec spec = spec_for(s);
        std::vector<double> caps(mask.begin(), mask.end());
        KnapsackLpResult lp = knapsack_lp_duals(spec, &caps);
        double theta_lp = -lp.keep_value;
        if (that < theta_lp - 1e-6) {
          std::uint64_t key = mix_hash(static_cast<std::uint64_t>(s) << 32 | r, 2);
          for (int i = 0; i < idx.k; ++i) key = mix_hash(key, mask[i]);
          if (seen.insert(key).second) {
            LinearRow row;
            row.sense = RowSense::GE;
            row.coef.emplace_back(idx.theta(s, r), 1.0);
            for (int i = 0; i < idx.k; ++i)
              if (lp.delta[i] != 0.0) row.coef.emplace_back(idx.x(i, r), -lp.delta[i]);
            row.rhs = lp.eta * spec.capacity;
            row.name = tag("iblp", {s, r});
            verdict.cuts.push_back({std::move(row), CutFamily::BendersLp});
          }
        }
      }
    inj.objective = model.objective_value(inj.x);
    verdict.inject = std::move(inj);
    return verdict;
  }

  CallbackVerdict user(const NodeView& node) {
    CallbackVerdict verdict;
    for (int s = 0; s < idx.scenarios; ++s)
      for (int r = 0; r < idx.rooms; ++r) {
        std::vector<double> caps(idx.k);
        bool any = false;
        for (int i = 0; i < idx.k; ++i) {
          caps[i] = std::max(0.0, node.x[idx.x(i, r)]);
          any = any || caps[i] > 1e-6;
        }
        if (!any) continue;
        SubproblemSpec spec = spec_for(s);
        KnapsackLpResult lp = knapsack_lp_duals(spec, &caps);
        double theta_lp = lp.eta * spec.capacity;
        for (int i = 0; i < idx.k; ++i) theta_lp += lp.delta[i] * caps[i];
        if (node.x[idx.theta(s, r)] < theta_lp - 1e-6) {
          LinearRow row;
          row.sense = RowSense::GE;
          row.coef.emplace_back(idx.theta(s, r), 1.0);
          for (int i = 0; i < idx.k; ++i)
            if (lp.delta[i] != 0.0) row.coef.emplace_back(idx.x(i, r), -lp.delta[i]);
          row.rhs = lp.eta * spec.capacity;
          row.name = tag("iblpu", {s, r});
          verdict.cuts.push_back({std::move(row), CutFamily::BendersLp});
        }
      }
    return verdict;
  }

  // cancellation-cost-descending first fit over the allowed rooms, overflow
  // into the last room
  Injection ffd_start() {
    std::vector<int> order(idx.k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      double ca = inst->patients[phat[a]].cancel_penalty, cb = inst->patients[phat[b]].cancel_penalty;
      if (ca != cb) return ca > cb;
      return phat[a] < phat[b];
    });
    std::vector<int> residual(idx.rooms, inst->time_limit[h][d]);
    std::vector<int> opened;
    std::vector<int> room_of(idx.k, idx.rooms - 1);
    for (int i : order) {
      int t = scen->durations[0][phat[i]];
      bool placed = false;
      for (int r : opened)
        if (residual[r] >= t) {
          room_of[i] = r;
          residual[r] -= t;
          placed = true;
          break;
        }
      if (!placed) {
        for (int r = 0; r < idx.rooms; ++r) {
          if (std::find(opened.begin(), opened.end(), r) != opened.end()) continue;
          opened.push_back(r);
          if (residual[r] >= t) {
            room_of[i] = r;
            residual[r] -= t;
            placed = true;
          }
          break;
        }
      }
      if (!placed) room_of[i] = idx.rooms - 1;  // overload the last room
    }
    // relabel rooms by cancellation load so the symmetry rows hold
    std::vector<double> load(idx.rooms, 0.0);
    for (int i = 0; i < idx.k; ++i)
      load[room_of[i]] += inst->patients[phat[i]].cancel_penalty;
    std::vector<int> room_order(idx.rooms);
    std::iota(room_order.begin(), room_order.end(), 0);
    std::stable_sort(room_order.begin(), room_order.end(),
                     [&](int a, int b) { return load[a] > load[b]; });
    std::vector<int> rank(idx.rooms);
    for (int pos = 0; pos < idx.rooms; ++pos) rank[room_order[pos]] = pos;
    for (int i = 0; i < idx.k; ++i) room_of[i] = rank[room_of[i]];

    Injection inj;
    inj.x.assign(model.num_cols(), 0.0);
    for (int i = 0; i < idx.k; ++i) inj.x[idx.x(i, room_of[i])] = 1.0;
    std::vector<std::uint8_t> mask(idx.k);
    for (int s = 0; s < idx.scenarios; ++s)
      for (int r = 0; r < idx.rooms; ++r) {
        bool any = false;
        for (int i = 0; i < idx.k; ++i) {
          mask[i] = room_of[i] == r;
          any = any || mask[i];
        }
        inj.x[idx.theta(s, r)] = any ? shortest_path(diagrams[s], &mask).value : 0.0;
      }
    inj.objective = model.objective_value(inj.x);
    return inj;
  }
};

}  // namespace

InnerResult solve_lbbd_subproblem(const Instance& inst, const ScenarioSet& scen, int h, int d,
                                  const std::vector<int>& phat, int yhat, double gap,
                                  const std::function<bool(double)>& stop_hook,
                                  double time_limit_s) {
  InnerResult res;
  if (phat.empty()) {
    res.exact = true;
    res.qbar = 0.0;
    res.room_patients.assign(std::max(yhat, 0), {});
    return res;
  }
  if (yhat < 1) throw std::invalid_argument("subproblem needs at least one room for its patients");

  InnerContext ctx;
  ctx.inst = &inst;
  ctx.scen = &scen;
  ctx.h = h;
  ctx.d = d;
  ctx.yhat = yhat;
  ctx.phat = phat;
  ctx.build();

  SolveOptions opts;
  opts.gap = gap;
  opts.time_limit_s = time_limit_s;
  opts.warm_start = ctx.ffd_start();
  if (stop_hook) opts.bound_listener = stop_hook;

  SolveReport report =
      solve(ctx.model, [&](const NodeView& n) { return ctx.lazy(n); },
            [&](const NodeView& n) { return ctx.user(n); }, opts);

  if (report.reason == TerminationReason::EarlyStop ||
      report.reason == TerminationReason::TimeLimit) {
    res.exact = false;
    res.timed_out = report.reason == TerminationReason::TimeLimit;
    res.qbar = report.best_bound;
    return res;
  }
  if (!report.has_incumbent)
    throw std::runtime_error("assignment subproblem unexpectedly infeasible");
  res.exact = true;
  res.qbar = report.best_bound;
  res.ub = report.objective;
  res.room_patients.assign(yhat, {});
  for (int i = 0; i < ctx.idx.k; ++i)
    for (int r = 0; r < yhat; ++r)
      if (report.x[ctx.idx.x(i, r)] > 0.5) res.room_patients[r].push_back(phat[i]);
  return res;
}

AssignmentLpCut assignment_lp_cut(const Instance& inst, const ScenarioSet& scen, int h, int d,
                                  const std::vector<double>& xhat_hd, double yhat) {
  const int P = inst.num_patients(), R = inst.rooms, S = scen.count();
  MipModel lp;
  auto xcol = [&](int p, int r) { return p * R + r; };
  for (int p = 0; p < P; ++p)
    for (int r = 0; r < R; ++r)
      lp.add_col(tag("x", {p, r}), VarKind::Continuous, 0.0, kInf,
                 inst.patients[p].cancel_penalty);
  int y0 = lp.num_cols();
  for (int r = 0; r < R; ++r) lp.add_col(tag("y", {r}), VarKind::Continuous, 0.0, kInf, 0.0);
  int z0 = lp.num_cols();
  auto zcol = [&](int s, int p, int r) { return z0 + (s * P + p) * R + r; };
  const double w = 1.0 / S;
  for (int s = 0; s < S; ++s)
    for (int p = 0; p < P; ++p)
      for (int r = 0; r < R; ++r)
        lp.add_col(tag("z", {s, p, r}), VarKind::Continuous, 0.0, kInf,
                   -w * inst.patients[p].cancel_penalty);

  int gamma0 = lp.num_rows();
  for (int p = 0; p < P; ++p) {
    LinearRow row;
    for (int r = 0; r < R; ++r) row.coef.emplace_back(xcol(p, r), 1.0);
    row.sense = RowSense::EQ;
    row.rhs = xhat_hd[p];
    lp.add_row(std::move(row));
  }
  for (int s = 0; s < S; ++s)
    for (int r = 0; r < R; ++r) {
      LinearRow row;
      for (int p = 0; p < P; ++p)
        row.coef.emplace_back(zcol(s, p, r), static_cast<double>(scen.durations[s][p]));
      row.coef.emplace_back(y0 + r, -static_cast<double>(inst.time_limit[h][d]));
      row.sense = RowSense::LE;
      row.rhs = 0.0;
      lp.add_row(std::move(row));
    }
  for (int s = 0; s < S; ++s)
    for (int p = 0; p < P; ++p)
      for (int r = 0; r < R; ++r)
        lp.add_row({{{zcol(s, p, r), 1.0}, {xcol(p, r), -1.0}}, RowSense::LE, 0.0, ""});
  for (int p = 0; p < P; ++p)
    for (int r = 0; r < R; ++r)
      lp.add_row({{{xcol(p, r), 1.0}, {y0 + r, -1.0}}, RowSense::LE, 0.0, ""});
  int beta_row = lp.num_rows();
  {
    LinearRow row;
    for (int r = 0; r < R; ++r) row.coef.emplace_back(y0 + r, 1.0);
    row.sense = RowSense::LE;
    row.rhs = yhat;
    lp.add_row(std::move(row));
  }
  int delta0 = lp.num_rows();
  for (int r = 0; r < R; ++r) lp.add_row({{{y0 + r, 1.0}}, RowSense::LE, 1.0, ""});

  LpSolution sol = solve_lp(lp);
  AssignmentLpCut cut;
  if (sol.status != LpStatus::Optimal) return cut;  // zeroed cut, never binding
  cut.objective = sol.objective;
  cut.gamma.resize(P);
  for (int p = 0; p < P; ++p) cut.gamma[p] = sol.row_dual[gamma0 + p];
  cut.beta = sol.row_dual[beta_row];
  for (int r = 0; r < R; ++r) cut.delta_sum += sol.row_dual[delta0 + r];
  return cut;
}

ThreeStageContext::ThreeStageContext(const Instance& inst, const ScenarioSet& scen, AlgoConfig cfg)
    : inst_(inst),
      scen_(scen),
      cfg_(cfg),
      master_(build_lbbd_master(inst, scen)),
      clock_start_(std::chrono::steady_clock::now()) {}

void ThreeStageContext::set_deadline(double seconds_from_now) {
  if (seconds_from_now < 0) {
    deadline_s_ = -1.0;
    return;
  }
  deadline_s_ =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start_).count() +
      seconds_from_now;
}

std::uint64_t ThreeStageContext::cut_key(int h, int d, int yhat, const std::vector<int>& phat,
                                         int family) {
  std::uint64_t key = mix_hash(static_cast<std::uint64_t>(family) << 40 |
                                   static_cast<std::uint64_t>(h) << 24 |
                                   static_cast<std::uint64_t>(d) << 8 | yhat,
                               0x9E37ULL);
  for (int p : phat) key = mix_hash(key, static_cast<std::uint64_t>(p));
  return key;
}

InnerResult ThreeStageContext::inner_solve(int h, int d, const std::vector<int>& phat, int yhat,
                                           const std::function<bool(double)>& stop_hook,
                                           bool ignore_deadline) {
  auto key = std::make_tuple(h, d, yhat, phat);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  double remaining = -1.0;
  if (deadline_s_ >= 0 && !ignore_deadline) {
    double now =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start_).count();
    remaining = deadline_s_ - now;
    if (remaining <= 0.05) {
      InnerResult out;
      out.timed_out = true;
      return out;
    }
  }
  InnerResult res =
      solve_lbbd_subproblem(inst_, scen_, h, d, phat, yhat, cfg_.gap, stop_hook, remaining);
  if (res.exact) cache_.emplace(std::move(key), res);
  return res;
}

std::optional<Injection> ThreeStageContext::apply_phase_one() {
  const ThreeStageIndex& idx = master_.idx;
  std::optional<Injection> warm;
  if (cfg_.use_ffd) {
    ffd_ = ffd_initial(inst_, scen_);
    if (ffd_.ok) {
      Injection inj;
      inj.x.assign(master_.model.num_cols(), 0.0);
      const Schedule& sched = ffd_.schedule;
      for (int h = 0; h < idx.H; ++h)
        for (int d = 0; d < idx.D; ++d) {
          if (sched.suite_open[h][d]) inj.x[idx.u(h, d)] = 1.0;
          inj.x[idx.y(h, d)] = sched.rooms_open[h][d];
          for (int r = 0; r < idx.R; ++r)
            for (int p : sched.room_patients[h][d][r]) inj.x[idx.x(h, d, p)] = 1.0;
        }
      for (int p = 0; p < idx.P; ++p)
        if (sched.postponed[p] && idx.w(p) >= 0) inj.x[idx.w(p)] = 1.0;

      for (int h = 0; h < idx.H; ++h)
        for (int d = 0; d < idx.D; ++d) {
          std::vector<int> phat;
          for (int p = 0; p < idx.P; ++p)
            if (inj.x[idx.x(h, d, p)] > 0.5) phat.push_back(p);
          int yhat = sched.rooms_open[h][d];
          for (int j = 0; j <= idx.R; ++j) inj.x[idx.g(h, d, j)] = (yhat <= j) ? 1.0 : 0.0;
          if (phat.empty()) continue;
          InnerResult inner = inner_solve(h, d, phat, yhat, nullptr);
          inj.x[idx.q(h, d)] = inner.ub;
          if (cfg_.use_initial_cuts) {
            if (seen_.insert(cut_key(h, d, yhat, phat, 0)).second) {
              auto [lower, binder] = lbbd_cut_3(idx, phat, h, d, yhat, inner.qbar);
              master_.model.add_row(std::move(lower.row));
              master_.model.add_row(std::move(binder.row));
            }
            std::vector<double> xhat(idx.P, 0.0);
            for (int p : phat) xhat[p] = 1.0;
            AssignmentLpCut alp = assignment_lp_cut(inst_, scen_, h, d, xhat, yhat);
            LinearRow row;
            row.sense = RowSense::GE;
            row.coef.emplace_back(idx.q(h, d), 1.0);
            for (int p = 0; p < idx.P; ++p)
              if (alp.gamma[p] != 0.0) row.coef.emplace_back(idx.x(h, d, p), -alp.gamma[p]);
            if (alp.beta != 0.0) row.coef.emplace_back(idx.y(h, d), -alp.beta);
            row.rhs = alp.delta_sum;
            row.name = tag("alp", {h, d});
            master_.model.add_row(std::move(row));
          }
        }
      inj.objective = master_.model.objective_value(inj.x);
      warm = std::move(inj);
    }
  }
  if (cfg_.use_relaxation_bounds)
    for (Cut& cut : qlb2_bounds(inst_, scen_, idx)) master_.model.add_row(std::move(cut.row));
  return warm;
}

CallbackVerdict ThreeStageContext::lazy_callback(const NodeView& node) {
  const ThreeStageIndex& idx = master_.idx;
  CallbackVerdict verdict;
  Injection inj;
  inj.x = node.x;

  // operational part of the candidate objective (everything but Q)
  double op_cost = 0.0;
  for (int j = 0; j < master_.model.num_cols(); ++j)
    if (j < idx.q0 || j >= idx.q0 + idx.H * idx.D)
      op_cost += master_.model.cols[j].obj * node.x[j];
  const double global_ub = node.has_incumbent ? node.incumbent_objective : kInf;

  bool all_exact = true;
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d) {
      std::vector<int> phat;
      for (int p = 0; p < idx.P; ++p)
        if (node.x[idx.x(h, d, p)] > 0.5) phat.push_back(p);
      int yhat = static_cast<int>(std::lround(node.x[idx.y(h, d)]));
      for (int j = 0; j <= idx.R; ++j) inj.x[idx.g(h, d, j)] = (yhat <= j) ? 1.0 : 0.0;
      if (phat.empty()) {
        inj.x[idx.q(h, d)] = 0.0;
        continue;
      }
      InnerResult inner = inner_solve(h, d, phat, yhat, [&](double qlb) {
        return early_stop(global_ub, op_cost, qlb);
      });
      if (inner.timed_out) {
        // out of wall budget mid-pricing: discard the node; the engine is
        // about to stop on its own time check
        verdict.cuts.clear();
        verdict.prune = true;
        return verdict;
      }
      double qhat = node.x[idx.q(h, d)];
      // a stopped bound that does not cut the candidate off cannot certify
      // it either; price exactly before letting the engine accept anything
      if (!inner.exact && qhat >= inner.qbar - 1e-6)
        inner = inner_solve(h, d, phat, yhat, nullptr);
      if (inner.timed_out) {
        verdict.cuts.clear();
        verdict.prune = true;
        return verdict;
      }
      all_exact = all_exact && inner.exact;
      inj.x[idx.q(h, d)] = inner.exact ? inner.ub : inner.qbar;
      std::uint64_t key = cut_key(h, d, yhat, phat, inner.exact ? 0 : 1);
      // a stopped solve only yields a bound; an improved bound is a new cut
      if (!inner.exact)
        key = mix_hash(key, static_cast<std::uint64_t>(std::llround(inner.qbar * 1e6)));
      if (qhat < inner.qbar - 1e-6 && inner.qbar > 1e-12 && seen_.insert(key).second) {
        auto [lower, binder] = lbbd_cut_3(idx, phat, h, d, yhat, inner.qbar);
        verdict.cuts.push_back({std::move(lower.row), CutFamily::Lbbd});
        verdict.cuts.push_back({std::move(binder.row), CutFamily::Lbbd});
      }
      if (inner.exact) {
        std::vector<double> xhat(idx.P, 0.0);
        for (int p : phat) xhat[p] = 1.0;
        AssignmentLpCut alp = assignment_lp_cut(inst_, scen_, h, d, xhat, yhat);
        if (qhat < alp.objective - 1e-6 && seen_.insert(cut_key(h, d, yhat, phat, 2)).second) {
          LinearRow row;
          row.sense = RowSense::GE;
          row.coef.emplace_back(idx.q(h, d), 1.0);
          for (int p = 0; p < idx.P; ++p)
            if (alp.gamma[p] != 0.0) row.coef.emplace_back(idx.x(h, d, p), -alp.gamma[p]);
          if (alp.beta != 0.0) row.coef.emplace_back(idx.y(h, d), -alp.beta);
          row.rhs = alp.delta_sum;
          row.name = tag("alp", {h, d});
          verdict.cuts.push_back({std::move(row), CutFamily::BendersLp});
        }
      }
    }

  if (all_exact) {
    inj.objective = master_.model.objective_value(inj.x);
    verdict.inject = std::move(inj);
  }
  return verdict;
}

CallbackVerdict ThreeStageContext::user_callback(const NodeView& node) {
  const ThreeStageIndex& idx = master_.idx;
  CallbackVerdict verdict;
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d) {
      std::vector<double> xhat(idx.P, 0.0);
      bool any = false;
      for (int p = 0; p < idx.P; ++p) {
        xhat[p] = std::max(0.0, node.x[idx.x(h, d, p)]);
        any = any || xhat[p] > 1e-6;
      }
      if (!any) continue;
      AssignmentLpCut alp = assignment_lp_cut(inst_, scen_, h, d, xhat, node.x[idx.y(h, d)]);
      if (node.x[idx.q(h, d)] < alp.objective - 1e-6) {
        LinearRow row;
        row.sense = RowSense::GE;
        row.coef.emplace_back(idx.q(h, d), 1.0);
        for (int p = 0; p < idx.P; ++p)
          if (alp.gamma[p] != 0.0) row.coef.emplace_back(idx.x(h, d, p), -alp.gamma[p]);
        if (alp.beta != 0.0) row.coef.emplace_back(idx.y(h, d), -alp.beta);
        row.rhs = alp.delta_sum;
        row.name = tag("alpu", {h, d});
        verdict.cuts.push_back({std::move(row), CutFamily::BendersLp});
      }
    }
  return verdict;
}

Schedule ThreeStageContext::expand_schedule(const std::vector<double>& incumbent) {
  const ThreeStageIndex& idx = master_.idx;
  Schedule sched = empty_schedule(inst_);
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d) {
      sched.suite_open[h][d] = incumbent[idx.u(h, d)] > 0.5;
      int yhat = static_cast<int>(std::lround(incumbent[idx.y(h, d)]));
      sched.rooms_open[h][d] = yhat;
      std::vector<int> phat;
      for (int p = 0; p < idx.P; ++p)
        if (incumbent[idx.x(h, d, p)] > 0.5) phat.push_back(p);
      if (phat.empty()) continue;
      InnerResult inner = inner_solve(h, d, phat, yhat, nullptr, /*ignore_deadline=*/true);
      for (int r = 0; r < yhat && r < static_cast<int>(inner.room_patients.size()); ++r)
        for (int p : inner.room_patients[r]) {
          sched.room_patients[h][d][r].push_back(p);
          sched.postponed[p] = 0;
        }
    }
  sched.operational_cost = operational_cost(inst_, sched);
  double cancel = 0.0;
  std::vector<std::uint8_t> mask(inst_.num_patients(), 0);
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      for (int r = 0; r < sched.rooms_open[h][d]; ++r) {
        if (sched.room_patients[h][d][r].empty()) continue;
        std::fill(mask.begin(), mask.end(), 0);
        for (int p : sched.room_patients[h][d][r]) mask[p] = 1;
        for (int s = 0; s < scen_.count(); ++s)
          cancel += exact_cancel_cost(build_cancellation_subproblem(inst_, mask, h, d, s, scen_));
      }
  sched.expected_cancel_cost = cancel / scen_.count();
  return sched;
}

TwoStageResult solve_three_stage(const Instance& inst, const ScenarioSet& scen,
                                 const AlgoConfig& cfg) {
  ThreeStageContext ctx(inst, scen, cfg);
  SolveOptions opts;
  opts.gap = cfg.gap;
  opts.node_limit = cfg.node_limit;
  opts.time_limit_s = cfg.time_limit_s;
  ctx.set_deadline(cfg.time_limit_s);
  opts.warm_start = ctx.apply_phase_one();

  NodeCallback user;
  if (cfg.use_user_cuts) user = [&](const NodeView& n) { return ctx.user_callback(n); };
  SolveReport report =
      solve(ctx.master(), [&](const NodeView& n) { return ctx.lazy_callback(n); }, user, opts);

  TwoStageResult res;
  res.schedule =
      report.has_incumbent ? ctx.expand_schedule(report.x) : empty_schedule(inst);
  res.report = std::move(report);
  return res;
}

}  // namespace sdors
