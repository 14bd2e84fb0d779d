#include "sdors/core_models.hpp"

#include <algorithm>
#include <numeric>

#include "sdors/bdd.hpp"

namespace sdors {

namespace {

std::string tag(const char* sym, std::initializer_list<int> ix) {
  std::string s(sym);
  for (int v : ix) s += "_" + std::to_string(v);
  return s;
}

void add_first_stage_columns(MipModel& m, FirstStageIndex& idx, const Instance& inst,
                             bool x_carries_cancel) {
  const int H = inst.hospitals, D = inst.days, P = inst.num_patients(), R = inst.rooms;
  idx.H = H;
  idx.D = D;
  idx.P = P;
  idx.R = R;
  idx.u0 = m.num_cols();
  for (int h = 0; h < H; ++h)
    for (int d = 0; d < D; ++d)
      m.add_col(tag("u", {h, d}), VarKind::Binary, 0, 1, inst.suite_open_cost[h][d]);
  idx.y0 = m.num_cols();
  for (int h = 0; h < H; ++h)
    for (int d = 0; d < D; ++d)
      for (int r = 0; r < R; ++r)
        m.add_col(tag("y", {h, d, r}), VarKind::Binary, 0, 1, inst.room_open_cost[h][d]);
  idx.x0 = m.num_cols();
  for (int h = 0; h < H; ++h)
    for (int d = 0; d < D; ++d)
      for (int p = 0; p < P; ++p)
        for (int r = 0; r < R; ++r) {
          double obj = inst.patients[p].sched_benefit[d];
          if (x_carries_cancel) obj += inst.patients[p].cancel_penalty;
          m.add_col(tag("x", {h, d, p, r}), VarKind::Binary, 0, 1, obj);
        }
  idx.w_col.assign(P, -1);
  for (int p = 0; p < P; ++p)
    if (!inst.patients[p].mandatory)
      idx.w_col[p] = m.add_col(tag("w", {p}), VarKind::Binary, 0, 1, inst.patients[p].unsched_penalty);
}

void add_first_stage_rows(MipModel& m, const FirstStageIndex& idx, const Instance& inst,
                          bool cancel_symmetry) {
  const int H = idx.H, D = idx.D, P = idx.P, R = idx.R;
  for (int p = 0; p < P; ++p) {
    LinearRow row;
    for (int h = 0; h < H; ++h)
      for (int d = 0; d < D; ++d)
        for (int r = 0; r < R; ++r) row.coef.emplace_back(idx.x(h, d, p, r), 1.0);
    if (idx.w(p) >= 0) row.coef.emplace_back(idx.w(p), 1.0);
    row.sense = RowSense::EQ;
    row.rhs = 1.0;
    row.name = tag("assign", {p});
    m.add_row(std::move(row));
  }
  for (int h = 0; h < H; ++h)
    for (int d = 0; d < D; ++d)
      for (int r = 1; r < R; ++r)
        m.add_row({{{idx.y(h, d, r), 1.0}, {idx.y(h, d, r - 1), -1.0}},
                   RowSense::LE,
                   0.0,
                   tag("ysym", {h, d, r})});
  if (cancel_symmetry) {
    for (int h = 0; h < H; ++h)
      for (int d = 0; d < D; ++d)
        for (int r = 1; r < R; ++r) {
          LinearRow row;
          for (int p = 0; p < P; ++p) {
            double c = inst.patients[p].cancel_penalty;
            if (c == 0.0) continue;
            row.coef.emplace_back(idx.x(h, d, p, r), c);
            row.coef.emplace_back(idx.x(h, d, p, r - 1), -c);
          }
          row.sense = RowSense::LE;
          row.rhs = 0.0;
          row.name = tag("xsym", {h, d, r});
          m.add_row(std::move(row));
        }
  }
  for (int h = 0; h < H; ++h)
    for (int d = 0; d < D; ++d)
      for (int r = 0; r < R; ++r)
        m.add_row(
            {{{idx.y(h, d, r), 1.0}, {idx.u(h, d), -1.0}}, RowSense::LE, 0.0, tag("yu", {h, d, r})});
  for (int h = 0; h < H; ++h)
    for (int d = 0; d < D; ++d)
      for (int p = 0; p < P; ++p)
        for (int r = 0; r < R; ++r)
          m.add_row({{{idx.x(h, d, p, r), 1.0}, {idx.y(h, d, r), -1.0}},
                     RowSense::LE,
                     0.0,
                     tag("xy", {h, d, p, r})});
}

}  // namespace

DeModel build_de(const Instance& inst, const ScenarioSet& scen) {
  validate(inst, scen);
  DeModel de;
  MipModel& m = de.model;
  DeIndex& idx = de.idx;
  add_first_stage_columns(m, idx, inst, /*x_carries_cancel=*/true);
  idx.S = scen.count();
  const double w = 1.0 / idx.S;
  idx.z0 = m.num_cols();
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      for (int p = 0; p < idx.P; ++p)
        for (int r = 0; r < idx.R; ++r)
          for (int s = 0; s < idx.S; ++s)
            m.add_col(tag("z", {h, d, p, r, s}), VarKind::Binary, 0, 1,
                      -w * inst.patients[p].cancel_penalty);
  add_first_stage_rows(m, idx, inst, /*cancel_symmetry=*/true);
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      for (int r = 0; r < idx.R; ++r)
        for (int s = 0; s < idx.S; ++s) {
          LinearRow row;
          for (int p = 0; p < idx.P; ++p)
            row.coef.emplace_back(idx.z(h, d, p, r, s), static_cast<double>(scen.durations[s][p]));
          row.coef.emplace_back(idx.y(h, d, r), -static_cast<double>(inst.time_limit[h][d]));
          row.sense = RowSense::LE;
          row.rhs = 0.0;
          row.name = tag("knap", {h, d, r, s});
          m.add_row(std::move(row));
        }
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      for (int p = 0; p < idx.P; ++p)
        for (int r = 0; r < idx.R; ++r)
          for (int s = 0; s < idx.S; ++s)
            m.add_row({{{idx.z(h, d, p, r, s), 1.0}, {idx.x(h, d, p, r), -1.0}},
                       RowSense::LE,
                       0.0,
                       tag("zx", {h, d, p, r, s})});
  return de;
}

TwoStageModel build_two_stage_master(const Instance& inst, const ScenarioSet& scen) {
  validate(inst, scen);
  TwoStageModel ts;
  MipModel& m = ts.model;
  TwoStageIndex& idx = ts.idx;
  add_first_stage_columns(m, idx, inst, /*x_carries_cancel=*/false);
  idx.S = scen.count();
  idx.q0 = m.num_cols();
  const double w = 1.0 / idx.S;
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      for (int r = 0; r < idx.R; ++r)
        for (int s = 0; s < idx.S; ++s)
          m.add_col(tag("Q", {h, d, r, s}), VarKind::Continuous, 0.0, kInf, w);
  add_first_stage_rows(m, idx, inst, /*cancel_symmetry=*/true);
  return ts;
}

SubproblemSpec build_cancellation_subproblem(const Instance& inst,
                                             const std::vector<std::uint8_t>& xhat, int h, int d,
                                             int s, const ScenarioSet& scen) {
  SubproblemSpec spec;
  spec.capacity = inst.time_limit[h][d];
  for (int p = 0; p < inst.num_patients(); ++p)
    if (xhat[p]) {
      spec.patients.push_back(p);
      spec.weights.push_back(scen.durations[s][p]);
      spec.values.push_back(inst.patients[p].cancel_penalty);
    }
  return spec;
}

DorsModel build_deterministic_dors(const Instance& inst, const std::vector<int>& nominal_durations) {
  validate(inst);
  if (static_cast<int>(nominal_durations.size()) != inst.num_patients())
    throw std::invalid_argument("invalid instance: field 'T': one nominal duration per patient required");
  DorsModel dors;
  MipModel& m = dors.model;
  FirstStageIndex& idx = dors.idx;
  add_first_stage_columns(m, idx, inst, /*x_carries_cancel=*/false);
  add_first_stage_rows(m, idx, inst, /*cancel_symmetry=*/false);
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      for (int r = 0; r < idx.R; ++r) {
        LinearRow row;
        for (int p = 0; p < idx.P; ++p)
          row.coef.emplace_back(idx.x(h, d, p, r), static_cast<double>(nominal_durations[p]));
        row.coef.emplace_back(idx.y(h, d, r), -static_cast<double>(inst.time_limit[h][d]));
        row.sense = RowSense::LE;
        row.rhs = 0.0;
        row.name = tag("cap", {h, d, r});
        m.add_row(std::move(row));
      }
  return dors;
}

Schedule schedule_from_solution(const Instance& inst, const ScenarioSet& scen,
                                const FirstStageIndex& idx, std::span<const double> x) {
  Schedule sched = empty_schedule(inst);
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d) {
      sched.suite_open[h][d] = x[idx.u(h, d)] > 0.5;
      int open = 0;
      for (int r = 0; r < idx.R; ++r)
        if (x[idx.y(h, d, r)] > 0.5) open = r + 1;
      sched.rooms_open[h][d] = open;
      for (int r = 0; r < idx.R; ++r)
        for (int p = 0; p < idx.P; ++p)
          if (x[idx.x(h, d, p, r)] > 0.5) {
            sched.room_patients[h][d][r].push_back(p);
            sched.postponed[p] = 0;
          }
    }
  sched.operational_cost = operational_cost(inst, sched);
  double cancel = 0.0;
  const double w = 1.0 / scen.count();
  std::vector<std::uint8_t> mask(inst.num_patients());
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d)
      for (int r = 0; r < sched.rooms_open[h][d]; ++r) {
        if (sched.room_patients[h][d][r].empty()) continue;
        std::fill(mask.begin(), mask.end(), 0);
        for (int p : sched.room_patients[h][d][r]) mask[p] = 1;
        for (int s = 0; s < scen.count(); ++s)
          cancel += w * exact_cancel_cost(build_cancellation_subproblem(inst, mask, h, d, s, scen));
      }
  sched.expected_cancel_cost = cancel;
  return sched;
}

std::vector<double> solution_from_schedule(const Instance& inst, const FirstStageIndex& idx,
                                           int num_cols, const Schedule& sched) {
  std::vector<double> x(num_cols, 0.0);
  for (int h = 0; h < idx.H; ++h)
    for (int d = 0; d < idx.D; ++d) {
      if (sched.suite_open[h][d]) x[idx.u(h, d)] = 1.0;
      for (int r = 0; r < sched.rooms_open[h][d]; ++r) x[idx.y(h, d, r)] = 1.0;
      // room symmetry: cancellation-cost load non-increasing in the room index
      std::vector<std::vector<int>> lists(sched.room_patients[h][d].begin(),
                                          sched.room_patients[h][d].end());
      std::stable_sort(lists.begin(), lists.end(), [&](const auto& a, const auto& b) {
        auto load = [&](const std::vector<int>& l) {
          double c = 0.0;
          for (int p : l) c += inst.patients[p].cancel_penalty;
          return c;
        };
        return load(a) > load(b);
      });
      for (int r = 0; r < static_cast<int>(lists.size()); ++r)
        for (int p : lists[r]) x[idx.x(h, d, p, r)] = 1.0;
    }
  for (int p = 0; p < idx.P; ++p)
    if (sched.postponed[p] && idx.w(p) >= 0) x[idx.w(p)] = 1.0;
  return x;
}

}  // namespace sdors
