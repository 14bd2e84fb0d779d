#pragma once

#include <vector>

#include "sdors/domain.hpp"
#include "sdors/mip.hpp"
#include "sdors/subproblem.hpp"

namespace sdors {

// Column layout shared by the scenario-expanded model and the recourse-free
// master: u, y, x, w blocks first, then the model-specific recourse block,
// each block in lexicographic (h,d,p,r,s) order. w columns exist only for
// non-mandatory patients.
struct FirstStageIndex {
  int H = 0, D = 0, P = 0, R = 0, S = 0;
  int u0 = 0, y0 = 0, x0 = 0;
  std::vector<int> w_col;  // per patient, -1 for mandatory

  int u(int h, int d) const { return u0 + h * D + d; }
  int y(int h, int d, int r) const { return y0 + (h * D + d) * R + r; }
  int x(int h, int d, int p, int r) const { return x0 + ((h * D + d) * P + p) * R + r; }
  int w(int p) const { return w_col[p]; }
};

struct DeIndex : FirstStageIndex {
  int z0 = 0;
  int z(int h, int d, int p, int r, int s) const { return z0 + (((h * D + d) * P + p) * R + r) * S + s; }
};

struct TwoStageIndex : FirstStageIndex {
  int q0 = 0;
  int q(int h, int d, int r, int s) const { return q0 + ((h * D + d) * R + r) * S + s; }
};

struct DeModel {
  MipModel model;
  DeIndex idx;
};

struct TwoStageModel {
  MipModel model;
  TwoStageIndex idx;
};

struct DorsModel {
  MipModel model;
  FirstStageIndex idx;
};

// Scenario-expanded formulation: first-stage rows, per-scenario knapsack rows
// and z<=x linking, cancellation terms averaged over scenarios.
DeModel build_de(const Instance& inst, const ScenarioSet& scen);

// First-stage rows plus one nonnegative recourse-cost column per
// (h,d,r,scenario); the value function is approximated by cuts added later.
TwoStageModel build_two_stage_master(const Instance& inst, const ScenarioSet& scen);

// Cancellation knapsack for one (h,d,r) under one scenario, given a binary
// room assignment over patients.
SubproblemSpec build_cancellation_subproblem(const Instance& inst,
                                             const std::vector<std::uint8_t>& xhat, int h, int d,
                                             int s, const ScenarioSet& scen);

// Deterministic baseline: one nominal duration per patient, hard capacity on
// the assignment itself, no cancellation variables.
DorsModel build_deterministic_dors(const Instance& inst, const std::vector<int>& nominal_durations);

// Extracts a room-level Schedule from a first-stage solution vector; the
// expected cancellation cost is re-priced exactly per opened room.
Schedule schedule_from_solution(const Instance& inst, const ScenarioSet& scen,
                                const FirstStageIndex& idx, std::span<const double> x);

// Packs a Schedule into a column vector (u, y, x, w blocks; recourse columns
// zeroed) honoring the room-symmetry order on cancellation costs.
std::vector<double> solution_from_schedule(const Instance& inst, const FirstStageIndex& idx,
                                           int num_cols, const Schedule& sched);

}  // namespace sdors
