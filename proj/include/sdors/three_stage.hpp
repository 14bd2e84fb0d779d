#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sdors/bdd.hpp"
#include "sdors/bnc.hpp"
#include "sdors/core_models.hpp"
#include "sdors/domain.hpp"
#include "sdors/two_stage.hpp"

namespace sdors {

// Master over (h,d) aggregates: y_hd counts rooms, x_hdp drops the room
// index, Q_hd carries the expected cancellation cost, and the g_hdj switch
// variables for the optimality cuts are all created up front.
struct ThreeStageIndex {
  int H = 0, D = 0, P = 0, R = 0, S = 0;
  int u0 = 0, y0 = 0, x0 = 0, q0 = 0, g0 = 0;
  std::vector<int> w_col;

  int u(int h, int d) const { return u0 + h * D + d; }
  int y(int h, int d) const { return y0 + h * D + d; }
  int x(int h, int d, int p) const { return x0 + (h * D + d) * P + p; }
  int w(int p) const { return w_col[p]; }
  int q(int h, int d) const { return q0 + h * D + d; }
  int g(int h, int d, int j) const { return g0 + (h * D + d) * (R + 1) + j; }
};

struct ThreeStageModel {
  MipModel model;
  ThreeStageIndex idx;
};

ThreeStageModel build_lbbd_master(const Instance& inst, const ScenarioSet& scen);

// Optimality cut pair reusing the pre-created g variable for j = yhat:
//   Q_hd >= qbar * (g_hdj - sum_{p in Phat} (1 - x_hdp))
//   y_hd >= (1 + yhat) * (1 - g_hdj)
std::pair<Cut, Cut> lbbd_cut_3(const ThreeStageIndex& idx, const std::vector<int>& phat, int h,
                               int d, int yhat, double qbar);

// Q_hd >= (1/S) sum_s min_p(c_p/T^s_p) (sum_p T^s_p x_hdp - B_hd y_hd)
std::vector<Cut> qlb2_bounds(const Instance& inst, const ScenarioSet& scen,
                             const ThreeStageIndex& idx);

bool early_stop(double global_ub, double incumbent_op_cost, double q_lower_bound);

struct InnerResult {
  bool exact = false;
  bool timed_out = false;
  double qbar = 0.0;  // best bound; safe for cuts, exact at gap 0
  double ub = 0.0;    // incumbent value; used when completing solutions
  std::vector<std::vector<int>> room_patients;  // per room, patient ids
};

// Solves the (h,d) assignment subproblem (a 2SIP itself) by an inner
// branch-and-cut: room assignment master with theta recourse columns, lazy
// strengthened diagram cuts plus knapsack-LP cuts, FFD warm start. stop_hook
// is polled on every lower-bound improvement; returning true aborts the
// solve and flags the result as a bound.
InnerResult solve_lbbd_subproblem(const Instance& inst, const ScenarioSet& scen, int h, int d,
                                  const std::vector<int>& phat, int yhat, double gap,
                                  const std::function<bool(double)>& stop_hook,
                                  double time_limit_s = -1.0);

// Dual-based cut on Q_hd from the LP relaxation of the (h,d) subproblem:
//   Q_hd >= sum_p gamma_p x_hdp + beta y_hd + sum_r delta_r
struct AssignmentLpCut {
  double objective = 0.0;  // LP optimum
  std::vector<double> gamma;  // per patient
  double beta = 0.0;
  double delta_sum = 0.0;
};

AssignmentLpCut assignment_lp_cut(const Instance& inst, const ScenarioSet& scen, int h, int d,
                                  const std::vector<double>& xhat_hd, double yhat);

class ThreeStageContext {
 public:
  ThreeStageContext(const Instance& inst, const ScenarioSet& scen, AlgoConfig cfg);

  MipModel& master() { return master_.model; }
  const ThreeStageIndex& index() const { return master_.idx; }

  std::optional<Injection> apply_phase_one();
  CallbackVerdict lazy_callback(const NodeView& node);
  CallbackVerdict user_callback(const NodeView& node);

  Schedule expand_schedule(const std::vector<double>& incumbent);
  const FfdResult& ffd() const { return ffd_; }

  void set_deadline(double seconds_from_now);

 private:
  InnerResult inner_solve(int h, int d, const std::vector<int>& phat, int yhat,
                          const std::function<bool(double)>& stop_hook, bool ignore_deadline = false);
  std::uint64_t cut_key(int h, int d, int yhat, const std::vector<int>& phat, int family);

  const Instance& inst_;
  const ScenarioSet& scen_;
  AlgoConfig cfg_;
  ThreeStageModel master_;
  std::map<std::tuple<int, int, int, std::vector<int>>, InnerResult> cache_;
  std::unordered_set<std::uint64_t> seen_;
  FfdResult ffd_;
  double deadline_s_ = -1.0;  // relative to clock_start_
  std::chrono::steady_clock::time_point clock_start_;
};

TwoStageResult solve_three_stage(const Instance& inst, const ScenarioSet& scen,
                                 const AlgoConfig& cfg);

}  // namespace sdors
