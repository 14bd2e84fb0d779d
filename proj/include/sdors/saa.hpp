#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sdors/domain.hpp"
#include "sdors/two_stage.hpp"

namespace sdors {

struct SaaConfig {
  int replications = 10;          // paper-scale: 30
  int scenarios_per_replication = 20;
  int select_samples = 200;       // paper-scale: 1000
  int ub_samples = 1000;          // paper-scale: 10000
  std::uint64_t seed = 0;
};

using SolverFn = std::function<TwoStageResult(const Instance&, const ScenarioSet&)>;

struct SaaReport {
  std::vector<double> lb_objectives;  // one per replication
  double lb_mean = 0.0, lb_halfwidth = 0.0;
  int selected = -1;                  // replication whose schedule was kept
  double ub_mean = 0.0, ub_halfwidth = 0.0;
  double worst_case_gap = 0.0;        // fraction, not percent
};

// ((ub_mean + ub_w) - (lb_mean - lb_w)) / (lb_mean - lb_w), absolute value.
double worst_case_gap(double lb_mean, double lb_w, double ub_mean, double ub_w);

// Replicated lower-bound solves, schedule selection on a fresh medium sample,
// and an upper-bound evaluation of the selected schedule on a large sample.
SaaReport saa_bounds(const Instance& inst, const SaaConfig& cfg, const SolverFn& solver);

struct EvalReport {
  double cancel_rate_mean = 0.0, cancel_rate_halfwidth = 0.0;
  double utilization_mean = 0.0, utilization_halfwidth = 0.0;
  double opened_utilization_mean = 0.0;
  int scheduled = 0;
  int rooms_opened = 0;
  int samples = 0;
};

// Monte-Carlo evaluation of a fixed first-stage schedule: fresh durations per
// sample, exact per-room cancellation decisions. Utilization counts all
// available rooms; opened utilization counts only opened ones.
EvalReport evaluate_schedule(const Instance& inst, const Schedule& sched, int samples,
                             std::uint64_t seed);

// 1: duration sd 40 -> 60; 2: cancellation penalties scaled to 2/3;
// 3: room time limits halved.
Instance sensitivity_case(const Instance& inst, int case_id);

// Expected cancellation cost of a schedule under one duration draw.
double recourse_cost(const Instance& inst, const Schedule& sched,
                     const std::vector<int>& durations);

}  // namespace sdors
