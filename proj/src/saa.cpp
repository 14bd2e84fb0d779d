#include "sdors/saa.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sdors/bdd.hpp"
#include "sdors/rng.hpp"
#include "sdors/sampling.hpp"
#include "sdors/stats.hpp"

namespace sdors {

double worst_case_gap(double lb_mean, double lb_w, double ub_mean, double ub_w) {
  double lo = lb_mean - lb_w;
  return std::abs(((ub_mean + ub_w) - lo) / lo);
}

namespace {

SubproblemSpec room_spec(const Instance& inst, const std::vector<int>& patients,
                         const std::vector<int>& durations, int h, int d) {
  SubproblemSpec spec;
  spec.capacity = inst.time_limit[h][d];
  for (int p : patients) {
    spec.patients.push_back(p);
    spec.weights.push_back(durations[p]);
    spec.values.push_back(inst.patients[p].cancel_penalty);
  }
  return spec;
}

}  // namespace

double recourse_cost(const Instance& inst, const Schedule& sched,
                     const std::vector<int>& durations) {
  double cost = 0.0;
  for (int h = 0; h < inst.hospitals; ++h)
    for (int d = 0; d < inst.days; ++d)
      for (int r = 0; r < sched.rooms_open[h][d]; ++r) {
        const auto& room = sched.room_patients[h][d][r];
        if (room.empty()) continue;
        cost += exact_cancel_cost(room_spec(inst, room, durations, h, d));
      }
  return cost;
}

SaaReport saa_bounds(const Instance& inst, const SaaConfig& cfg, const SolverFn& solver) {
  if (cfg.replications < 2) throw std::invalid_argument("saa needs at least 2 replications");
  SaaReport rep;
  std::vector<Schedule> schedules;
  for (int n = 0; n < cfg.replications; ++n) {
    ScenarioSet scen = sample_scenarios(inst, cfg.scenarios_per_replication,
                                        split_stream(cfg.seed, "rep" + std::to_string(n)));
    TwoStageResult res = solver(inst, scen);
    if (!res.report.has_incumbent)
      throw std::runtime_error("replication " + std::to_string(n) + " ended without an incumbent (" +
                               termination_name(res.report.reason) + ")");
    rep.lb_objectives.push_back(res.report.objective);
    schedules.push_back(std::move(res.schedule));
  }
  rep.lb_mean = mean(rep.lb_objectives);
  rep.lb_halfwidth = ci95_halfwidth(rep.lb_objectives);

  ScenarioSet select = sample_scenarios(inst, cfg.select_samples, split_stream(cfg.seed, "select"));
  double best = kInf;
  for (int n = 0; n < cfg.replications; ++n) {
    double q = 0.0;
    for (int s = 0; s < select.count(); ++s)
      q += recourse_cost(inst, schedules[n], select.durations[s]);
    double val = schedules[n].operational_cost + q / select.count();
    if (val < best - 1e-12) {
      best = val;
      rep.selected = n;
    }
  }

  const Schedule& chosen = schedules[rep.selected];
  ScenarioSet ub = sample_scenarios(inst, cfg.ub_samples, split_stream(cfg.seed, "ub"));
  std::vector<double> totals(ub.count());
  for (int s = 0; s < ub.count(); ++s)
    totals[s] = chosen.operational_cost + recourse_cost(inst, chosen, ub.durations[s]);
  rep.ub_mean = mean(totals);
  rep.ub_halfwidth = ci95_halfwidth(totals);
  rep.worst_case_gap = worst_case_gap(rep.lb_mean, rep.lb_halfwidth, rep.ub_mean, rep.ub_halfwidth);
  return rep;
}

EvalReport evaluate_schedule(const Instance& inst, const Schedule& sched, int samples,
                             std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("evaluation needs at least 2 samples");
  validate_schedule(inst, sched);
  EvalReport rep;
  rep.samples = samples;
  rep.scheduled = sched.scheduled_count();
  rep.rooms_opened = sched.opened_room_count();

  double total_minutes = 0.0, opened_minutes = 0.0;
  for (int h = 0; h < inst.hospitals; ++h)
    for (int d = 0; d < inst.days; ++d) {
      total_minutes += static_cast<double>(inst.time_limit[h][d]) * inst.rooms;
      opened_minutes += static_cast<double>(inst.time_limit[h][d]) * sched.rooms_open[h][d];
    }

  ScenarioSet draws = sample_scenarios(inst, samples, seed);
  std::vector<double> cancel_rates(samples), utilizations(samples), opened_utils(samples);
  for (int s = 0; s < samples; ++s) {
    int cancelled = 0;
    double accepted = 0.0;
    for (int h = 0; h < inst.hospitals; ++h)
      for (int d = 0; d < inst.days; ++d)
        for (int r = 0; r < sched.rooms_open[h][d]; ++r) {
          const auto& room = sched.room_patients[h][d][r];
          if (room.empty()) continue;
          PathResult path = shortest_path(build_diagram(room_spec(inst, room, draws.durations[s], h, d)));
          cancelled += static_cast<int>(room.size() - path.keep.size());
          for (int p : path.keep) accepted += draws.durations[s][p];
        }
    cancel_rates[s] = rep.scheduled > 0 ? static_cast<double>(cancelled) / rep.scheduled : 0.0;
    utilizations[s] = total_minutes > 0 ? accepted / total_minutes : 0.0;
    opened_utils[s] = opened_minutes > 0 ? accepted / opened_minutes : 0.0;
  }
  rep.cancel_rate_mean = mean(cancel_rates);
  rep.utilization_mean = mean(utilizations);
  rep.opened_utilization_mean = mean(opened_utils);
  double z = 1.959963984540054;  // normal approximation
  rep.cancel_rate_halfwidth = z * sample_sd(cancel_rates) / std::sqrt(static_cast<double>(samples));
  rep.utilization_halfwidth = z * sample_sd(utilizations) / std::sqrt(static_cast<double>(samples));
  return rep;
}

Instance sensitivity_case(const Instance& inst, int case_id) {
  Instance out = inst;
  switch (case_id) {
    case 1:
      out.duration.sd = 60.0;
      break;
    case 2:
      out.kappa3 *= 2.0 / 3.0;
      out.kappa4 *= 2.0 / 3.0;
      for (auto& p : out.patients) p.cancel_penalty *= 2.0 / 3.0;
      break;
    case 3:
      for (auto& row : out.time_limit)
        for (int& b : row) b = static_cast<int>(std::lround(b / 2.0));
      break;
    default:
      throw std::invalid_argument("unknown sensitivity case " + std::to_string(case_id));
  }
  return out;
}

}  // namespace sdors
