#include "sdors/domain.hpp"

#include <cmath>
#include <stdexcept>

namespace sdors {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw std::invalid_argument("invalid instance: field '" + field + "': " + what);
}

}  // namespace

void validate(const Instance& inst) {
  if (inst.hospitals < 1) fail("hospitals", "count must be >= 1");
  if (inst.days < 1) fail("days", "count must be >= 1");
  if (inst.rooms < 1) fail("rooms", "count must be >= 1");
  if (inst.patients.empty()) fail("patients", "count must be >= 1");

  auto check_hd = [&](const auto& m, const char* name, auto positive) {
    if (static_cast<int>(m.size()) != inst.hospitals) fail(name, "hospital dimension mismatch");
    for (const auto& row : m) {
      if (static_cast<int>(row.size()) != inst.days) fail(name, "day dimension mismatch");
      for (auto v : row)
        if (!positive(v)) fail(name, "entries must be > 0");
    }
  };
  check_hd(inst.suite_open_cost, "G", [](double v) { return v > 0.0; });
  check_hd(inst.room_open_cost, "F", [](double v) { return v > 0.0; });
  check_hd(inst.time_limit, "B", [](int v) { return v > 0; });

  for (const auto& p : inst.patients) {
    std::string tag = "patients[" + std::to_string(p.id) + "]";
    if (p.urgency < 1 || p.urgency > 5) fail(tag + ".rho", "must be in 1..5");
    if (p.wait_days < 0) fail(tag + ".alpha", "must be >= 0");
    if (static_cast<int>(p.sched_benefit.size()) != inst.days)
      fail(tag + ".c_sched", "must have one entry per day");
    for (double c : p.sched_benefit)
      if (c > 0.0) fail(tag + ".c_sched", "entries must be <= 0");
    if (p.unsched_penalty < 0.0) fail(tag + ".c_unsched", "must be >= 0");
    if (p.cancel_penalty < 0.0) fail(tag + ".c_cancel", "must be >= 0");
    double omega = static_cast<double>(p.wait_days - inst.days) * p.urgency;
    if (std::abs(omega - p.health_score) > 1e-9) fail(tag + ".omega", "must equal (alpha-|D|)*rho");
    if (p.mandatory != (p.health_score >= inst.gamma))
      fail(tag + ".mandatory", "must hold exactly when omega >= gamma");
  }
}

void validate(const Instance& inst, const ScenarioSet& scen) {
  validate(inst);
  if (scen.count() < 1) throw std::invalid_argument("invalid scenarios: field 'S': count must be >= 1");
  for (int s = 0; s < scen.count(); ++s) {
    if (static_cast<int>(scen.durations[s].size()) != inst.num_patients())
      throw std::invalid_argument("invalid scenarios: field 'T': scenario " + std::to_string(s) +
                                  " must have one duration per patient");
    for (int t : scen.durations[s])
      if (t < inst.duration.trunc_lo || t > inst.duration.trunc_hi)
        throw std::invalid_argument("invalid scenarios: field 'T': value " + std::to_string(t) +
                                    " outside truncation range");
  }
}

Schedule empty_schedule(const Instance& inst) {
  Schedule s;
  s.suite_open.assign(inst.hospitals, std::vector<std::uint8_t>(inst.days, 0));
  s.rooms_open.assign(inst.hospitals, std::vector<int>(inst.days, 0));
  s.room_patients.assign(
      inst.hospitals,
      std::vector<std::vector<std::vector<int>>>(inst.days, std::vector<std::vector<int>>(inst.rooms)));
  s.postponed.assign(inst.patients.size(), 1);
  return s;
}

double operational_cost(const Instance& inst, const Schedule& sched) {
  double cost = 0.0;
  for (int h = 0; h < inst.hospitals; ++h)
    for (int d = 0; d < inst.days; ++d) {
      if (sched.suite_open[h][d]) cost += inst.suite_open_cost[h][d];
      cost += inst.room_open_cost[h][d] * sched.rooms_open[h][d];
      for (int r = 0; r < inst.rooms; ++r)
        for (int p : sched.room_patients[h][d][r]) cost += inst.patients[p].sched_benefit[d];
    }
  for (const auto& p : inst.patients)
    if (sched.postponed[p.id]) cost += p.unsched_penalty;
  return cost;
}

void validate_schedule(const Instance& inst, const Schedule& sched) {
  auto bad = [](const std::string& what) { throw std::invalid_argument("invalid schedule: " + what); };
  if (static_cast<int>(sched.postponed.size()) != inst.num_patients()) bad("postponed size");
  std::vector<int> placed(inst.patients.size(), 0);
  for (int h = 0; h < inst.hospitals; ++h)
    for (int d = 0; d < inst.days; ++d)
      for (int r = 0; r < inst.rooms; ++r)
        for (int p : sched.room_patients[h][d][r]) {
          ++placed[p];
          if (!sched.suite_open[h][d]) bad("patient in closed suite");
          if (r >= sched.rooms_open[h][d]) bad("patient in unopened room");
        }
  for (const auto& p : inst.patients) {
    if (p.mandatory && sched.postponed[p.id]) bad("mandatory patient postponed");
    int want = sched.postponed[p.id] ? 0 : 1;
    if (placed[p.id] != want) bad("patient " + std::to_string(p.id) + " placed " +
                                  std::to_string(placed[p.id]) + " times");
  }
}

}  // namespace sdors
