#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sdors {

struct Patient {
  int id = 0;
  int urgency = 1;     // rho, 1..5
  int wait_days = 0;   // alpha
  std::vector<double> sched_benefit;  // c_sched per day, <= 0
  double unsched_penalty = 0.0;       // c_unsched, >= 0
  double cancel_penalty = 0.0;        // c_cancel, >= 0
  bool mandatory = false;
  double health_score = 0.0;  // omega = (alpha - |D|) * rho
};

// Underlying (untruncated) lognormal moments and the truncation window for
// surgery durations, in minutes.
struct DurationModel {
  double mean = 160.0;
  double sd = 40.0;
  int trunc_lo = 45;
  int trunc_hi = 480;
};

struct Instance {
  int hospitals = 0;
  int days = 0;
  int rooms = 0;  // per hospital, identical across hospitals
  std::vector<std::vector<double>> suite_open_cost;  // G[h][d]
  std::vector<std::vector<double>> room_open_cost;   // F[h][d]
  std::vector<std::vector<int>> time_limit;          // B[h][d], minutes
  std::vector<Patient> patients;
  double gamma = 500.0;
  double kappa1 = 50.0, kappa2 = -5.0, kappa3 = -80.0, kappa4 = -100.0;
  DurationModel duration;
  std::uint64_t seed = 0;

  int num_patients() const { return static_cast<int>(patients.size()); }
};

struct ScenarioSet {
  std::vector<std::vector<int>> durations;  // [s][p], minutes
  std::uint64_t seed = 0;

  int count() const { return static_cast<int>(durations.size()); }
};

// First-stage decisions plus their priced cost split. Room-level assignment,
// also usable for the (h,d)-aggregate algorithms after expansion.
struct Schedule {
  std::vector<std::vector<std::uint8_t>> suite_open;              // [h][d]
  std::vector<std::vector<int>> rooms_open;                       // [h][d]
  std::vector<std::vector<std::vector<std::vector<int>>>> room_patients;  // [h][d][r] -> patient ids
  std::vector<std::uint8_t> postponed;                            // [p]
  double operational_cost = 0.0;
  double expected_cancel_cost = 0.0;

  double objective() const { return operational_cost + expected_cancel_cost; }
  int scheduled_count() const {
    int n = 0;
    for (auto v : postponed) n += (v == 0);
    return n;
  }
  int opened_room_count() const {
    int n = 0;
    for (const auto& hd : rooms_open)
      for (int c : hd) n += c;
    return n;
  }
};

// Throws std::invalid_argument naming the offending field.
void validate(const Instance& inst);
void validate(const Instance& inst, const ScenarioSet& scen);

// Recomputes operational cost (suite/room opening, scheduling benefit,
// postponement penalty) from the instance; does not touch cancellation cost.
double operational_cost(const Instance& inst, const Schedule& sched);

// Checks structural consistency of a schedule against an instance (shape,
// mandatory patients never postponed, every patient placed exactly once).
void validate_schedule(const Instance& inst, const Schedule& sched);

Schedule empty_schedule(const Instance& inst);

}  // namespace sdors
