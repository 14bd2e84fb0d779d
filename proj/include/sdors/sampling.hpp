#pragma once

#include <cstdint>

#include "sdors/domain.hpp"

namespace sdors {

struct GenConfig {
  int patients = 10;
  int hospitals = 2;
  int days = 2;
  int rooms = 2;
  int scenarios = 5;
  double kappa1 = 50.0, kappa2 = -5.0, kappa3 = -80.0, kappa4 = -100.0;
  double gamma = 500.0;
  DurationModel duration;
  std::uint64_t seed = 0;
};

void validate(const GenConfig& cfg);

// All derived patient costs follow the unit-cost formulas:
//   c_sched[d]  = kappa1 * rho * (d - alpha)        (d is 1-based)
//   c_unsched   = kappa2 * rho * (|D| + 1 - alpha)
//   c_cancel    = kappa3 (or kappa4 if mandatory) * rho * (|D| + 1 - alpha)
// Identical seed => identical instance, byte for byte.
Instance generate_instance(const GenConfig& cfg);

// i.i.d. truncated-lognormal durations, rounded to the nearest minute. The
// mean/sd of cfg.duration are moments of the untruncated distribution.
ScenarioSet sample_scenarios(const GenConfig& cfg, int count);
ScenarioSet sample_scenarios(const Instance& inst, int count, std::uint64_t seed);

// Underlying normal parameters for a lognormal with the given moments.
void lognormal_params(double mean, double sd, double& mu, double& sigma);

// Applies the derived-cost formulas to a patient in place.
void apply_cost_formulas(const Instance& inst, Patient& p);

}  // namespace sdors
