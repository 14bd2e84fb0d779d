#include "sdors/sampling.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sdors/rng.hpp"

namespace sdors {

void validate(const GenConfig& cfg) {
  auto fail = [](const std::string& field, const std::string& what) {
    throw std::invalid_argument("invalid config: field '" + field + "': " + what);
  };
  if (cfg.patients < 1) fail("patients", "must be >= 1");
  if (cfg.hospitals < 1) fail("hospitals", "must be >= 1");
  if (cfg.days < 1) fail("days", "must be >= 1");
  if (cfg.rooms < 1) fail("rooms", "must be >= 1");
  if (cfg.scenarios < 1) fail("scenarios", "must be >= 1");
  if (!(cfg.kappa1 > 0.0 && 0.0 > cfg.kappa2 && cfg.kappa2 > cfg.kappa3 && cfg.kappa3 > cfg.kappa4))
    fail("kappa", "ordering kappa1 > 0 > kappa2 > kappa3 > kappa4 required");
  if (!(cfg.duration.trunc_lo < cfg.duration.mean && cfg.duration.mean < cfg.duration.trunc_hi))
    fail("duration", "truncation range must contain the mean");
  if (cfg.duration.sd < 0.0) fail("duration.sd", "must be >= 0");
}

void lognormal_params(double mean, double sd, double& mu, double& sigma) {
  double cv2 = (sd / mean) * (sd / mean);
  sigma = std::sqrt(std::log1p(cv2));
  mu = std::log(mean * mean / std::sqrt(mean * mean + sd * sd));
}

void apply_cost_formulas(const Instance& inst, Patient& p) {
  p.health_score = static_cast<double>(p.wait_days - inst.days) * p.urgency;
  p.mandatory = p.health_score >= inst.gamma;
  p.sched_benefit.resize(inst.days);
  for (int d = 0; d < inst.days; ++d)
    p.sched_benefit[d] = inst.kappa1 * p.urgency * (static_cast<double>(d + 1) - p.wait_days);
  double horizon = static_cast<double>(inst.days + 1) - p.wait_days;
  p.unsched_penalty = inst.kappa2 * p.urgency * horizon;
  p.cancel_penalty = (p.mandatory ? inst.kappa4 : inst.kappa3) * p.urgency * horizon;
}

Instance generate_instance(const GenConfig& cfg) {
  validate(cfg);
  Instance inst;
  inst.hospitals = cfg.hospitals;
  inst.days = cfg.days;
  inst.rooms = cfg.rooms;
  inst.gamma = cfg.gamma;
  inst.kappa1 = cfg.kappa1;
  inst.kappa2 = cfg.kappa2;
  inst.kappa3 = cfg.kappa3;
  inst.kappa4 = cfg.kappa4;
  inst.duration = cfg.duration;
  inst.seed = cfg.seed;

  SplitMix64 hosp(split_stream(cfg.seed, "hospitals"));
  inst.suite_open_cost.assign(cfg.hospitals, std::vector<double>(cfg.days));
  inst.room_open_cost.assign(cfg.hospitals, std::vector<double>(cfg.days));
  inst.time_limit.assign(cfg.hospitals, std::vector<int>(cfg.days));
  for (int h = 0; h < cfg.hospitals; ++h)
    for (int d = 0; d < cfg.days; ++d) {
      inst.time_limit[h][d] = 420 + 15 * hosp.next_int(0, 4);  // 15-minute grid in [420,480]
      inst.room_open_cost[h][d] = hosp.next_real(4000.0, 6000.0);
      inst.suite_open_cost[h][d] = hosp.next_real(1500.0, 2500.0);
    }

  SplitMix64 pat(split_stream(cfg.seed, "patients"));
  inst.patients.resize(cfg.patients);
  for (int i = 0; i < cfg.patients; ++i) {
    Patient& p = inst.patients[i];
    p.id = i;
    p.urgency = pat.next_int(1, 5);
    p.wait_days = pat.next_int(60, 120);
    apply_cost_formulas(inst, p);
  }
  return inst;
}

namespace {

int draw_truncated_duration(SplitMix64& rng, const DurationModel& dm, double mu, double sigma) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    double t = std::exp(rng.next_normal(mu, sigma));
    if (t >= dm.trunc_lo && t <= dm.trunc_hi) return static_cast<int>(std::lround(t));
  }
  throw std::runtime_error("duration rejection sampling exceeded 10000 draws; check configuration");
}

ScenarioSet sample_impl(const DurationModel& dm, int patients, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("invalid config: field 'S': must be >= 1");
  double mu, sigma;
  lognormal_params(dm.mean, dm.sd, mu, sigma);
  ScenarioSet scen;
  scen.seed = seed;
  scen.durations.assign(count, std::vector<int>(patients));
  for (int s = 0; s < count; ++s)
    for (int p = 0; p < patients; ++p) {
      // one substream per (scenario, patient) block so sampling parallelizes
      SplitMix64 rng(split_stream(seed, "s" + std::to_string(s) + "p" + std::to_string(p)));
      if (dm.sd == 0.0) {
        scen.durations[s][p] = static_cast<int>(std::lround(dm.mean));
      } else {
        scen.durations[s][p] = draw_truncated_duration(rng, dm, mu, sigma);
      }
    }
  return scen;
}

}  // namespace

ScenarioSet sample_scenarios(const GenConfig& cfg, int count) {
  validate(cfg);
  return sample_impl(cfg.duration, cfg.patients, count, split_stream(cfg.seed, "scenarios"));
}

ScenarioSet sample_scenarios(const Instance& inst, int count, std::uint64_t seed) {
  return sample_impl(inst.duration, inst.num_patients(), count, seed);
}

}  // namespace sdors
