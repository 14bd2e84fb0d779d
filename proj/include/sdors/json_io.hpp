#pragma once

#include <string>

#include <json.hpp>

#include "sdors/domain.hpp"

namespace sdors {

// Instance + scenarios share one document:
//   meta      : P, H, D, R, S, seed, kappa1..kappa4, gamma, duration
//   hospitals : G, F, B arrays indexed [h][d]
//   patients  : rho, alpha, omega, mandatory, c_sched, c_unsched, c_cancel
//   scenarios : [s][p] duration matrix
nlohmann::json to_json(const Instance& inst, const ScenarioSet& scen);
void from_json_doc(const nlohmann::json& doc, Instance& inst, ScenarioSet& scen);

nlohmann::json to_json(const Schedule& sched);
Schedule schedule_from_json(const nlohmann::json& doc, const Instance& inst);

void save_json(const nlohmann::json& doc, const std::string& path);
nlohmann::json load_json(const std::string& path);

}  // namespace sdors
