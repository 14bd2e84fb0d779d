#include "sdors/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace sdors {

using nlohmann::json;

json to_json(const Instance& inst, const ScenarioSet& scen) {
  json doc;
  doc["meta"] = {{"P", inst.num_patients()},
                 {"H", inst.hospitals},
                 {"D", inst.days},
                 {"R", inst.rooms},
                 {"S", scen.count()},
                 {"seed", inst.seed},
                 {"scenario_seed", scen.seed},
                 {"kappa1", inst.kappa1},
                 {"kappa2", inst.kappa2},
                 {"kappa3", inst.kappa3},
                 {"kappa4", inst.kappa4},
                 {"gamma", inst.gamma},
                 {"duration",
                  {{"mean", inst.duration.mean},
                   {"sd", inst.duration.sd},
                   {"lo", inst.duration.trunc_lo},
                   {"hi", inst.duration.trunc_hi}}}};
  doc["hospitals"] = {{"G", inst.suite_open_cost}, {"F", inst.room_open_cost}, {"B", inst.time_limit}};
  doc["patients"] = json::array();
  for (const auto& p : inst.patients)
    doc["patients"].push_back({{"id", p.id},
                               {"rho", p.urgency},
                               {"alpha", p.wait_days},
                               {"omega", p.health_score},
                               {"mandatory", p.mandatory},
                               {"c_sched", p.sched_benefit},
                               {"c_unsched", p.unsched_penalty},
                               {"c_cancel", p.cancel_penalty}});
  doc["scenarios"] = scen.durations;
  return doc;
}

void from_json_doc(const json& doc, Instance& inst, ScenarioSet& scen) {
  const json& meta = doc.at("meta");
  inst = Instance{};
  inst.hospitals = meta.at("H").get<int>();
  inst.days = meta.at("D").get<int>();
  inst.rooms = meta.at("R").get<int>();
  inst.seed = meta.at("seed").get<std::uint64_t>();
  inst.kappa1 = meta.at("kappa1").get<double>();
  inst.kappa2 = meta.at("kappa2").get<double>();
  inst.kappa3 = meta.at("kappa3").get<double>();
  inst.kappa4 = meta.at("kappa4").get<double>();
  inst.gamma = meta.at("gamma").get<double>();
  if (meta.contains("duration")) {
    const json& dur = meta.at("duration");
    inst.duration.mean = dur.at("mean").get<double>();
    inst.duration.sd = dur.at("sd").get<double>();
    inst.duration.trunc_lo = dur.at("lo").get<int>();
    inst.duration.trunc_hi = dur.at("hi").get<int>();
  }
  const json& hosp = doc.at("hospitals");
  inst.suite_open_cost = hosp.at("G").get<std::vector<std::vector<double>>>();
  inst.room_open_cost = hosp.at("F").get<std::vector<std::vector<double>>>();
  inst.time_limit = hosp.at("B").get<std::vector<std::vector<int>>>();
  inst.patients.clear();
  for (const json& jp : doc.at("patients")) {
    Patient p;
    p.id = jp.at("id").get<int>();
    p.urgency = jp.at("rho").get<int>();
    p.wait_days = jp.at("alpha").get<int>();
    p.health_score = jp.at("omega").get<double>();
    p.mandatory = jp.at("mandatory").get<bool>();
    p.sched_benefit = jp.at("c_sched").get<std::vector<double>>();
    p.unsched_penalty = jp.at("c_unsched").get<double>();
    p.cancel_penalty = jp.at("c_cancel").get<double>();
    inst.patients.push_back(std::move(p));
  }
  scen = ScenarioSet{};
  scen.durations = doc.at("scenarios").get<std::vector<std::vector<int>>>();
  if (meta.contains("scenario_seed")) scen.seed = meta.at("scenario_seed").get<std::uint64_t>();
  validate(inst, scen);
}

json to_json(const Schedule& sched) {
  json doc;
  doc["suite_open"] = sched.suite_open;
  doc["rooms_open"] = sched.rooms_open;
  doc["room_patients"] = sched.room_patients;
  doc["postponed"] = sched.postponed;
  doc["operational_cost"] = sched.operational_cost;
  doc["expected_cancel_cost"] = sched.expected_cancel_cost;
  doc["objective"] = sched.objective();
  return doc;
}

Schedule schedule_from_json(const json& doc, const Instance& inst) {
  Schedule s;
  s.suite_open = doc.at("suite_open").get<std::vector<std::vector<std::uint8_t>>>();
  s.rooms_open = doc.at("rooms_open").get<std::vector<std::vector<int>>>();
  s.room_patients =
      doc.at("room_patients").get<std::vector<std::vector<std::vector<std::vector<int>>>>>();
  s.postponed = doc.at("postponed").get<std::vector<std::uint8_t>>();
  s.operational_cost = doc.at("operational_cost").get<double>();
  s.expected_cancel_cost = doc.at("expected_cancel_cost").get<double>();
  validate_schedule(inst, s);
  return s;
}

void save_json(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << doc.dump(2) << '\n';
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return json::parse(in);
}

}  // namespace sdors
