// Command-line front end: instance generation, solving, SAA bounding,
// schedule evaluation, sensitivity transforms, and algorithm comparison.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdors/core_models.hpp"
#include "sdors/json_io.hpp"
#include "sdors/rng.hpp"
#include "sdors/saa.hpp"
#include "sdors/sampling.hpp"
#include "sdors/three_stage.hpp"
#include "sdors/two_stage.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;
using namespace sdors;

std::uint64_t effective_seed(std::uint64_t seed) {
  if (const char* env = std::getenv("SDORS_SEED")) return std::strtoull(env, nullptr, 10);
  return seed;
}

// Every output file gets a sibling <path>.manifest.json sufficient to re-run
// the command byte-identically.
void write_manifest(const std::string& out_path, const std::string& command, const json& args,
                    double wall_s) {
  json man;
  man["command"] = command;
  man["args"] = args;
  man["toolkit_version"] = kVersion;
  man["wall_seconds"] = wall_s;
  save_json(man, out_path + ".manifest.json");
}

struct AlgoChoice {
  std::string name;  // de | two-lbbd | two-bdd | three
};

TwoStageResult run_algo(const std::string& algo, const Instance& inst, const ScenarioSet& scen,
                        double gap, double time_limit, long node_limit, bool user_cuts = false) {
  AlgoConfig cfg;
  cfg.gap = gap;
  cfg.time_limit_s = time_limit;
  cfg.node_limit = node_limit;
  cfg.use_user_cuts = user_cuts;
  if (algo == "two-lbbd" || algo == "two-bdd") {
    cfg.family = algo == "two-lbbd" ? ExactCutFamily::Lbbd : ExactCutFamily::Bdd;
    return solve_two_stage(inst, scen, cfg);
  }
  if (algo == "three") return solve_three_stage(inst, scen, cfg);
  if (algo == "de") return solve_de_direct(inst, scen, cfg);
  throw CLI::ValidationError("--algo", "unknown algorithm '" + algo + "'");
}

std::string time_gap_cell(const SolveReport& rep, double target_gap) {
  if (!rep.has_incumbent || rep.gap > 1.0) return "-";
  std::ostringstream out;
  if (rep.gap <= target_gap + 1e-12) {
    out << std::fixed << std::setprecision(2) << rep.wall_s / 60.0 << "(min)";
  } else {
    out << std::fixed << std::setprecision(1) << rep.gap * 100.0 << "%";
  }
  return out.str();
}

int cmd_gen(const GenConfig& cfg, const std::string& out) {
  auto t0 = std::chrono::steady_clock::now();
  Instance inst = generate_instance(cfg);
  ScenarioSet scen = sample_scenarios(cfg, cfg.scenarios);
  save_json(to_json(inst, scen), out);
  json args = {{"patients", cfg.patients}, {"hospitals", cfg.hospitals}, {"days", cfg.days},
               {"rooms", cfg.rooms},       {"scenarios", cfg.scenarios}, {"seed", cfg.seed},
               {"out", out}};
  write_manifest(out, "gen", args,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  std::cout << "wrote " << out << " (" << inst.num_patients() << " patients, " << scen.count()
            << " scenarios)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic distributed operating room scheduling toolkit"};
  app.require_subcommand(1);

  // ---- gen ----
  GenConfig gen_cfg;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a random instance with scenarios");
  gen->add_option("--patients", gen_cfg.patients)->default_val(10);
  gen->add_option("--hospitals", gen_cfg.hospitals)->default_val(2);
  gen->add_option("--days", gen_cfg.days)->default_val(2);
  gen->add_option("--rooms", gen_cfg.rooms)->default_val(2);
  gen->add_option("--scenarios", gen_cfg.scenarios)->default_val(5);
  gen->add_option("--seed", gen_cfg.seed)->default_val(1);
  gen->add_option("--out", gen_out)->required();

  // ---- solve ----
  std::string solve_algo = "two-lbbd", solve_in, solve_report, solve_schedule;
  double solve_gap = 0.01, solve_time = -1.0;
  long solve_nodes = -1;
  bool solve_user_cuts = false;
  auto* slv = app.add_subcommand("solve", "Solve an instance file");
  slv->add_option("--algo", solve_algo)
      ->check(CLI::IsMember({"de", "two-lbbd", "two-bdd", "three"}))
      ->default_val("two-lbbd");
  slv->add_option("--gap", solve_gap)->default_val(0.01);
  slv->add_option("--time-limit", solve_time, "seconds")->default_val(-1.0);
  slv->add_option("--node-limit", solve_nodes)->default_val(-1);
  slv->add_flag("--user-cuts", solve_user_cuts, "fractional-node cuts (root/150-node budgets)");
  slv->add_option("--in", solve_in)->required();
  slv->add_option("--report", solve_report);
  slv->add_option("--schedule", solve_schedule);

  // ---- saa ----
  std::string saa_in, saa_out, saa_solver = "two-lbbd";
  std::vector<int> saa_levels{20};
  SaaConfig saa_cfg;
  bool saa_full = false;
  double saa_gap = 0.01;
  auto* saa = app.add_subcommand("saa", "Lower/upper SAA bounds and worst-case gap");
  saa->add_option("--in", saa_in)->required();
  saa->add_option("--out", saa_out, "CSV output")->required();
  saa->add_option("--solver", saa_solver)
      ->check(CLI::IsMember({"de", "two-lbbd", "two-bdd", "three"}));
  saa->add_option("--scenario-levels", saa_levels, "|S| values, one row each");
  saa->add_option("--replications", saa_cfg.replications);
  saa->add_option("--select-samples", saa_cfg.select_samples);
  saa->add_option("--ub-samples", saa_cfg.ub_samples);
  saa->add_option("--gap", saa_gap);
  saa->add_option("--seed", saa_cfg.seed)->default_val(1);
  saa->add_flag("--full", saa_full, "paper-scale sampling (30/1000/10000)");

  // ---- evaluate ----
  std::string eval_in, eval_schedule, eval_out;
  int eval_samples = 1000;
  std::uint64_t eval_seed = 1;
  auto* evl = app.add_subcommand("evaluate", "Monte-Carlo evaluation of a schedule");
  evl->add_option("--in", eval_in)->required();
  evl->add_option("--schedule", eval_schedule)->required();
  evl->add_option("--samples", eval_samples)->default_val(1000);
  evl->add_option("--seed", eval_seed)->default_val(1);
  evl->add_option("--out", eval_out, "CSV output")->required();

  // ---- sensitivity ----
  std::string sens_in, sens_out;
  int sens_case = 1;
  auto* sns = app.add_subcommand("sensitivity", "Apply a sensitivity transform to an instance");
  sns->add_option("--in", sens_in)->required();
  sns->add_option("--case", sens_case)->check(CLI::Range(1, 3))->required();
  sns->add_option("--out", sens_out)->required();

  // ---- compare ----
  std::vector<std::string> cmp_instances, cmp_algos{"de", "two-lbbd", "two-bdd", "three"};
  std::string cmp_out, cmp_md;
  double cmp_gap = 0.01, cmp_time = -1.0;
  auto* cmp = app.add_subcommand("compare", "Time/gap and node-count table across algorithms");
  cmp->add_option("--instances", cmp_instances)->required();
  cmp->add_option("--algos", cmp_algos);
  cmp->add_option("--gap", cmp_gap)->default_val(0.01);
  cmp->add_option("--time-limit", cmp_time, "seconds per cell")->default_val(-1.0);
  cmp->add_option("--out", cmp_out, "CSV output")->required();
  cmp->add_option("--markdown", cmp_md, "markdown table output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      gen_cfg.seed = effective_seed(gen_cfg.seed);
      return cmd_gen(gen_cfg, gen_out);
    }

    if (slv->parsed()) {
      auto t0 = std::chrono::steady_clock::now();
      Instance inst;
      ScenarioSet scen;
      from_json_doc(load_json(solve_in), inst, scen);
      TwoStageResult res =
          run_algo(solve_algo, inst, scen, solve_gap, solve_time, solve_nodes, solve_user_cuts);
      double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      json args = {{"algo", solve_algo}, {"gap", solve_gap},       {"time_limit", solve_time},
                   {"node_limit", solve_nodes}, {"in", solve_in},  {"report", solve_report},
                   {"schedule", solve_schedule}};
      if (!solve_report.empty()) {
        save_json(res.report.to_json(), solve_report);
        write_manifest(solve_report, "solve", args, wall);
      }
      if (!solve_schedule.empty()) {
        save_json(to_json(res.schedule), solve_schedule);
        write_manifest(solve_schedule, "solve", args, wall);
      }
      std::cout << "termination=" << termination_name(res.report.reason)
                << " objective=" << (res.report.has_incumbent ? res.report.objective : 0.0)
                << " bound=" << res.report.best_bound << " gap=" << res.report.gap
                << " nodes=" << res.report.nodes << "\n";
      if (!res.report.has_incumbent &&
          (res.report.reason == TerminationReason::NodeLimit ||
           res.report.reason == TerminationReason::TimeLimit))
        return 3;
      return 0;
    }

    if (saa->parsed()) {
      auto t0 = std::chrono::steady_clock::now();
      if (saa_full) {
        saa_cfg.replications = 30;
        saa_cfg.select_samples = 1000;
        saa_cfg.ub_samples = 10000;
      }
      saa_cfg.seed = effective_seed(saa_cfg.seed);
      Instance inst;
      ScenarioSet scen;
      from_json_doc(load_json(saa_in), inst, scen);
      std::ofstream csv(saa_out);
      csv << "S,lb_mean,lb_width,ub_mean,ub_width,worst_case_gap_pct\n";
      for (int level : saa_levels) {
        SaaConfig cfg = saa_cfg;
        cfg.scenarios_per_replication = level;
        SaaReport r = saa_bounds(inst, cfg, [&](const Instance& i, const ScenarioSet& s) {
          return run_algo(saa_solver, i, s, saa_gap, -1.0, -1);
        });
        csv << level << ',' << r.lb_mean << ',' << r.lb_halfwidth << ',' << r.ub_mean << ','
            << r.ub_halfwidth << ',' << r.worst_case_gap * 100.0 << "\n";
        std::cout << "S=" << level << " gap=" << r.worst_case_gap * 100.0 << "%\n";
      }
      csv.close();
      json args = {{"in", saa_in},
                   {"solver", saa_solver},
                   {"levels", saa_levels},
                   {"replications", saa_cfg.replications},
                   {"select_samples", saa_cfg.select_samples},
                   {"ub_samples", saa_cfg.ub_samples},
                   {"seed", saa_cfg.seed}};
      write_manifest(saa_out, "saa", args,
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      return 0;
    }

    if (evl->parsed()) {
      auto t0 = std::chrono::steady_clock::now();
      eval_seed = effective_seed(eval_seed);
      Instance inst;
      ScenarioSet scen;
      from_json_doc(load_json(eval_in), inst, scen);
      Schedule sched = schedule_from_json(load_json(eval_schedule), inst);
      EvalReport r = evaluate_schedule(inst, sched, eval_samples, eval_seed);
      std::ofstream csv(eval_out);
      csv << "cancel_rate,cancel_halfwidth,utilization,utilization_halfwidth,"
             "opened_utilization,scheduled,rooms_opened,samples\n";
      csv << r.cancel_rate_mean << ',' << r.cancel_rate_halfwidth << ',' << r.utilization_mean
          << ',' << r.utilization_halfwidth << ',' << r.opened_utilization_mean << ','
          << r.scheduled << ',' << r.rooms_opened << ',' << r.samples << "\n";
      csv.close();
      json args = {{"in", eval_in}, {"schedule", eval_schedule}, {"samples", eval_samples},
                   {"seed", eval_seed}};
      write_manifest(eval_out, "evaluate", args,
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      std::cout << "cancel_rate=" << r.cancel_rate_mean * 100.0
                << "% utilization=" << r.utilization_mean * 100.0 << "%\n";
      return 0;
    }

    if (sns->parsed()) {
      auto t0 = std::chrono::steady_clock::now();
      Instance inst;
      ScenarioSet scen;
      from_json_doc(load_json(sens_in), inst, scen);
      Instance out = sensitivity_case(inst, sens_case);
      // durations are redrawn under the transformed parameters
      ScenarioSet fresh = sample_scenarios(out, scen.count(), scen.seed);
      save_json(to_json(out, fresh), sens_out);
      json args = {{"in", sens_in}, {"case", sens_case}, {"out", sens_out}};
      write_manifest(sens_out, "sensitivity", args,
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      std::cout << "wrote " << sens_out << "\n";
      return 0;
    }

    if (cmp->parsed()) {
      auto t0 = std::chrono::steady_clock::now();
      std::ofstream csv(cmp_out);
      csv << "instance";
      for (const auto& a : cmp_algos) csv << ",time_gap_" << a;
      for (const auto& a : cmp_algos) csv << ",nodes_" << a;
      for (const auto& a : cmp_algos) csv << ",objective_" << a;
      csv << ",best,objectives_within_1pct\n";
      std::ostringstream md;
      md << "| instance |";
      for (const auto& a : cmp_algos) md << ' ' << a << " |";
      md << " best |\n|---|";
      for (std::size_t i = 0; i <= cmp_algos.size(); ++i) md << "---|";
      md << "\n";

      for (const auto& path : cmp_instances) {
        Instance inst;
        ScenarioSet scen;
        from_json_doc(load_json(path), inst, scen);
        std::vector<SolveReport> reports;
        for (const auto& algo : cmp_algos)
          reports.push_back(run_algo(algo, inst, scen, cmp_gap, cmp_time, -1).report);

        int best = -1;
        for (std::size_t i = 0; i < reports.size(); ++i) {
          if (!reports[i].has_incumbent || reports[i].gap > 1.0) continue;
          if (best < 0) {
            best = static_cast<int>(i);
            continue;
          }
          bool i_solved = reports[i].gap <= cmp_gap + 1e-12;
          bool b_solved = reports[best].gap <= cmp_gap + 1e-12;
          if (i_solved != b_solved) {
            if (i_solved) best = static_cast<int>(i);
          } else if (i_solved) {
            if (reports[i].wall_s < reports[best].wall_s) best = static_cast<int>(i);
          } else if (reports[i].gap < reports[best].gap) {
            best = static_cast<int>(i);
          }
        }
        double omin = kInf, omax = -kInf;
        for (const auto& r : reports)
          if (r.has_incumbent) {
            omin = std::min(omin, r.objective);
            omax = std::max(omax, r.objective);
          }
        bool agree = omin < kInf && (omax - omin) <= 0.01 * std::abs(omin);

        csv << path;
        for (const auto& r : reports) csv << ',' << time_gap_cell(r, cmp_gap);
        for (const auto& r : reports) csv << ',' << r.nodes;
        for (const auto& r : reports) csv << ',' << (r.has_incumbent ? r.objective : 0.0);
        csv << ',' << (best >= 0 ? cmp_algos[best] : "-") << ',' << (agree ? "yes" : "no") << "\n";
        md << "| " << path << " |";
        for (std::size_t i = 0; i < reports.size(); ++i) {
          std::string cell = time_gap_cell(reports[i], cmp_gap);
          md << ' ' << (static_cast<int>(i) == best ? "**" + cell + "**" : cell) << " |";
        }
        md << ' ' << (best >= 0 ? cmp_algos[best] : "-") << " |\n";
      }
      csv.close();
      if (!cmp_md.empty()) {
        std::ofstream mdf(cmp_md);
        mdf << md.str();
      }
      json args = {{"instances", cmp_instances}, {"algos", cmp_algos}, {"gap", cmp_gap},
                   {"time_limit", cmp_time}};
      write_manifest(cmp_out, "compare", args,
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
