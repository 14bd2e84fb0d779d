#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdors/lp.hpp"
#include "sdors/mip.hpp"

namespace sdors {

enum class CutFamily { Lbbd = 0, BddBenders = 1, BendersLp = 2, RelaxationBound = 3 };
constexpr int kNumCutFamilies = 4;
const char* cut_family_name(CutFamily f);

enum class TerminationReason { Gap, NodeLimit, TimeLimit, Infeasible, EarlyStop };
const char* termination_name(TerminationReason r);

struct NodeView {
  const std::vector<double>& x;   // node relaxation values, all columns
  double objective = 0.0;         // node LP value (lower bound)
  long node_id = 0;
  int depth = 0;
  bool integral = false;          // over the designated branching set
  bool has_incumbent = false;
  double incumbent_objective = 0.0;
};

struct EngineCut {
  LinearRow row;
  CutFamily family = CutFamily::Lbbd;
};

struct Injection {
  std::vector<double> x;
  double objective = 0.0;
};

struct CallbackVerdict {
  std::vector<EngineCut> cuts;
  std::optional<Injection> inject;
  bool prune = false;
};

using NodeCallback = std::function<CallbackVerdict(const NodeView&)>;

struct SolveOptions {
  double gap = 0.01;
  long node_limit = -1;       // < 0: unlimited
  double time_limit_s = -1;   // < 0: unlimited
  std::optional<Injection> warm_start;
  std::function<void(const std::vector<double>&, double)> incumbent_listener;
  std::function<bool(double)> bound_listener;  // return true to abort (early stop)
  std::ostream* node_trace = nullptr;          // CSV: node id, LB, UB, cuts added
};

struct SolveReport {
  TerminationReason reason = TerminationReason::Infeasible;
  bool has_incumbent = false;
  std::vector<double> x;
  double objective = 0.0;   // incumbent (UB)
  double best_bound = 0.0;  // LB
  double gap = 0.0;         // (UB-LB)/max(|LB|,1e-9)
  long nodes = 0;
  std::array<long, kNumCutFamilies> lazy_cuts{};
  std::array<long, kNumCutFamilies> user_cuts{};
  long lp_iterations = 0;
  double wall_s = 0.0;

  nlohmann::json to_json(bool with_timing = true) const;
};

struct CutQuota {
  bool allowed = false;
  int budget = 0;
};

// Root gets a 50-cut budget; afterwards every 150th node gets 5; nothing
// after node 4000.
CutQuota user_cut_policy(long node_id);

// Single-threaded best-bound search, most-fractional branching with lowest
// column id tie-break. The lazy callback runs on every integral candidate;
// a candidate becomes incumbent only when the callback returns no cuts.
SolveReport solve(const MipModel& model, NodeCallback lazy_cb, NodeCallback user_cb,
                  const SolveOptions& opts);

double relative_gap(double ub, double lb);

}  // namespace sdors
