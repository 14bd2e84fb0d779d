#include "sdors/bnc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <unordered_set>

namespace sdors {

namespace {

constexpr double kIntTol = 1e-6;
constexpr double kCutViolTol = 1e-6;

std::uint64_t row_hash(const LinearRow& row) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  for (auto [j, c] : row.coef) {
    mix(static_cast<std::uint64_t>(j));
    mix(static_cast<std::uint64_t>(std::llround(c * 1e9)));
  }
  mix(static_cast<std::uint64_t>(row.sense));
  mix(static_cast<std::uint64_t>(std::llround(row.rhs * 1e9)));
  return h;
}

struct NodeRec {
  long parent = -1;
  int branch_col = -1;
  double blo = 0.0, bhi = 0.0;
  double bound = -kInf;
  int depth = 0;
};

struct OpenNode {
  double bound;
  long id;
  // equal bounds pop newest-first: on the flat plateaus these models produce
  // the search then dives, which is what yields integral candidates
  bool operator>(const OpenNode& o) const {
    if (bound != o.bound) return bound > o.bound;
    return id < o.id;
  }
};

}  // namespace

const char* cut_family_name(CutFamily f) {
  switch (f) {
    case CutFamily::Lbbd: return "lbbd";
    case CutFamily::BddBenders: return "bdd-benders";
    case CutFamily::BendersLp: return "benders-lp";
    case CutFamily::RelaxationBound: return "relaxation-bound";
  }
  return "?";
}

const char* termination_name(TerminationReason r) {
  switch (r) {
    case TerminationReason::Gap: return "gap";
    case TerminationReason::NodeLimit: return "node-limit";
    case TerminationReason::TimeLimit: return "time-limit";
    case TerminationReason::Infeasible: return "infeasible";
    case TerminationReason::EarlyStop: return "early-stop";
  }
  return "?";
}

double relative_gap(double ub, double lb) {
  if (ub >= kInf) return std::numeric_limits<double>::infinity();
  return std::max(0.0, (ub - lb) / std::max(std::abs(lb), 1e-9));
}

CutQuota user_cut_policy(long node_id) {
  if (node_id > 4000) return {false, 0};
  if (node_id == 0) return {true, 50};
  if (node_id % 150 == 0) return {true, 5};
  return {false, 0};
}

nlohmann::json SolveReport::to_json(bool with_timing) const {
  nlohmann::json j;
  j["termination"] = termination_name(reason);
  j["has_incumbent"] = has_incumbent;
  j["objective"] = has_incumbent ? objective : 0.0;
  j["best_bound"] = best_bound;
  j["gap"] = gap;
  j["nodes"] = nodes;
  j["lp_iterations"] = lp_iterations;
  for (int f = 0; f < kNumCutFamilies; ++f) {
    j["lazy_cuts"][cut_family_name(static_cast<CutFamily>(f))] = lazy_cuts[f];
    j["user_cuts"][cut_family_name(static_cast<CutFamily>(f))] = user_cuts[f];
  }
  j["incumbent"] = x;
  if (with_timing) j["wall_seconds"] = wall_s;
  return j;
}

SolveReport solve(const MipModel& model, NodeCallback lazy_cb, NodeCallback user_cb,
                  const SolveOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  MipModel work = model;  // pool rows are appended here
  std::unordered_set<std::uint64_t> pool_hashes;
  for (const auto& r : work.rows) pool_hashes.insert(row_hash(r));

  std::vector<int> branch_set;
  for (int j = 0; j < model.num_cols(); ++j)
    if (model.cols[j].kind != VarKind::Continuous) branch_set.push_back(j);

  SolveReport rep;
  rep.objective = kInf;
  double ub = kInf;
  std::vector<double> incumbent;

  auto set_incumbent = [&](const std::vector<double>& x, double obj) {
    ub = obj;
    incumbent = x;
    rep.has_incumbent = true;
    if (opts.incumbent_listener) opts.incumbent_listener(x, obj);
  };

  auto verify_candidate = [&](const std::vector<double>& x, double tol) -> std::optional<int> {
    for (int j = 0; j < model.num_cols(); ++j)
      if (x[j] < model.cols[j].lb - tol || x[j] > model.cols[j].ub + tol) return -1 - j;
    for (int j : branch_set)
      if (std::abs(x[j] - std::round(x[j])) > kIntTol) return -1 - j;
    if (auto row = work.first_violated_row(x, tol)) return *row;
    return std::nullopt;
  };

  auto try_inject = [&](const Injection& inj) {
    if (static_cast<int>(inj.x.size()) != model.num_cols()) return;
    if (verify_candidate(inj.x, kCutViolTol)) return;
    double obj = model.objective_value(inj.x);
    if (obj < ub - 1e-9) set_incumbent(inj.x, obj);
  };

  if (opts.warm_start) try_inject(*opts.warm_start);

  std::vector<NodeRec> tree;
  tree.push_back({});
  std::priority_queue<OpenNode, std::vector<OpenNode>, std::greater<>> open;
  open.push({-kInf, 0});

  std::vector<std::pair<double, double>> base_bounds(model.num_cols());
  for (int j = 0; j < model.num_cols(); ++j)
    base_bounds[j] = {model.cols[j].lb, model.cols[j].ub};

  auto node_bounds = [&](long id) {
    auto b = base_bounds;
    for (long v = id; v > 0; v = tree[v].parent) {
      const NodeRec& n = tree[v];
      b[n.branch_col].first = std::max(b[n.branch_col].first, n.blo);
      b[n.branch_col].second = std::min(b[n.branch_col].second, n.bhi);
    }
    return b;
  };

  double lb = -kInf;
  bool root_infeasible = false;
  TerminationReason reason = TerminationReason::Gap;
  long processed = 0;

  auto finish = [&](TerminationReason why) {
    rep.reason = why;
    rep.nodes = processed;
    rep.best_bound = lb;
    if (rep.has_incumbent) {
      rep.x = incumbent;
      rep.objective = ub;
      rep.gap = relative_gap(ub, lb);
    } else {
      rep.objective = 0.0;
      rep.gap = std::numeric_limits<double>::infinity();
    }
    rep.wall_s = elapsed();
    return rep;
  };

  long dive = -1;  // plunge child processed before returning to best-bound
  while (dive >= 0 || !open.empty()) {
    // LB = best bound over open nodes and the active dive path;
    // the incumbent caps it
    double open_lb = open.empty() ? kInf : open.top().bound;
    if (dive >= 0) open_lb = std::min(open_lb, tree[dive].bound);
    lb = std::min(std::max(lb, open_lb), ub);
    if (rep.has_incumbent && relative_gap(ub, lb) <= opts.gap + 1e-12)
      return finish(TerminationReason::Gap);
    if (opts.node_limit >= 0 && processed >= opts.node_limit)
      return finish(TerminationReason::NodeLimit);
    if (opts.time_limit_s >= 0 && elapsed() > opts.time_limit_s)
      return finish(TerminationReason::TimeLimit);
    if (opts.bound_listener && lb > -kInf && opts.bound_listener(lb))
      return finish(TerminationReason::EarlyStop);

    long id;
    bool on_dive = dive >= 0;
    if (on_dive) {
      id = dive;
      dive = -1;
    } else {
      id = open.top().id;
      open.pop();
    }
    if (tree[id].bound >= ub - 1e-9) continue;  // pruned by bound

    auto bounds = node_bounds(id);
    ++processed;
    int user_budget = -1;  // resolved lazily below
    long lazy_rounds = 0;
    long cuts_this_node = 0;

    // LP-guided rounding dive: completes the node relaxation to an integral
    // candidate and hands it to the lazy callback for exact pricing. This is
    // the incumbent source when tight node bounds keep plunges from reaching
    // integral leaves on their own.
    auto rounding_heuristic = [&](std::vector<std::pair<double, double>> hb) {
      for (std::size_t steps = 0; steps <= branch_set.size(); ++steps) {
        LpSolution sol;
        try {
          sol = solve_lp(work, &hb);
        } catch (const LpNumericalError&) {
          return;
        }
        rep.lp_iterations += sol.iterations;
        if (sol.status != LpStatus::Optimal) return;
        int pick = -1;
        double best_dist = 2.0;
        for (int j : branch_set) {
          double f = sol.x[j] - std::floor(sol.x[j]);
          double dist = std::min(f, 1.0 - f);
          if (dist > kIntTol && dist < best_dist - 1e-12) {
            best_dist = dist;
            pick = j;
          }
        }
        if (pick < 0) {
          std::vector<double> cand = sol.x;
          for (int j : branch_set) cand[j] = std::round(cand[j]);
          NodeView view{cand, sol.objective, id, tree[id].depth, true, rep.has_incumbent, ub};
          CallbackVerdict verdict = lazy_cb ? lazy_cb(view) : CallbackVerdict{};
          if (verdict.inject) try_inject(*verdict.inject);
          long added = 0;
          for (auto& cut : verdict.cuts) {
            if (!pool_hashes.insert(row_hash(cut.row)).second) continue;
            work.add_row(cut.row);
            ++rep.lazy_cuts[static_cast<int>(cut.family)];
            ++added;
          }
          cuts_this_node += added;
          if (added == 0 && !verify_candidate(cand, 1e-5)) {
            double obj = model.objective_value(cand);
            if (obj < ub - 1e-9) set_incumbent(cand, obj);
          }
          return;
        }
        double v = std::round(sol.x[pick]);
        hb[pick] = {v, v};
      }
    };
    if (processed == 1 || processed % 50 == 0) rounding_heuristic(bounds);

    while (true) {
      LpSolution sol;
      try {
        sol = solve_lp(work, &bounds);
      } catch (const LpNumericalError&) {
        break;  // treat as pruned; desk-scale models should not get here
      }
      rep.lp_iterations += sol.iterations;
      if (sol.status == LpStatus::Infeasible) {
        if (id == 0 && !rep.has_incumbent && cuts_this_node == 0) root_infeasible = true;
        break;
      }
      if (sol.status == LpStatus::Unbounded)
        throw std::runtime_error("unbounded relaxation; model is missing bounds");
      double node_obj = sol.objective;
      tree[id].bound = std::max(tree[id].bound, node_obj);
      // a plunge feeding a lazy callback runs through to its integral leaf:
      // pricing that leaf is what generates cuts and incumbents, and the
      // dominated path prunes right afterwards anyway
      bool priced_out = node_obj >= ub - 1e-9;
      if (priced_out && !(on_dive && lazy_cb)) break;  // prune

      // integrality over the branching set
      int frac_col = -1;
      double frac_score = -1.0;
      for (int j : branch_set) {
        double f = sol.x[j] - std::floor(sol.x[j]);
        double dist = std::min(f, 1.0 - f);
        if (dist > kIntTol && dist > frac_score + 1e-12) {
          frac_score = dist;
          frac_col = j;
        }
      }

      if (frac_col < 0) {
        std::vector<double> cand = sol.x;
        double cand_obj = node_obj;
        for (int j : branch_set) cand[j] = std::round(cand[j]);
        if (work.first_violated_row(cand, kCutViolTol)) {
          // rounding drifted off a pool row: price the integral assignment
          // with its variables fixed so the continuous block is consistent
          auto fixed = bounds;
          for (int j : branch_set) fixed[j] = {cand[j], cand[j]};
          try {
            LpSolution polish = solve_lp(work, &fixed);
            rep.lp_iterations += polish.iterations;
            if (polish.status == LpStatus::Optimal) {
              cand = polish.x;
              cand_obj = polish.objective;
              for (int j : branch_set) cand[j] = std::round(cand[j]);
            }
          } catch (const LpNumericalError&) {
          }
        }
        NodeView view{cand, cand_obj, id, tree[id].depth, true, rep.has_incumbent, ub};
        CallbackVerdict verdict = lazy_cb ? lazy_cb(view) : CallbackVerdict{};
        if (verdict.inject) try_inject(*verdict.inject);
        long added = 0;
        for (auto& cut : verdict.cuts) {
          if (!pool_hashes.insert(row_hash(cut.row)).second) continue;
          work.add_row(cut.row);
          ++rep.lazy_cuts[static_cast<int>(cut.family)];
          ++added;
        }
        cuts_this_node += added;
        if (verdict.prune) break;
        if (added > 0) {
          if (++lazy_rounds > 10000)
            throw std::runtime_error("lazy callback did not converge at a node");
          continue;  // re-solve with the new rows
        }
        // all lazy constraints hold: candidate becomes the incumbent
        if (!verify_candidate(cand, 1e-5)) {
          double obj = model.objective_value(cand);
          if (obj < ub - 1e-9) set_incumbent(cand, obj);
        }
        break;
      }

      // fractional: user cuts under the budget policy, then branch
      if (user_cb && !priced_out) {
        if (user_budget < 0) {
          CutQuota q = user_cut_policy(id);
          user_budget = q.allowed ? q.budget : 0;
        }
        if (user_budget > 0) {
          NodeView view{sol.x, node_obj, id, tree[id].depth, false, rep.has_incumbent, ub};
          CallbackVerdict verdict = user_cb(view);
          if (verdict.inject) try_inject(*verdict.inject);
          long added = 0;
          for (auto& cut : verdict.cuts) {
            if (added >= user_budget) break;
            if (!pool_hashes.insert(row_hash(cut.row)).second) continue;
            work.add_row(cut.row);
            ++rep.user_cuts[static_cast<int>(cut.family)];
            ++added;
          }
          user_budget -= static_cast<int>(added);
          cuts_this_node += added;
          if (verdict.prune) break;
          if (added > 0) continue;  // re-solve with the new rows
        }
      }

      double v = sol.x[frac_col];
      NodeRec down{id, frac_col, base_bounds[frac_col].first, std::floor(v), node_obj,
                   tree[id].depth + 1};
      NodeRec up{id, frac_col, std::ceil(v), base_bounds[frac_col].second, node_obj,
                 tree[id].depth + 1};
      long down_id = static_cast<long>(tree.size());
      tree.push_back(down);
      long up_id = static_cast<long>(tree.size());
      tree.push_back(up);
      // plunge toward the nearer integer, park the sibling for best-bound;
      // siblings of an already-dominated dive segment are not worth keeping
      if (v - std::floor(v) <= 0.5) {
        dive = down_id;
        if (!priced_out) open.push({node_obj, up_id});
      } else {
        dive = up_id;
        if (!priced_out) open.push({node_obj, down_id});
      }
      break;
    }

    if (opts.node_trace) {
      *opts.node_trace << id << ',' << (lb <= -kInf ? "" : std::to_string(lb)) << ','
                       << (rep.has_incumbent ? std::to_string(ub) : "") << ',' << cuts_this_node
                       << '\n';
    }
    if (root_infeasible) return finish(TerminationReason::Infeasible);
  }

  // tree exhausted: the incumbent is optimal
  if (rep.has_incumbent) {
    lb = ub;
    return finish(TerminationReason::Gap);
  }
  lb = kInf;
  return finish(TerminationReason::Infeasible);
}

}  // namespace sdors
