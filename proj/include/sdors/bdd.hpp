#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdors/subproblem.hpp"

namespace sdors {

struct DiagramArc {
  int from = -1;
  int to = -1;
  int layer = -1;   // layer index == position in Diagram::order
  bool one = false; // one-arc keeps the layer's patient
  double cost = 0.0;
};

struct DiagramNode {
  int layer = 0;
  int state = 0;       // residual capacity, canonicalized to the largest
                       // achievable remaining subset-sum <= true residual
  int zero_arc = -1;
  int one_arc = -1;
};

// Reduced layered decision diagram for one cancellation knapsack. Every
// root-to-terminal path is a feasible keep-set and vice versa; path length
// equals -(kept cancellation value). Immutable after build.
struct Diagram {
  SubproblemSpec spec;
  std::vector<int> order;  // positions into spec arrays, one per layer
  std::vector<DiagramNode> nodes;
  std::vector<DiagramArc> arcs;
  std::vector<std::vector<int>> layers;  // node ids per layer; last = {terminal}

  int root() const { return 0; }
  int terminal() const { return static_cast<int>(nodes.size()) - 1; }
  int num_layers() const { return static_cast<int>(order.size()); }
  std::string to_dot() const;
};

// Heavier-first default ordering (decreasing duration, ties by patient id).
std::vector<int> default_ordering(const SubproblemSpec& spec);

Diagram build_diagram(const SubproblemSpec& spec);
Diagram build_diagram(const SubproblemSpec& spec, const std::vector<int>& order);

struct PathResult {
  double value = 0.0;            // shortest o->t length over usable arcs
  std::vector<int> keep;         // kept patient ids, ascending
  double cancel_cost = 0.0;      // sum(values over mask support) + value
};

// mask (per spec position) marks whose one-arcs are usable; nullptr = all.
// Ties broken toward the lexicographically smallest keep-set (by patient id).
PathResult shortest_path(const Diagram& dia, const std::vector<std::uint8_t>* mask = nullptr);

struct DiagramDuals {
  std::vector<double> node_potential;  // pi per node, pi[terminal] = 0
  std::vector<double> arc_penalty;     // xi per arc, > 0 only on blocked one-arcs
};

DiagramDuals extract_duals(const Diagram& dia, const std::vector<std::uint8_t>* mask = nullptr);

// max(0, pi_src - pi_dst - cost) completion; asserts dual feasibility.
bool duals_feasible(const Diagram& dia, const DiagramDuals& duals,
                    const std::vector<std::uint8_t>* mask, double tol);
double dual_objective(const Diagram& dia, const DiagramDuals& duals,
                      const std::vector<std::uint8_t>* mask);

// Strengthened cut built from the duals, in merged-coefficient form:
//   Q >= rhs + sum_p coef_p * x_p        (coef_p = value_p - max xi over p's one-arcs)
// Patients with no one-arcs in the diagram keep their full value coefficient;
// patients outside the diagram do not appear.
struct BddCut {
  double rhs = 0.0;                                  // pi at the root
  std::vector<std::pair<int, double>> patient_coef;  // (patient id, coefficient)

  double eval(const std::vector<std::uint8_t>& assigned) const {
    double v = rhs;
    for (auto [p, c] : patient_coef)
      if (assigned[p]) v += c;
    return v;
  }
};

BddCut bdd_benders_cut(const Diagram& dia, const DiagramDuals& duals);

// Same strengthened coefficients without the value terms, for recourse
// variables whose objective already omits the assignment constant:
//   theta >= rhs - sum_p ximax_p * x_p
BddCut bdd_theta_cut(const Diagram& dia, const DiagramDuals& duals);

// Greedy-ratio solution of the knapsack LP relaxation with per-patient caps
// (defaults to 1). Duals follow the minimization convention: eta <= 0 on the
// capacity row, delta_p = -value_p - eta*weight_p for fully kept patients.
struct KnapsackLpResult {
  double keep_value = 0.0;  // optimal LP value of the kept penalties
  double objective = 0.0;   // sum(values*caps) - keep_value
  double eta = 0.0;
  std::vector<double> delta;  // per spec position
};

KnapsackLpResult knapsack_lp_duals(const SubproblemSpec& spec,
                                   const std::vector<double>* caps = nullptr);

// Exact optimal cancellation cost of a knapsack via the diagram.
double exact_cancel_cost(const SubproblemSpec& spec);

}  // namespace sdors
