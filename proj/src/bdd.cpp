#include "sdors/bdd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sdors {

namespace {

constexpr double kTieTol = 1e-9;

// Achievable subset-sum bitsets for each suffix of the ordering, truncated at
// the capacity. achievable[k] covers items order[k..n).
std::vector<std::vector<std::uint64_t>> suffix_sums(const SubproblemSpec& spec,
                                                    const std::vector<int>& order) {
  const int n = static_cast<int>(order.size());
  const int words = spec.capacity / 64 + 1;
  std::vector<std::vector<std::uint64_t>> ach(n + 1, std::vector<std::uint64_t>(words, 0));
  ach[n][0] = 1;  // empty set
  for (int k = n - 1; k >= 0; --k) {
    const int w = spec.weights[order[k]];
    const auto& nxt = ach[k + 1];
    auto& cur = ach[k];
    cur = nxt;
    if (w == 0) continue;
    const int wordshift = w / 64, bitshift = w % 64;
    for (int i = words - 1; i >= wordshift; --i) {
      std::uint64_t v = nxt[i - wordshift] << bitshift;
      if (bitshift && i - wordshift - 1 >= 0) v |= nxt[i - wordshift - 1] >> (64 - bitshift);
      cur[i] |= v;
    }
    // mask bits above capacity
    int top = spec.capacity % 64;
    cur[words - 1] &= (top == 63) ? ~0ULL : ((1ULL << (top + 1)) - 1);
  }
  return ach;
}

// Largest achievable value <= q in the bitset.
int canonical_state(const std::vector<std::uint64_t>& ach, int q) {
  int word = q / 64, bit = q % 64;
  std::uint64_t m = ach[word] & ((bit == 63) ? ~0ULL : ((1ULL << (bit + 1)) - 1));
  while (true) {
    if (m) return word * 64 + 63 - std::countl_zero(m);
    if (--word < 0) return 0;
    m = ach[word];
  }
}

bool arc_usable(const Diagram& dia, const DiagramArc& a, const std::vector<std::uint8_t>* mask) {
  if (!a.one || mask == nullptr) return true;
  return (*mask)[dia.order[a.layer]] != 0;
}

// Shortest distance to the terminal per node over usable arcs; a zero-arc
// path always exists so every node is reachable.
std::vector<double> distances_to_terminal(const Diagram& dia, const std::vector<std::uint8_t>* mask) {
  std::vector<double> dist(dia.nodes.size(), 0.0);
  for (int v = static_cast<int>(dia.nodes.size()) - 2; v >= 0; --v) {
    const DiagramNode& node = dia.nodes[v];
    double best = dist[dia.arcs[node.zero_arc].to];
    if (node.one_arc >= 0 && arc_usable(dia, dia.arcs[node.one_arc], mask)) {
      const DiagramArc& a = dia.arcs[node.one_arc];
      best = std::min(best, a.cost + dist[a.to]);
    }
    dist[v] = best;
  }
  return dist;
}

}  // namespace

std::vector<int> default_ordering(const SubproblemSpec& spec) {
  std::vector<int> order(spec.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (spec.weights[a] != spec.weights[b]) return spec.weights[a] > spec.weights[b];
    return spec.patients[a] < spec.patients[b];
  });
  return order;
}

Diagram build_diagram(const SubproblemSpec& spec) { return build_diagram(spec, default_ordering(spec)); }

Diagram build_diagram(const SubproblemSpec& spec, const std::vector<int>& order) {
  for (int w : spec.weights)
    if (w < 0) throw std::invalid_argument("diagram weights must be non-negative");
  if (spec.capacity < 0) throw std::invalid_argument("diagram capacity must be non-negative");

  Diagram dia;
  dia.spec = spec;
  dia.order = order;
  const int n = static_cast<int>(order.size());

  if (n == 0) {
    dia.nodes.push_back({0, spec.capacity, 0, -1});
    dia.nodes.push_back({1, 0, -1, -1});
    dia.arcs.push_back({0, 1, -1, false, 0.0});
    dia.layers = {{0}, {1}};
    return dia;
  }

  auto ach = suffix_sums(spec, order);
  dia.nodes.push_back({0, canonical_state(ach[0], spec.capacity), -1, -1});
  dia.layers.assign(n + 1, {});
  dia.layers[0] = {0};

  for (int k = 0; k < n; ++k) {
    const int pos = order[k];
    const int w = spec.weights[pos];
    std::map<int, int> next_by_state;  // canonical state -> node id
    auto child = [&](int state) {
      auto it = next_by_state.find(state);
      if (it != next_by_state.end()) return it->second;
      int id = static_cast<int>(dia.nodes.size());
      dia.nodes.push_back({k + 1, state, -1, -1});
      next_by_state.emplace(state, id);
      dia.layers[k + 1].push_back(id);
      return id;
    };
    for (int v : dia.layers[k]) {
      int state = dia.nodes[v].state;
      int c0 = child(canonical_state(ach[k + 1], state));
      dia.nodes[v].zero_arc = static_cast<int>(dia.arcs.size());
      dia.arcs.push_back({v, c0, k, false, 0.0});
      if (w <= state) {
        int c1 = child(canonical_state(ach[k + 1], state - w));
        dia.nodes[v].one_arc = static_cast<int>(dia.arcs.size());
        dia.arcs.push_back({v, c1, k, true, -spec.values[pos]});
      }
    }
  }
  return dia;
}

PathResult shortest_path(const Diagram& dia, const std::vector<std::uint8_t>* mask) {
  PathResult res;
  const int n = static_cast<int>(dia.nodes.size());
  std::vector<double> dist = distances_to_terminal(dia, mask);
  res.value = dist[dia.root()];

  // lexicographically smallest optimal keep-set, by ascending patient id
  std::vector<std::vector<int>> best(n);
  for (int v = n - 2; v >= 0; --v) {
    const DiagramNode& node = dia.nodes[v];
    const DiagramArc& z = dia.arcs[node.zero_arc];
    std::vector<int>* chosen = &best[z.to];
    bool via_one = false;
    if (node.one_arc >= 0 && arc_usable(dia, dia.arcs[node.one_arc], mask)) {
      const DiagramArc& a = dia.arcs[node.one_arc];
      double one_len = a.cost + dist[a.to];
      double zero_len = dist[z.to];
      if (one_len < zero_len - kTieTol) {
        via_one = true;
      } else if (one_len <= zero_len + kTieTol) {
        int pid = dia.spec.patients[dia.order[a.layer]];
        std::vector<int> cand = best[a.to];
        cand.insert(std::lower_bound(cand.begin(), cand.end(), pid), pid);
        if (std::lexicographical_compare(cand.begin(), cand.end(), chosen->begin(), chosen->end())) {
          best[v] = std::move(cand);
          continue;
        }
      }
    }
    if (via_one) {
      const DiagramArc& a = dia.arcs[node.one_arc];
      int pid = dia.spec.patients[dia.order[a.layer]];
      std::vector<int> cand = best[a.to];
      cand.insert(std::lower_bound(cand.begin(), cand.end(), pid), pid);
      best[v] = std::move(cand);
    } else {
      best[v] = *chosen;
    }
  }
  res.keep = best[dia.root()];

  double assigned = 0.0;
  for (int i = 0; i < dia.spec.size(); ++i)
    if (mask == nullptr || (*mask)[i]) assigned += dia.spec.values[i];
  res.cancel_cost = assigned + res.value;
  return res;
}

DiagramDuals extract_duals(const Diagram& dia, const std::vector<std::uint8_t>* mask) {
  DiagramDuals duals;
  duals.node_potential = distances_to_terminal(dia, mask);
  duals.arc_penalty.assign(dia.arcs.size(), 0.0);
  for (std::size_t a = 0; a < dia.arcs.size(); ++a) {
    const DiagramArc& arc = dia.arcs[a];
    if (arc.one && !arc_usable(dia, arc, mask))
      duals.arc_penalty[a] =
          std::max(0.0, duals.node_potential[arc.from] - duals.node_potential[arc.to] - arc.cost);
  }
  return duals;
}

bool duals_feasible(const Diagram& dia, const DiagramDuals& duals,
                    const std::vector<std::uint8_t>* mask, double tol) {
  if (std::abs(duals.node_potential[dia.terminal()]) > tol) return false;
  for (std::size_t a = 0; a < dia.arcs.size(); ++a) {
    const DiagramArc& arc = dia.arcs[a];
    if (duals.arc_penalty[a] < -tol) return false;
    double slack = arc.cost - duals.node_potential[arc.from] + duals.node_potential[arc.to];
    if (arc.one) slack += duals.arc_penalty[a];
    if (slack < -tol) return false;
    (void)mask;
  }
  return true;
}

double dual_objective(const Diagram& dia, const DiagramDuals& duals,
                      const std::vector<std::uint8_t>* mask) {
  double obj = duals.node_potential[dia.root()];
  for (std::size_t a = 0; a < dia.arcs.size(); ++a) {
    const DiagramArc& arc = dia.arcs[a];
    if (!arc.one) continue;
    double cap = (mask == nullptr || (*mask)[dia.order[arc.layer]]) ? 1.0 : 0.0;
    obj -= duals.arc_penalty[a] * cap;
  }
  return obj;
}

namespace {

std::vector<double> max_penalty_per_position(const Diagram& dia, const DiagramDuals& duals) {
  std::vector<double> ximax(dia.spec.size(), 0.0);
  for (std::size_t a = 0; a < dia.arcs.size(); ++a)
    if (dia.arcs[a].one) {
      int pos = dia.order[dia.arcs[a].layer];
      ximax[pos] = std::max(ximax[pos], duals.arc_penalty[a]);
    }
  return ximax;
}

}  // namespace

BddCut bdd_benders_cut(const Diagram& dia, const DiagramDuals& duals) {
  BddCut cut;
  cut.rhs = duals.node_potential[dia.root()];
  auto ximax = max_penalty_per_position(dia, duals);
  for (int i = 0; i < dia.spec.size(); ++i)
    cut.patient_coef.emplace_back(dia.spec.patients[i], dia.spec.values[i] - ximax[i]);
  return cut;
}

BddCut bdd_theta_cut(const Diagram& dia, const DiagramDuals& duals) {
  BddCut cut;
  cut.rhs = duals.node_potential[dia.root()];
  auto ximax = max_penalty_per_position(dia, duals);
  for (int i = 0; i < dia.spec.size(); ++i) cut.patient_coef.emplace_back(dia.spec.patients[i], -ximax[i]);
  return cut;
}

KnapsackLpResult knapsack_lp_duals(const SubproblemSpec& spec, const std::vector<double>* caps) {
  const int n = spec.size();
  KnapsackLpResult res;
  res.delta.assign(n, 0.0);

  auto cap = [&](int i) { return caps ? (*caps)[i] : 1.0; };
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    bool za = spec.weights[a] == 0, zb = spec.weights[b] == 0;
    if (za != zb) return za;  // weightless items first (infinite ratio)
    if (!za) {
      double ra = spec.values[a] / spec.weights[a], rb = spec.values[b] / spec.weights[b];
      if (std::abs(ra - rb) > 1e-12) return ra > rb;
    }
    return spec.patients[a] < spec.patients[b];
  });

  double remaining = spec.capacity;
  double lambda = 0.0;
  bool bound = false;
  for (int i : order) {
    if (spec.weights[i] == 0) {
      res.keep_value += spec.values[i] * cap(i);
      continue;
    }
    double take = std::min(cap(i), remaining / spec.weights[i]);
    res.keep_value += spec.values[i] * take;
    remaining -= take * spec.weights[i];
    if (!bound && take < cap(i) - 1e-12) {
      lambda = spec.values[i] / spec.weights[i];
      bound = true;
    }
  }
  res.eta = -lambda;
  for (int i = 0; i < n; ++i)
    res.delta[i] = -std::max(0.0, spec.values[i] - lambda * spec.weights[i]);
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += spec.values[i] * cap(i);
  res.objective = total - res.keep_value;
  return res;
}

double exact_cancel_cost(const SubproblemSpec& spec) {
  if (spec.size() == 0) return 0.0;
  return shortest_path(build_diagram(spec)).cancel_cost;
}

std::string Diagram::to_dot() const {
  std::ostringstream out;
  out << "digraph knapsack {\n  rankdir=TB;\n";
  for (std::size_t v = 0; v < nodes.size(); ++v)
    out << "  n" << v << " [label=\"" << nodes[v].state << "\"];\n";
  for (const auto& a : arcs) {
    out << "  n" << a.from << " -> n" << a.to;
    out << (a.one ? " [label=\"" : " [style=dashed,label=\"") << a.cost << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace sdors
