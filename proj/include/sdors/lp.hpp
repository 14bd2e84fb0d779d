#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sdors/mip.hpp"

namespace sdors {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;          // structural columns
  double objective = 0.0;
  std::vector<double> row_dual;   // one per row
  std::vector<double> red_cost;   // one per structural column
  int iterations = 0;
};

// Basis snapshot for warm re-solves of a model differing only in bounds or
// appended rows.
struct LpBasis {
  std::vector<int> basic;             // column id per row (structural or slack)
  std::vector<std::uint8_t> at_upper; // nonbasic position flags, per column
};

struct LpTolerances {
  double feas = 1e-7;
  double opt = 1e-7;
  double pivot = 1e-10;
};

// Bounded-variable primal simplex, two phases, Dantzig pricing with Bland's
// rule after 1000 degenerate pivots. Deterministic: fixed scan order, ties to
// the lowest column index. Integrality kinds on the model are ignored.
//
// `bound_override` replaces the model's column bounds when given (used by
// branch-and-cut nodes). Throws LpNumericalError on repeated pivot breakdown.
LpSolution solve_lp(const MipModel& model,
                    const std::vector<std::pair<double, double>>* bound_override = nullptr,
                    LpBasis* basis_out = nullptr);

LpSolution solve_lp_warm(const MipModel& model, const LpBasis& basis,
                         const std::vector<std::pair<double, double>>* bound_override = nullptr,
                         LpBasis* basis_out = nullptr);

struct LpNumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// b'y plus reduced-cost contributions of nonbasic columns at finite bounds;
// equals the primal objective at an optimum (strong duality).
double dual_objective(const MipModel& model, const LpSolution& sol,
                      const std::vector<std::pair<double, double>>* bound_override = nullptr);

}  // namespace sdors
