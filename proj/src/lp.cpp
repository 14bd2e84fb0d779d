#include "sdors/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdors {

namespace {

constexpr double kFeasTol = 1e-7;
constexpr double kOptTol = 1e-7;
constexpr double kPivotTol = 1e-10;
constexpr int kBlandAfter = 1000;

struct Simplex {
  // columns: [0,n) structural, [n,n+m) slacks, [n+m,...) artificials
  int n = 0, m = 0;
  std::vector<std::vector<std::pair<int, double>>> acols;  // structural columns
  std::vector<double> rhs;
  std::vector<double> lo, up, cost;
  std::vector<double> x;
  std::vector<int> basic;         // column per row
  std::vector<int> in_basis;      // row per column, -1 if nonbasic
  std::vector<std::uint8_t> at_upper;
  std::vector<double> binv;       // dense m*m, row-major
  int iterations = 0;
  int degenerate_run = 0;
  bool bland = false;

  double& B(int i, int k) { return binv[static_cast<std::size_t>(i) * m + k]; }

  int total_cols() const { return static_cast<int>(lo.size()); }
  bool is_artificial(int j) const { return j >= n + m; }

  double col_dot(int j, std::span<const double> v) const {
    if (j < n) {
      double s = 0.0;
      for (auto [i, a] : acols[j]) s += a * v[i];
      return s;
    }
    if (j < n + m) return v[j - n];           // slack, +1 in its row
    return art_sigma[j - n - m] * v[art_row[j - n - m]];
  }

  // w = Binv * a_j
  void ftran(int j, std::vector<double>& w) {
    std::fill(w.begin(), w.end(), 0.0);
    if (j < n) {
      for (auto [i, a] : acols[j])
        for (int k = 0; k < m; ++k) w[k] += a * B(k, i);
    } else if (j < n + m) {
      int i = j - n;
      for (int k = 0; k < m; ++k) w[k] = B(k, i);
    } else {
      int t = j - n - m;
      for (int k = 0; k < m; ++k) w[k] = art_sigma[t] * B(k, art_row[t]);
    }
  }

  std::vector<int> art_row;       // row of each artificial
  std::vector<double> art_sigma;  // +-1 coefficient

  void recompute_basics() {
    std::vector<double> r = rhs;
    for (int j = 0; j < total_cols(); ++j) {
      if (in_basis[j] >= 0 || x[j] == 0.0) continue;
      if (j < n) {
        for (auto [i, a] : acols[j]) r[i] -= a * x[j];
      } else if (j < n + m) {
        r[j - n] -= x[j];
      } else {
        r[art_row[j - n - m]] -= art_sigma[j - n - m] * x[j];
      }
    }
    for (int i = 0; i < m; ++i) {
      double v = 0.0;
      for (int k = 0; k < m; ++k) v += B(i, k) * r[k];
      x[basic[i]] = v;
    }
  }

  // Rebuilds binv from the current basic set. Returns false when singular.
  bool refactor() {
    std::vector<double> mat(static_cast<std::size_t>(m) * m, 0.0);
    auto M = [&](int i, int k) -> double& { return mat[static_cast<std::size_t>(i) * m + k]; };
    for (int k = 0; k < m; ++k) {
      int j = basic[k];
      if (j < n) {
        for (auto [i, a] : acols[j]) M(i, k) = a;
      } else if (j < n + m) {
        M(j - n, k) = 1.0;
      } else {
        M(art_row[j - n - m], k) = art_sigma[j - n - m];
      }
    }
    std::fill(binv.begin(), binv.end(), 0.0);
    for (int i = 0; i < m; ++i) B(i, i) = 1.0;
    for (int c = 0; c < m; ++c) {
      int piv = -1;
      double best = kPivotTol;
      for (int i = c; i < m; ++i)
        if (std::abs(M(i, c)) > best) {
          best = std::abs(M(i, c));
          piv = i;
        }
      if (piv < 0) return false;
      if (piv != c) {
        for (int k = 0; k < m; ++k) {
          std::swap(M(piv, k), M(c, k));
          std::swap(B(piv, k), B(c, k));
        }
        std::swap(basic[piv], basic[c]);
        in_basis[basic[piv]] = piv;
        in_basis[basic[c]] = c;
      }
      double d = M(c, c);
      for (int k = 0; k < m; ++k) {
        M(c, k) /= d;
        B(c, k) /= d;
      }
      for (int i = 0; i < m; ++i) {
        if (i == c) continue;
        double f = M(i, c);
        if (f == 0.0) continue;
        for (int k = 0; k < m; ++k) {
          M(i, k) -= f * M(c, k);
          B(i, k) -= f * B(c, k);
        }
      }
    }
    return true;
  }

  double phase_objective() const {
    double v = 0.0;
    for (int j = 0; j < total_cols(); ++j) v += cost[j] * x[j];
    return v;
  }

  enum class RunResult { Optimal, Unbounded };

  RunResult run_phase(bool phase_one, int& breakdowns) {
    std::vector<double> y(m), w(m);
    int since_recompute = 0;
    const long iter_cap = 2000 + 200L * (n + m);
    long phase_iters = 0;
    bool sticky_bland = false;
    while (true) {
      if (++phase_iters > iter_cap && !sticky_bland) {
        sticky_bland = true;  // stalling: least-index rule from here on
        bland = true;
        if (!refactor()) throw LpNumericalError("singular basis on anti-stall refactor");
        recompute_basics();
      }
      if (phase_iters > 4 * iter_cap) throw LpNumericalError("simplex stalled beyond iteration cap");
      // y = c_B Binv
      std::fill(y.begin(), y.end(), 0.0);
      for (int k = 0; k < m; ++k) {
        double cb = cost[basic[k]];
        if (cb == 0.0) continue;
        for (int i = 0; i < m; ++i) y[i] += cb * B(k, i);
      }
      // pricing
      int enter = -1;
      double best_viol = bland ? 0.0 : kOptTol;
      int dir = +1;
      for (int j = 0; j < total_cols(); ++j) {
        if (in_basis[j] >= 0 || lo[j] == up[j]) continue;
        double d = cost[j] - col_dot(j, y);
        double viol = 0.0;
        int jdir = 0;
        if (!at_upper[j] && d < -kOptTol) {
          viol = -d;
          jdir = +1;
        } else if (at_upper[j] && d > kOptTol) {
          viol = d;
          jdir = -1;
        } else {
          continue;
        }
        if (bland) {
          enter = j;
          dir = jdir;
          break;
        }
        if (viol > best_viol) {
          best_viol = viol;
          enter = j;
          dir = jdir;
        }
      }
      if (enter < 0) return RunResult::Optimal;

      ftran(enter, w);
      // ratio test on g = dir*w
      double t = (lo[enter] > -kInf && up[enter] < kInf) ? up[enter] - lo[enter] : kInf;
      int leave_row = -1;
      double leave_pivot = 0.0;
      for (int i = 0; i < m; ++i) {
        double g = dir * w[i];
        int bj = basic[i];
        double limit = kInf;
        if (g > kPivotTol) {
          if (lo[bj] > -kInf) limit = (x[bj] - lo[bj]) / g;
        } else if (g < -kPivotTol) {
          if (up[bj] < kInf) limit = (up[bj] - x[bj]) / (-g);
        } else {
          continue;
        }
        if (limit < -1e-9) limit = 0.0;
        if (limit < t - 1e-12 ||
            (limit < t + 1e-12 && leave_row >= 0 &&
             (bland ? bj < basic[leave_row] : std::abs(g) > std::abs(leave_pivot)))) {
          t = std::max(0.0, limit);
          leave_row = i;
          leave_pivot = g;
        } else if (limit < t + 1e-12 && leave_row < 0 && limit <= t) {
          t = std::max(0.0, limit);
          leave_row = i;
          leave_pivot = g;
        }
      }
      if (t >= kInf && leave_row < 0) {
        if (phase_one) throw LpNumericalError("phase-1 objective unbounded");
        return RunResult::Unbounded;
      }
      ++iterations;
      if (t < 1e-7) {
        if (++degenerate_run > kBlandAfter) bland = true;
      } else {
        degenerate_run = 0;
        if (!sticky_bland) bland = false;
      }

      if (leave_row < 0) {
        // bound-to-bound flip
        double step = dir * t;
        for (int i = 0; i < m; ++i) x[basic[i]] -= step * w[i];
        x[enter] += step;
        at_upper[enter] = !at_upper[enter];
      } else {
        double piv = w[leave_row];
        if (std::abs(piv) < kPivotTol) {
          if (++breakdowns > 20) throw LpNumericalError("repeated pivot breakdown");
          if (!refactor()) throw LpNumericalError("singular basis on refactor");
          recompute_basics();
          continue;
        }
        int leave_col = basic[leave_row];
        double step = dir * t;
        for (int i = 0; i < m; ++i) x[basic[i]] -= step * w[i];
        x[enter] += step;
        // leaving variable lands on the bound it hit
        double g = dir * piv;
        x[leave_col] = (g > 0) ? lo[leave_col] : up[leave_col];
        at_upper[leave_col] = (g <= 0);
        if (phase_one && is_artificial(leave_col)) {
          lo[leave_col] = up[leave_col] = 0.0;
          x[leave_col] = 0.0;
        }
        basic[leave_row] = enter;
        in_basis[enter] = leave_row;
        in_basis[leave_col] = -1;
        // explicit inverse update
        double inv = 1.0 / piv;
        for (int k = 0; k < m; ++k) B(leave_row, k) *= inv;
        for (int i = 0; i < m; ++i) {
          if (i == leave_row) continue;
          double f = w[i];
          if (f == 0.0) continue;
          for (int k = 0; k < m; ++k) B(i, k) -= f * B(leave_row, k);
        }
      }
      if (++since_recompute >= 200) {
        recompute_basics();
        since_recompute = 0;
      }
      if (phase_one) {
        double po = 0.0;
        for (std::size_t a = 0; a < art_row.size(); ++a) po += x[n + m + static_cast<int>(a)];
        if (po < 1e-10) return RunResult::Optimal;
      }
    }
  }
};

void setup(const MipModel& model, const std::vector<std::pair<double, double>>* bounds, Simplex& s) {
  s.n = model.num_cols();
  s.m = model.num_rows();
  s.acols.assign(s.n, {});
  for (int i = 0; i < s.m; ++i)
    for (auto [j, a] : model.rows[i].coef)
      if (a != 0.0) s.acols[j].emplace_back(i, a);
  s.rhs.resize(s.m);
  s.lo.resize(s.n + s.m);
  s.up.resize(s.n + s.m);
  for (int j = 0; j < s.n; ++j) {
    double l = bounds ? (*bounds)[j].first : model.cols[j].lb;
    double u = bounds ? (*bounds)[j].second : model.cols[j].ub;
    if (l <= -kInf && u >= kInf)
      throw std::invalid_argument("free columns unsupported: " + model.cols[j].name);
    s.lo[j] = l;
    s.up[j] = u;
  }
  for (int i = 0; i < s.m; ++i) {
    s.rhs[i] = model.rows[i].rhs;
    switch (model.rows[i].sense) {
      case RowSense::LE: s.lo[s.n + i] = 0.0; s.up[s.n + i] = kInf; break;
      case RowSense::GE: s.lo[s.n + i] = -kInf; s.up[s.n + i] = 0.0; break;
      case RowSense::EQ: s.lo[s.n + i] = 0.0; s.up[s.n + i] = 0.0; break;
    }
  }
}

LpSolution finish(const MipModel& model, Simplex& s, LpStatus status, LpBasis* basis_out) {
  LpSolution sol;
  sol.status = status;
  sol.iterations = s.iterations;
  if (status != LpStatus::Optimal) return sol;
  sol.x.assign(s.x.begin(), s.x.begin() + s.n);
  sol.objective = model.objective_value(sol.x);
  std::vector<double> y(s.m, 0.0);
  for (int k = 0; k < s.m; ++k) {
    double cb = s.cost[s.basic[k]];
    if (cb == 0.0) continue;
    for (int i = 0; i < s.m; ++i) y[i] += cb * s.B(k, i);
  }
  sol.row_dual = y;
  sol.red_cost.resize(s.n);
  for (int j = 0; j < s.n; ++j) sol.red_cost[j] = s.cost[j] - s.col_dot(j, y);
  if (basis_out) {
    basis_out->basic = s.basic;
    basis_out->at_upper.assign(s.at_upper.begin(), s.at_upper.begin() + s.n + s.m);
  }
  return sol;
}

LpSolution solve_cold(const MipModel& model, const std::vector<std::pair<double, double>>* bounds,
                      LpBasis* basis_out) {
  Simplex s;
  setup(model, bounds, s);

  // nonbasic start at the finite bound; residuals covered by artificials
  s.x.assign(s.n + s.m, 0.0);
  s.at_upper.assign(s.n + s.m, 0);
  s.in_basis.assign(s.n + s.m, -1);
  for (int j = 0; j < s.n; ++j) {
    s.at_upper[j] = (s.lo[j] <= -kInf);
    s.x[j] = s.at_upper[j] ? s.up[j] : s.lo[j];
  }
  std::vector<double> resid = s.rhs;
  for (int j = 0; j < s.n; ++j)
    if (s.x[j] != 0.0)
      for (auto [i, a] : s.acols[j]) resid[i] -= a * s.x[j];

  s.basic.assign(s.m, -1);
  for (int i = 0; i < s.m; ++i) {
    int sj = s.n + i;
    if (resid[i] >= s.lo[sj] - kFeasTol && resid[i] <= s.up[sj] + kFeasTol) {
      s.basic[i] = sj;
      s.in_basis[sj] = i;
      s.x[sj] = resid[i];
    } else {
      // slack to its nearest bound, artificial covers the rest
      double sv = std::clamp(resid[i], s.lo[sj], s.up[sj]);
      s.x[sj] = sv;
      s.at_upper[sj] = (sv == s.up[sj] && s.lo[sj] != s.up[sj]);
      double gap = resid[i] - sv;
      int aj = static_cast<int>(s.lo.size());
      s.art_row.push_back(i);
      s.art_sigma.push_back(gap >= 0 ? 1.0 : -1.0);
      s.lo.push_back(0.0);
      s.up.push_back(kInf);
      s.x.push_back(std::abs(gap));
      s.at_upper.push_back(0);
      s.in_basis.push_back(i);
      s.basic[i] = aj;
    }
  }
  s.binv.assign(static_cast<std::size_t>(s.m) * s.m, 0.0);
  for (int i = 0; i < s.m; ++i)
    s.B(i, i) = (s.basic[i] >= s.n + s.m) ? s.art_sigma[s.basic[i] - s.n - s.m] : 1.0;

  int breakdowns = 0;
  if (!s.art_row.empty()) {
    s.cost.assign(s.lo.size(), 0.0);
    for (std::size_t a = 0; a < s.art_row.size(); ++a) s.cost[s.n + s.m + a] = 1.0;
    s.run_phase(true, breakdowns);
    s.recompute_basics();
    double infeas = 0.0;
    for (std::size_t a = 0; a < s.art_row.size(); ++a)
      infeas += std::max(0.0, s.x[s.n + s.m + static_cast<int>(a)]);
    if (infeas > kFeasTol * (1.0 + std::abs(s.phase_objective())))
      return finish(model, s, LpStatus::Infeasible, basis_out);
    for (std::size_t a = 0; a < s.art_row.size(); ++a) {
      int aj = s.n + s.m + static_cast<int>(a);
      s.lo[aj] = s.up[aj] = 0.0;
      if (s.in_basis[aj] < 0) s.x[aj] = 0.0;
    }
    s.bland = false;
    s.degenerate_run = 0;
  }

  s.cost.assign(s.lo.size(), 0.0);
  for (int j = 0; j < s.n; ++j) s.cost[j] = model.cols[j].obj;
  auto r = s.run_phase(false, breakdowns);
  s.recompute_basics();
  if (r == Simplex::RunResult::Unbounded) return finish(model, s, LpStatus::Unbounded, basis_out);
  return finish(model, s, LpStatus::Optimal, basis_out);
}

}  // namespace

LpSolution solve_lp(const MipModel& model, const std::vector<std::pair<double, double>>* bounds,
                    LpBasis* basis_out) {
  return solve_cold(model, bounds, basis_out);
}

LpSolution solve_lp_warm(const MipModel& model, const LpBasis& basis,
                         const std::vector<std::pair<double, double>>* bounds, LpBasis* basis_out) {
  Simplex s;
  setup(model, bounds, s);
  if (static_cast<int>(basis.basic.size()) > s.m ||
      static_cast<int>(basis.at_upper.size()) > s.n + s.m)
    return solve_cold(model, bounds, basis_out);

  s.x.assign(s.n + s.m, 0.0);
  s.at_upper.assign(s.n + s.m, 0);
  s.in_basis.assign(s.n + s.m, -1);
  s.basic.assign(s.m, -1);
  for (std::size_t i = 0; i < basis.basic.size(); ++i) {
    int j = basis.basic[i];
    if (j < 0 || j >= s.n + s.m || s.in_basis[j] >= 0) return solve_cold(model, bounds, basis_out);
    s.basic[i] = j;
    s.in_basis[j] = static_cast<int>(i);
  }
  for (int i = static_cast<int>(basis.basic.size()); i < s.m; ++i) {
    int sj = s.n + i;  // appended rows carry their slack
    if (s.in_basis[sj] >= 0) return solve_cold(model, bounds, basis_out);
    s.basic[i] = sj;
    s.in_basis[sj] = i;
  }
  for (int j = 0; j < s.n + s.m; ++j) {
    if (s.in_basis[j] >= 0) continue;
    bool upper = j < static_cast<int>(basis.at_upper.size()) ? basis.at_upper[j] != 0
                                                             : (s.lo[j] <= -kInf);
    if (upper && s.up[j] >= kInf) upper = false;
    if (!upper && s.lo[j] <= -kInf) upper = true;
    s.at_upper[j] = upper;
    s.x[j] = upper ? s.up[j] : s.lo[j];
  }
  s.binv.assign(static_cast<std::size_t>(s.m) * s.m, 0.0);
  if (!s.refactor()) return solve_cold(model, bounds, basis_out);
  s.recompute_basics();
  for (int i = 0; i < s.m; ++i) {
    int j = s.basic[i];
    if (s.x[j] < s.lo[j] - kFeasTol || s.x[j] > s.up[j] + kFeasTol)
      return solve_cold(model, bounds, basis_out);  // stale basis, start over
  }
  s.cost.assign(s.lo.size(), 0.0);
  for (int j = 0; j < s.n; ++j) s.cost[j] = model.cols[j].obj;
  int breakdowns = 0;
  auto r = s.run_phase(false, breakdowns);
  s.recompute_basics();
  if (r == Simplex::RunResult::Unbounded) return finish(model, s, LpStatus::Unbounded, basis_out);
  return finish(model, s, LpStatus::Optimal, basis_out);
}

double dual_objective(const MipModel& model, const LpSolution& sol,
                      const std::vector<std::pair<double, double>>* bounds) {
  double v = 0.0;
  for (int i = 0; i < model.num_rows(); ++i) v += sol.row_dual[i] * model.rows[i].rhs;
  for (int j = 0; j < model.num_cols(); ++j) {
    double d = sol.red_cost[j];
    if (std::abs(d) <= 1e-7) continue;
    double l = bounds ? (*bounds)[j].first : model.cols[j].lb;
    double u = bounds ? (*bounds)[j].second : model.cols[j].ub;
    v += d > 0 ? d * l : d * u;
  }
  return v;
}

}  // namespace sdors
