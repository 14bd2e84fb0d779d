#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sdors {

constexpr double kInf = 1e30;

enum class VarKind { Binary, Integer, Continuous };
enum class RowSense { LE, EQ, GE };

struct Column {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lb = 0.0;
  double ub = kInf;
  double obj = 0.0;
};

struct LinearRow {
  std::vector<std::pair<int, double>> coef;  // (column id, coefficient)
  RowSense sense = RowSense::LE;
  double rhs = 0.0;
  std::string name;

  double activity(std::span<const double> x) const {
    double a = 0.0;
    for (auto [j, c] : coef) a += c * x[j];
    return a;
  }
  // Positive when the row is violated at x.
  double violation(std::span<const double> x) const {
    double a = activity(x);
    switch (sense) {
      case RowSense::LE: return a - rhs;
      case RowSense::GE: return rhs - a;
      case RowSense::EQ: return std::abs(a - rhs);
    }
    return 0.0;
  }
};

// Sparse linear model, minimize sense. Doubles everywhere; durations enter as
// integral minute values.
struct MipModel {
  std::vector<Column> cols;
  std::vector<LinearRow> rows;

  int add_col(std::string name, VarKind kind, double lb, double ub, double obj) {
    cols.push_back({std::move(name), kind, lb, ub, obj});
    return static_cast<int>(cols.size()) - 1;
  }
  int add_row(LinearRow row) {
    rows.push_back(std::move(row));
    return static_cast<int>(rows.size()) - 1;
  }
  int num_cols() const { return static_cast<int>(cols.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  double objective_value(std::span<const double> x) const {
    double v = 0.0;
    for (int j = 0; j < num_cols(); ++j) v += cols[j].obj * x[j];
    return v;
  }
  std::optional<int> first_violated_row(std::span<const double> x, double tol) const {
    for (int i = 0; i < num_rows(); ++i)
      if (rows[i].violation(x) > tol) return i;
    return std::nullopt;
  }
};

}  // namespace sdors
