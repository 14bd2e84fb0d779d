#pragma once

#include <cstdint>
#include <vector>

namespace sdors {

// One cancellation knapsack: which of the assigned patients to keep within
// the room's time limit. Q_bar = sum(values) - best keep value.
struct SubproblemSpec {
  std::vector<int> patients;   // patient ids, ascending
  std::vector<int> weights;    // durations under the scenario, minutes
  std::vector<double> values;  // cancellation penalties
  int capacity = 0;            // room time limit, minutes

  int size() const { return static_cast<int>(patients.size()); }
  double total_value() const {
    double v = 0.0;
    for (double c : values) v += c;
    return v;
  }
};

}  // namespace sdors
