#pragma once

#include <cstdint>
#include <vector>

namespace safenav {

using Vec = std::vector<double>;

// One environment transition: (o_t, a_t, r_t, c_t) plus termination flags.
struct TransitionStep {
  Vec observation;
  Vec action;        // components in [-1, 1]
  double reward = 0.0;
  double cost = 0.0;  // >= 0
  bool done = false;
  bool violation = false;  // safety indicator; implies cost > 0
};

struct Episode {
  std::vector<TransitionStep> steps;
  std::uint64_t seed = 0;
  double route_length_m = 0.0;
  double completed_fraction = 0.0;  // in [0, 1]

  std::size_t size() const { return steps.size(); }
};

// Per-episode safety budget and risk parameters.
struct RiskBudget {
  double d = 0.5;             // cost budget
  double alpha = 0.5;         // CVaR risk level, in (0, 1)
  double barrier_decay = 0.1; // in (0, 1)
  int barrier_degree_m = 1;   // relative degree of the barrier condition
  double entropy_floor = 0.0; // H_0
};

}  // namespace safenav
