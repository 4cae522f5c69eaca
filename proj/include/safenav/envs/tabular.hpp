#pragma once

#include <vector>

#include "safenav/core/rng.hpp"

namespace safenav::envs {

// Finite CMDP (S, A, p, r, c, gamma) with explicit terminal states.
// Transition rows sum to 1 within 1e-12 (checked by validate()).
struct TabularCMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;  // [s][a][s'], row-major
  std::vector<double> reward;      // [s][a]
  std::vector<double> cost;        // [s][a], >= 0
  double gamma = 0.99;
  int horizon = 0;
  std::vector<bool> terminal;      // per state

  double p(int s, int a, int s2) const { return transition[(s * n_actions + a) * n_states + s2]; }
  double r(int s, int a) const { return reward[s * n_actions + a]; }
  double c(int s, int a) const { return cost[s * n_actions + a]; }

  void validate() const;  // throws on malformed tables
};

struct TabularStepResult {
  int next_state = 0;
  double reward = 0.0;
  double cost = 0.0;
  bool done = false;
};

// Draws s' from P[s][a]; done iff terminal[s'] or step_index+1 >= horizon.
// Throws std::out_of_range on invalid indices.
TabularStepResult tabular_step(const TabularCMDP& mdp, int s, int a, int step_index, Rng& rng);

// Policy as a per-state action distribution, row-major [s][a].
using TabularPolicy = std::vector<double>;

struct CostMoments {
  double q_c = 0.0;  // mean of discounted cumulative cost
  double v_c = 0.0;  // variance
};

// Random acyclic CMDP: transitions only reach higher-indexed states and the
// last state is terminal, so the infinite-horizon fixed point equals finite
// enumeration. A uniform-random policy is returned alongside.
struct RandomCMDP {
  TabularCMDP mdp;
  TabularPolicy policy;
};
RandomCMDP random_layered_cmdp(Rng& rng, int max_states, int max_actions, int horizon);

// Exact first and second moments of sum_t gamma^t c_t from s0 under
// `policy`, by full trajectory enumeration (terminal states absorb; the
// horizon truncates). Throws std::runtime_error with a path-count estimate
// when enumeration would exceed `max_paths`.
CostMoments exact_cost_distribution(const TabularCMDP& mdp, int s0, const TabularPolicy& policy,
                                    std::size_t max_paths = 1'000'000);

}  // namespace safenav::envs
