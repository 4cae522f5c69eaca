#include "safenav/envs/tabular.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace safenav::envs {

void TabularCMDP::validate() const {
  if (n_states <= 0 || n_actions <= 0) throw std::invalid_argument("TabularCMDP: empty state/action space");
  if (transition.size() != static_cast<std::size_t>(n_states * n_actions * n_states) ||
      reward.size() != static_cast<std::size_t>(n_states * n_actions) ||
      cost.size() != static_cast<std::size_t>(n_states * n_actions) ||
      terminal.size() != static_cast<std::size_t>(n_states)) {
    throw std::invalid_argument("TabularCMDP: table size mismatch");
  }
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double row = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        const double pv = p(s, a, s2);
        if (pv < 0.0) throw std::invalid_argument("TabularCMDP: negative probability");
        row += pv;
      }
      if (std::abs(row - 1.0) > 1e-12) {
        throw std::invalid_argument("TabularCMDP: row P[" + std::to_string(s) + "][" + std::to_string(a) +
                                    "] sums to " + std::to_string(row));
      }
      if (c(s, a) < 0.0) throw std::invalid_argument("TabularCMDP: negative cost");
    }
  }
}

TabularStepResult tabular_step(const TabularCMDP& mdp, int s, int a, int step_index, Rng& rng) {
  if (s < 0 || s >= mdp.n_states) throw std::out_of_range("tabular_step: state index " + std::to_string(s));
  if (a < 0 || a >= mdp.n_actions) throw std::out_of_range("tabular_step: action index " + std::to_string(a));
  const double u = rng.uniform();
  double acc = 0.0;
  int s2 = mdp.n_states - 1;
  for (int k = 0; k < mdp.n_states; ++k) {
    acc += mdp.p(s, a, k);
    if (u < acc) {
      s2 = k;
      break;
    }
  }
  TabularStepResult res;
  res.next_state = s2;
  res.reward = mdp.r(s, a);
  res.cost = mdp.c(s, a);
  res.done = mdp.terminal[s2] || (mdp.horizon > 0 && step_index + 1 >= mdp.horizon);
  return res;
}

RandomCMDP random_layered_cmdp(Rng& rng, int max_states, int max_actions, int horizon) {
  if (max_states < 2 || max_actions < 1) {
    throw std::invalid_argument("random_layered_cmdp: need >= 2 states and >= 1 action");
  }
  RandomCMDP out;
  TabularCMDP& m = out.mdp;
  m.n_states = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_states - 1)));
  m.n_actions = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_actions)));
  m.gamma = 0.5 + 0.49 * rng.uniform();
  m.horizon = horizon;
  m.transition.assign(static_cast<std::size_t>(m.n_states) * m.n_actions * m.n_states, 0.0);
  m.reward.resize(static_cast<std::size_t>(m.n_states) * m.n_actions);
  m.cost.resize(static_cast<std::size_t>(m.n_states) * m.n_actions);
  m.terminal.assign(m.n_states, false);
  m.terminal[m.n_states - 1] = true;
  for (int s = 0; s < m.n_states; ++s) {
    for (int a = 0; a < m.n_actions; ++a) {
      m.reward[s * m.n_actions + a] = rng.uniform(-1.0, 1.0);
      m.cost[s * m.n_actions + a] = rng.uniform();
      // Mass only on strictly higher-indexed states keeps the chain acyclic.
      double total = 0.0;
      std::vector<double> w(m.n_states - s - 1);
      for (double& wi : w) {
        wi = 0.05 + rng.uniform();
        total += wi;
      }
      if (w.empty()) {
        m.transition[(s * m.n_actions + a) * m.n_states + s] = 1.0;  // terminal self-loop
      } else {
        double row = 0.0;
        for (int k = 0; k + 1 < static_cast<int>(w.size()); ++k) {
          const double pv = w[k] / total;
          m.transition[(s * m.n_actions + a) * m.n_states + s + 1 + k] = pv;
          row += pv;
        }
        // Exact unit row sum regardless of rounding.
        m.transition[(s * m.n_actions + a) * m.n_states + m.n_states - 1] = 1.0 - row;
      }
    }
  }
  out.policy.resize(static_cast<std::size_t>(m.n_states) * m.n_actions,
                    1.0 / static_cast<double>(m.n_actions));
  m.validate();
  return out;
}

namespace {

struct EnumCtx {
  const TabularCMDP& mdp;
  const TabularPolicy& policy;
  std::size_t max_paths;
  std::size_t paths = 0;
  double e_c = 0.0;   // E[C]
  double e_c2 = 0.0;  // E[C^2]

  void walk(int s, int t, double prob, double cost_acc, double discount) {
    if (mdp.terminal[s] || (mdp.horizon > 0 && t >= mdp.horizon) || prob == 0.0) {
      if (++paths > max_paths) {
        throw std::runtime_error("exact_cost_distribution: enumeration budget exceeded (> " +
                                 std::to_string(max_paths) + " paths)");
      }
      e_c += prob * cost_acc;
      e_c2 += prob * cost_acc * cost_acc;
      return;
    }
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double pa = policy[s * mdp.n_actions + a];
      if (pa == 0.0) continue;
      const double step_cost = cost_acc + discount * mdp.c(s, a);
      for (int s2 = 0; s2 < mdp.n_states; ++s2) {
        const double pt = mdp.p(s, a, s2);
        if (pt == 0.0) continue;
        walk(s2, t + 1, prob * pa * pt, step_cost, discount * mdp.gamma);
      }
    }
  }
};

}  // namespace

CostMoments exact_cost_distribution(const TabularCMDP& mdp, int s0, const TabularPolicy& policy,
                                    std::size_t max_paths) {
  mdp.validate();
  if (s0 < 0 || s0 >= mdp.n_states) throw std::out_of_range("exact_cost_distribution: bad start state");
  if (policy.size() != static_cast<std::size_t>(mdp.n_states * mdp.n_actions)) {
    throw std::invalid_argument("exact_cost_distribution: policy table size mismatch");
  }
  EnumCtx ctx{mdp, policy, max_paths};
  ctx.walk(s0, 0, 1.0, 0.0, 1.0);
  CostMoments m;
  m.q_c = ctx.e_c;
  m.v_c = ctx.e_c2 - ctx.e_c * ctx.e_c;
  if (m.v_c < 0.0) m.v_c = 0.0;  // numerical guard
  return m;
}

}  // namespace safenav::envs
