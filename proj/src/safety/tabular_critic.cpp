#include "safenav/safety/tabular_critic.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace safenav::safety {

CriticTable fit_tabular_critic(const envs::TabularCMDP& mdp, const envs::TabularPolicy& policy,
                               int iterations) {
  mdp.validate();
  const int S = mdp.n_states, A = mdp.n_actions;
  if (policy.size() != static_cast<std::size_t>(S * A)) {
    throw std::invalid_argument("fit_tabular_critic: policy table size mismatch");
  }
  std::vector<double> q(S * A, 0.0), v(S * A, 0.0);
  std::vector<double> q_new(S * A), v_new(S * A);
  const double g = mdp.gamma;
  for (int it = 0; it < iterations; ++it) {
    double delta = 0.0;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double c = mdp.c(s, a);
        double eq = 0.0, ev = 0.0, eq2 = 0.0;
        for (int s2 = 0; s2 < S; ++s2) {
          const double p = mdp.p(s, a, s2);
          if (p == 0.0 || mdp.terminal[s2]) continue;
          for (int a2 = 0; a2 < A; ++a2) {
            const double pa = policy[s2 * A + a2];
            if (pa == 0.0) continue;
            const double w = p * pa;
            const double qq = q[s2 * A + a2];
            eq += w * qq;
            ev += w * v[s2 * A + a2];
            eq2 += w * qq * qq;
          }
        }
        const double qn = q_c_target(c, g, eq);
        q_new[s * A + a] = qn;
        v_new[s * A + a] = v_c_target(c, g, qn, eq, ev, eq2);
        delta = std::max(delta, std::abs(qn - q[s * A + a]));
        delta = std::max(delta, std::abs(v_new[s * A + a] - v[s * A + a]));
      }
    }
    q.swap(q_new);
    v.swap(v_new);
    if (delta < 1e-10) {
      CriticTable table(S * A);
      for (int i = 0; i < S * A; ++i) table[i] = GaussianCostDistribution(q[i], v[i]);
      return table;
    }
  }
  throw std::runtime_error("fit_tabular_critic: no convergence after " + std::to_string(iterations) +
                           " sweeps");
}

void export_critic_csv(const CriticTable& table, const envs::TabularCMDP& mdp, double alpha,
                       const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("export_critic_csv: cannot open " + path);
  os << "s,a,q_c,v_c,cvar\n";
  os.precision(17);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const auto& g = table[s * mdp.n_actions + a];
      os << s << ',' << a << ',' << g.q_c << ',' << g.v_c << ',' << cvar(g.q_c, g.v_c, alpha) << '\n';
    }
  }
}

}  // namespace safenav::safety
