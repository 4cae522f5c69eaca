#include "safenav/harness/oracle_check.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "safenav/core/rng.hpp"
#include "safenav/envs/tabular.hpp"
#include "safenav/harness/metrics.hpp"
#include "safenav/safety/distribution.hpp"
#include "safenav/safety/tabular_critic.hpp"
#include "safenav/wm/world_model.hpp"

namespace safenav::harness {

namespace {

// W2^2 as the quantile-coupling integral int_0^1 (F1^{-1}(u) - F2^{-1}(u))^2 du,
// evaluated through the substitution u = Phi(z):
//   int (dq + ds*z)^2 phi(z) dz, trapezoid over z in [-12, 12].
double w2_numeric(double q1, double v1, double q2, double v2) {
  const double dq = q1 - q2;
  const double ds = std::sqrt(v1) - std::sqrt(v2);
  const int n = 48000;
  const double lo = -12.0, hi = 12.0, step = (hi - lo) / n;
  auto f = [&](double z) {
    const double d = dq + ds * z;
    return d * d * safety::normal_pdf(z);
  };
  double acc = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < n; ++i) acc += f(lo + step * i);
  return std::sqrt(acc * step);
}

struct Suite {
  std::string name;
  std::function<bool()> run;
};

}  // namespace

int run_oracle_checks(std::ostream& out) {
  std::vector<Suite> suites;

  suites.push_back({"cvar-pinned-values", [] {
                      return std::abs(safety::cvar(1.0, 4.0, 0.5) - 2.5957691) < 1e-6 &&
                             std::abs(safety::cvar(0.0, 1.0, 0.1) - 1.7549833) < 1e-6;
                    }});

  suites.push_back({"kl-closed-form", [] {
                      wm::DiagonalGaussian a{{0.0}, {1.0}}, b{{1.0}, {1.0}};
                      wm::DiagonalGaussian c{{0.0}, {2.0}}, d{{0.0}, {1.0}};
                      return std::abs(wm::kl_divergence(a, b) - 0.5) < 1e-12 &&
                             std::abs(wm::kl_divergence(c, d) - 0.5 * (4.0 - 1.0 - std::log(4.0))) <
                                 1e-12;
                    }});

  suites.push_back({"w2-quantile-integration", [] {
                      Rng rng(42);
                      for (int i = 0; i < 20; ++i) {
                        const double q1 = rng.uniform(-3, 3), q2 = rng.uniform(-3, 3);
                        const double v1 = rng.uniform(0.01, 4), v2 = rng.uniform(0.01, 4);
                        const double closed =
                            safety::w2_distance_gaussian({q1, v1}, {q2, v2});
                        if (std::abs(closed - w2_numeric(q1, v1, q2, v2)) > 1e-6) return false;
                      }
                      return true;
                    }});

  suites.push_back({"tabular-critic-vs-enumeration", [] {
                      Rng rng(7);
                      for (int trial = 0; trial < 5; ++trial) {
                        Rng r = rng.split(trial);
                        auto rc = envs::random_layered_cmdp(r, 6, 3, 0);
                        const auto table = safety::fit_tabular_critic(rc.mdp, rc.policy);
                        const auto exact = envs::exact_cost_distribution(rc.mdp, 0, rc.policy);
                        double q0 = 0.0, m2 = 0.0;
                        for (int a = 0; a < rc.mdp.n_actions; ++a) {
                          const double pa = rc.policy[a];
                          const auto& g = table[a];
                          q0 += pa * g.q_c;
                          m2 += pa * (g.v_c + g.q_c * g.q_c);
                        }
                        const double v0 = m2 - q0 * q0;
                        if (std::abs(q0 - exact.q_c) > 1e-8 || std::abs(v0 - exact.v_c) > 1e-8) {
                          return false;
                        }
                      }
                      return true;
                    }});

  suites.push_back({"metrics-worked-examples", [] {
                      InfractionCounts c;
                      c.ped = 1;
                      c.red = 2;
                      if (std::abs(infraction_score(c) - 0.245) > 1e-12) return false;
                      const std::vector<double> r{0.9, 0.8}, p{1.0, 0.5};
                      if (std::abs(driving_score(r, p) - 0.65) > 1e-12) return false;
                      if (std::abs(collision_occurrences(2, 10.0) - 20.0) > 1e-12) return false;
                      const std::vector<double> ii{2, 1}, kk{10, 5};
                      if (std::abs(infractions_per_km(ii, kk) - 0.2) > 1e-12) return false;
                      const auto ttc = time_to_collision(10.0, 5.0);
                      if (!ttc || std::abs(*ttc - 2.0) > 1e-12) return false;
                      if (time_to_collision(10.0, -1.0)) return false;
                      if (std::abs(collision_rate(2, 10.0) - 0.2) > 1e-12) return false;
                      EpisodeLog l1, l2;
                      l1.route_completion_fraction = 1.0;
                      l2.route_completion_fraction = 0.5;
                      const std::vector<EpisodeLog> logs{l1, l2};
                      return std::abs(route_completion(logs) - 75.0) < 1e-12;
                    }});

  suites.push_back({"bernoulli-cost-moments", [] {
                      // One step: cost 1 w.p. 1/2 -> mean 1/2, variance 1/4.
                      envs::TabularCMDP m;
                      m.n_states = 3;
                      m.n_actions = 1;
                      m.gamma = 1.0 - 1e-12;  // undiscounted one-step chain
                      m.horizon = 0;
                      // From s0: to s1 (which pays 1 then terminates) or straight
                      // to the terminal s2, each w.p. 1/2.
                      m.transition = {0, 0.5, 0.5, 0, 0, 1, 0, 0, 1};
                      m.reward = {0, 0, 0};
                      m.cost = {0, 1, 0};
                      m.terminal = {false, false, true};
                      const envs::TabularPolicy pi{1, 1, 1};
                      const auto exact = envs::exact_cost_distribution(m, 0, pi);
                      return std::abs(exact.q_c - 0.5) < 1e-9 && std::abs(exact.v_c - 0.25) < 1e-9;
                    }});

  int failures = 0;
  for (const auto& suite : suites) {
    bool ok = false;
    try {
      ok = suite.run();
    } catch (const std::exception& ex) {
      out << "FAIL " << suite.name << " (exception: " << ex.what() << ")\n";
      ++failures;
      continue;
    }
    out << (ok ? "PASS " : "FAIL ") << suite.name << "\n";
    if (!ok) ++failures;
  }
  return failures;
}

}  // namespace safenav::harness
