#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "safenav/envs/tabular.hpp"
#include "safenav/nn/adam.hpp"
#include "safenav/safety/critic_nets.hpp"
#include "safenav/safety/distribution.hpp"
#include "safenav/safety/tabular_critic.hpp"
#include "test_util.hpp"

using namespace safenav;
using namespace safenav::safety;

TEST_CASE("standard normal: pdf, cdf, quantile cross-check") {
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-8));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-5, 5);
    CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-6));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("bellman_cost_operator and q_c_target") {
  CHECK(bellman_cost_operator(1.0, 0.9, 2.0) == doctest::Approx(2.8));
  CHECK(bellman_cost_operator(0.7, 0.0, 5.0) == 0.7);
  CHECK(bellman_cost_operator(0.0, 0.9, 0.0) == 0.0);

  // Three-step chain fixed point by hand: 1 + 0.9 + 0.81 = 2.71.
  double q = 0.0;
  for (int i = 0; i < 3; ++i) q = q_c_target(1.0, 0.9, q);
  CHECK(q == doctest::Approx(2.71).epsilon(1e-12));
  CHECK(q_c_target(0.4, 0.99, 0.0) == 0.4);  // terminal: no bootstrap
  CHECK(q_c_target(0.0, 1.0, 0.0) == 0.0);
}

TEST_CASE("v_c_target: values and the projection-clamp counter") {
  CHECK(v_c_target(0.0, 0.9, 0.0, 0.0, 0.0, 0.0) == 0.0);
  // Deterministic chain: E[Q'^2] = (E[Q'])^2 and V' = 0 give V = 0.
  CHECK(v_c_target(1.0, 0.9, 2.71, 1.9, 0.0, 1.9 * 1.9) == doctest::Approx(0.0).epsilon(1e-12));
  // Bernoulli start state: c = 0 charged on (s,a)?  Direct formula check:
  // Q = 0.5, E[Q'] = 0.5 over the two cost branches with gamma = 1 collapses
  // to variance 0.25 when the branch cost enters through E[Q'^2]:
  //   V = 0 - 0.25 + 0 + 0 + 0.5  (E[Q'^2] = 0.5*1 + 0.5*0)
  CHECK(v_c_target(0.0, 1.0, 0.5, 0.5, 0.0, 0.5) == doctest::Approx(0.25).epsilon(1e-12));

  reset_v_c_projection_clamps();
  CHECK(v_c_target(0.0, 1.0, 10.0, 0.0, 0.0, 0.0) == 0.0);  // -100 before clamp
  CHECK(v_c_projection_clamps() == 1);
  CHECK(v_c_target(0.0, 1.0, 1e-4, 0.0, 0.0, 0.0) == 0.0);  // within tolerance
  CHECK(v_c_projection_clamps() == 1);
  reset_v_c_projection_clamps();
}

TEST_CASE("w2_distance_gaussian: pinned values and metric axioms") {
  const GaussianCostDistribution a(1.0, 4.0), b(0.0, 1.0), c(0.0, 9.0);
  CHECK(w2_distance_gaussian(a, a) == 0.0);
  CHECK(w2_distance_gaussian(a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(w2_distance_gaussian(c, b) == doctest::Approx(2.0).epsilon(1e-12));
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const GaussianCostDistribution x(rng.uniform(-5, 5), rng.uniform(0, 9));
    const GaussianCostDistribution y(rng.uniform(-5, 5), rng.uniform(0, 9));
    const GaussianCostDistribution z(rng.uniform(-5, 5), rng.uniform(0, 9));
    const double dxy = w2_distance_gaussian(x, y);
    CHECK(dxy >= 0.0);
    CHECK(dxy == w2_distance_gaussian(y, x));
    CHECK(w2_distance_gaussian(x, x) == 0.0);
    CHECK(w2_distance_gaussian(x, z) <= dxy + w2_distance_gaussian(y, z) + 1e-12);
  }
}

TEST_CASE("cvar: pinned values, dominance, monotonicity, alpha domain") {
  CHECK(cvar(3.0, 0.0, 0.3) == 3.0);
  CHECK(cvar(1.0, 4.0, 0.5) == doctest::Approx(2.5957691).epsilon(1e-7));
  CHECK(cvar(0.0, 1.0, 0.1) == doctest::Approx(1.7549833).epsilon(1e-7));
  CHECK_THROWS_AS(cvar(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(cvar(0.0, 1.0, 1.0), std::invalid_argument);

  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    const double q = rng.uniform(-3, 3), v = rng.uniform(0, 5);
    const double alpha = rng.uniform(0.02, 0.98);
    CHECK(cvar(q, v, alpha) >= q);
    if (v > 1e-9) {
      CHECK(cvar(q, v, alpha) > q);
      CHECK(cvar(q, v, alpha) > cvar(q, v, std::min(alpha + 0.01, 0.99)));
    }
  }
  CHECK(cvar(1.5, 2.0, 0.999999) == doctest::Approx(1.5).epsilon(1e-2));
}

TEST_CASE("cvar matches the worst-alpha-tail mean of 1e6 Gaussian samples") {
  Rng rng(99);
  for (int trial = 0; trial < 3; ++trial) {
    const double q = rng.uniform(-2, 2), v = rng.uniform(0.5, 4);
    const double alpha = rng.uniform(0.1, 0.6);
    const int n = 1000000;
    std::vector<double> samples(n);
    const double sd = std::sqrt(v);
    for (auto& s : samples) s = q + sd * rng.gaussian();
    const int k = static_cast<int>(alpha * n);
    std::nth_element(samples.begin(), samples.end() - k, samples.end());
    double tail = 0.0;
    for (int i = n - k; i < n; ++i) tail += samples[i];
    tail /= k;
    CHECK(tail == doctest::Approx(cvar(q, v, alpha)).epsilon(0.01));
  }
}

TEST_CASE("fit_tabular_critic matches exact enumeration on random CMDPs") {
  Rng rng(21);
  for (int trial = 0; trial < 4; ++trial) {
    const auto rc = envs::random_layered_cmdp(rng, 6, 3, 0);
    const auto table = fit_tabular_critic(rc.mdp, rc.policy);
    const auto exact = envs::exact_cost_distribution(rc.mdp, 0, rc.policy);
    // Policy mixture at s0 = 0.
    double q0 = 0.0, second = 0.0;
    for (int a = 0; a < rc.mdp.n_actions; ++a) {
      const double p = rc.policy[a];
      const auto& g = table[a];
      q0 += p * g.q_c;
      second += p * (g.v_c + g.q_c * g.q_c);
    }
    CHECK(q0 == doctest::Approx(exact.q_c).epsilon(1e-8));
    CHECK(second - q0 * q0 == doctest::Approx(exact.v_c).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("export_critic_csv writes one labeled row per (s,a)") {
  Rng rng(2);
  const auto rc = envs::random_layered_cmdp(rng, 4, 2, 0);
  const auto table = fit_tabular_critic(rc.mdp, rc.policy);
  const std::string path = "/tmp/safenav_test_critic.csv";
  export_critic_csv(table, rc.mdp, 0.5, path);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "s,a,q_c,v_c,cvar");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == rc.mdp.n_states * rc.mdp.n_actions);
  std::remove(path.c_str());
}

TEST_CASE("safety nets: variance floor, cvar consistency, targets start equal") {
  SafetyCriticNets nets(3, 2, {8});
  nn::ParamStore store;
  nets.init(store, Rng(5));
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    Vec f{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Vec a{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    CHECK(nets.v(store, f, a) > 0.0);
    CHECK(nets.q(store, f, a) == nets.q_target(store, f, a));
    CHECK(nets.v(store, f, a) == nets.v_target(store, f, a));
    CHECK(nets.gamma_value(store, f, a, 0.4) ==
          doctest::Approx(cvar(nets.q(store, f, a), nets.v(store, f, a), 0.4)).epsilon(1e-12));
  }
}

TEST_CASE("critic_losses: zero-TD batch gives zero loss when targets equal online") {
  SafetyCriticNets nets(2, 1, {6});
  nn::ParamStore store;
  nets.init(store, Rng(9));
  std::vector<SafetyTransition> batch;
  Rng rng(10);
  for (int i = 0; i < 8; ++i) {
    SafetyTransition tr;
    tr.state = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    tr.action = {rng.uniform(-1, 1)};
    tr.cost = 0.0;
    tr.next_state = tr.state;  // self-loop with gamma = 1: exact fixed point
    tr.next_action = tr.action;
    tr.done = false;
    batch.push_back(tr);
  }
  const auto loss = critic_losses(batch, nets, store, 1.0);
  CHECK(loss.j_c == doctest::Approx(0.0).epsilon(1e-18));
  CHECK(loss.j_v == doctest::Approx(0.0).epsilon(1e-18));
}

TEST_CASE("critic_losses: gradients match finite differences, targets frozen") {
  SafetyCriticNets nets(2, 1, {5});
  nn::ParamStore store;
  nets.init(store, Rng(13));
  // Desynchronize targets so the TD errors are nonzero.
  Rng rng(14);
  for (const auto& name : store.names()) {
    if (name.find("_target.") == std::string::npos) continue;
    for (auto& v : store.values(name)) v += rng.uniform(-0.3, 0.3);
  }
  std::vector<SafetyTransition> batch;
  for (int i = 0; i < 6; ++i) {
    SafetyTransition tr;
    tr.state = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    tr.action = {rng.uniform(-1, 1)};
    tr.cost = rng.uniform(0, 1);
    tr.next_state = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    tr.next_action = {rng.uniform(-1, 1)};
    tr.done = i % 3 == 0;
    batch.push_back(tr);
  }
  const auto loss = critic_losses(batch, nets, store, 0.95);
  CHECK(loss.j_c > 0.0);
  for (const auto& [name, _] : loss.grads) {
    CHECK(name.find("_target.") == std::string::npos);  // targets frozen
  }
  auto loss_fn = [&]() {
    const auto l = critic_losses(batch, nets, store, 0.95);
    return l.j_c + l.j_v;
  };
  CHECK(testutil::max_grad_rel_error(store, loss.grads, loss_fn) < 1e-4);
}

TEST_CASE("critic_losses: training on a deterministic bandit converges to (c, 0)") {
  SafetyCriticNets nets(1, 1, {8});
  nn::ParamStore store;
  nets.init(store, Rng(17));
  nn::Adam opt(3e-3);
  std::vector<SafetyTransition> batch;
  SafetyTransition tr;
  tr.state = {0.0};
  tr.action = {0.0};
  tr.cost = 0.7;
  tr.next_state = {0.0};
  tr.next_action = {0.0};
  tr.done = true;
  batch.assign(8, tr);
  for (int it = 0; it < 3000; ++it) {
    const auto loss = critic_losses(batch, nets, store, 0.0);
    opt.step(store, loss.grads);
    nets.polyak(store, 0.05);
  }
  CHECK(nets.q(store, {0.0}, {0.0}) == doctest::Approx(0.7).epsilon(0.01));
  CHECK(nets.v(store, {0.0}, {0.0}) < 0.01);
}
