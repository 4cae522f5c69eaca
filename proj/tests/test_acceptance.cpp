// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Exit code is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "safenav/agent/trainer.hpp"
#include "safenav/envs/tabular.hpp"
#include "safenav/harness/config.hpp"
#include "safenav/harness/eval.hpp"
#include "safenav/harness/metrics.hpp"
#include "safenav/safety/tabular_critic.hpp"
#include "test_util.hpp"

namespace {

using namespace safenav;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Policy-mixture moments at state s from a per-(s,a) critic table.
envs::CostMoments mixture_moments(const safety::CriticTable& table, const envs::TabularCMDP& mdp,
                                  const envs::TabularPolicy& policy, int s) {
  double q = 0.0, m2 = 0.0;
  for (int a = 0; a < mdp.n_actions; ++a) {
    const auto& g = table[static_cast<std::size_t>(s * mdp.n_actions + a)];
    const double pi = policy[static_cast<std::size_t>(s * mdp.n_actions + a)];
    q += pi * g.q_c;
    m2 += pi * (g.v_c + g.q_c * g.q_c);
  }
  return {q, m2 - q * q};
}

// ---------------------------------------------------------------------------
// 1. fit_tabular_critic vs exact enumeration on 25 random CMDPs.
bool criterion1(std::string& msg) {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 25; ++i) {
    Rng r = rng.split(static_cast<std::uint64_t>(i));
    const auto [mdp, policy] = envs::random_layered_cmdp(r, 6, 3, 6);
    const auto table = safety::fit_tabular_critic(mdp, policy);
    for (int s = 0; s < mdp.n_states; ++s) {
      if (mdp.terminal[static_cast<std::size_t>(s)]) continue;
      const auto exact = envs::exact_cost_distribution(mdp, s, policy);
      const auto fitted = mixture_moments(table, mdp, policy, s);
      worst = std::max({worst, std::abs(exact.q_c - fitted.q_c), std::abs(exact.v_c - fitted.v_c)});
    }
  }
  const double dt = seconds_since(t0);
  msg = "sup-norm " + fmt(worst) + " over 25 CMDPs, " + fmt(dt) + " s";
  return worst <= 1e-8 && dt < 10.0;
}

// ---------------------------------------------------------------------------
// 2. Closed-form CVaR vs worst-alpha-tail Monte Carlo.
bool criterion2(std::string& msg) {
  const auto t0 = Clock::now();
  if (std::abs(safety::cvar(1.0, 4.0, 0.5) - 2.5957691) > 1e-6 ||
      std::abs(safety::cvar(0.0, 1.0, 0.1) - 1.7549833) > 1e-6) {
    msg = "pinned closed-form values off";
    return false;
  }
  Rng rng(202);
  const std::size_t n = 1000000;
  std::vector<double> samples(n);
  double worst_rel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng r = rng.split(static_cast<std::uint64_t>(trial));
    const double q = r.uniform(0.0, 3.0);
    const double v = r.uniform(0.25, 4.0);
    const double alpha = r.uniform(0.05, 0.95);
    const double sd = std::sqrt(v);
    for (double& s : samples) s = q + sd * r.gaussian();
    const auto k = static_cast<std::size_t>(alpha * static_cast<double>(n));
    std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k),
                     samples.end(), std::greater<>());
    const double tail =
        std::accumulate(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
        static_cast<double>(k);
    const double closed = safety::cvar(q, v, alpha);
    worst_rel = std::max(worst_rel, std::abs(closed - tail) / std::abs(tail));
  }
  const double dt = seconds_since(t0);
  msg = "worst rel. error " + fmt(worst_rel) + " over 100 triples x 1e6 samples, " + fmt(dt) + " s";
  return worst_rel <= 0.01 && dt < 30.0;
}

// ---------------------------------------------------------------------------
// 3. W2 closed form vs quantile-function integration + metric axioms.
bool criterion3(std::string& msg) {
  // Integral over u of (F1^-1(u) - F2^-1(u))^2 after substituting u = Phi(z):
  // simpson over z of (dq + dsd*z)^2 phi(z).
  auto w2_numeric = [](double q1, double v1, double q2, double v2) {
    const double dq = q1 - q2, dsd = std::sqrt(v1) - std::sqrt(v2);
    const int n = 40000;  // even
    const double lo = -10.0, hi = 10.0, h = (hi - lo) / n;
    auto f = [&](double z) {
      const double d = dq + dsd * z;
      return d * d * safety::normal_pdf(z);
    };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) acc += f(lo + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
    return std::sqrt(acc * h / 3.0);
  };
  Rng rng(303);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Rng r = rng.split(static_cast<std::uint64_t>(i));
    const safety::GaussianCostDistribution a{r.uniform(-3.0, 3.0), r.uniform(0.0, 4.0)};
    const safety::GaussianCostDistribution b{r.uniform(-3.0, 3.0), r.uniform(0.0, 4.0)};
    worst = std::max(worst, std::abs(safety::w2_distance_gaussian(a, b) -
                                     w2_numeric(a.q_c, a.v_c, b.q_c, b.v_c)));
  }
  if (worst > 1e-6) {
    msg = "quantile-integration mismatch " + fmt(worst);
    return false;
  }
  Rng ax(304);
  for (int i = 0; i < 1000; ++i) {
    Rng r = ax.split(static_cast<std::uint64_t>(i));
    const safety::GaussianCostDistribution x{r.uniform(-3.0, 3.0), r.uniform(0.0, 4.0)};
    const safety::GaussianCostDistribution y{r.uniform(-3.0, 3.0), r.uniform(0.0, 4.0)};
    const safety::GaussianCostDistribution z{r.uniform(-3.0, 3.0), r.uniform(0.0, 4.0)};
    const double dxy = safety::w2_distance_gaussian(x, y);
    const double dyx = safety::w2_distance_gaussian(y, x);
    const double dxz = safety::w2_distance_gaussian(x, z);
    const double dzy = safety::w2_distance_gaussian(z, y);
    const bool ok = dxy >= 0.0 && dxy == dyx && safety::w2_distance_gaussian(x, x) == 0.0 &&
                    dxy <= dxz + dzy + 1e-12;
    if (!ok) {
      msg = "metric axiom violated at triple " + std::to_string(i);
      return false;
    }
  }
  msg = "integration error " + fmt(worst) + ", axioms hold on 1000 triples";
  return true;
}

// ---------------------------------------------------------------------------
// 4. Finite-difference integrity of every loss.
bool criterion4(std::string& msg) {
  const auto t0 = Clock::now();
  const std::size_t feat_dim = 3, act_dim = 2;
  double worst = 0.0;
  auto note = [&](double err) { worst = std::max(worst, err); };

  {  // J_C + J_V
    safety::SafetyCriticNets nets(feat_dim, act_dim, {8}, "acc_s");
    nn::ParamStore store;
    nets.init(store, Rng(41));
    Rng jitter(42);
    for (const auto& name : store.names()) {
      if (name.find("_target") == std::string::npos) continue;
      for (double& w : store.values(name)) w += 0.05 * jitter.gaussian();
    }
    Rng mk(43);
    std::vector<safety::SafetyTransition> batch;
    for (int i = 0; i < 6; ++i) {
      Vec s(feat_dim), s2(feat_dim), a(act_dim), a2(act_dim);
      for (double& x : s) x = mk.gaussian();
      for (double& x : s2) x = mk.gaussian();
      for (double& x : a) x = std::tanh(mk.gaussian());
      for (double& x : a2) x = std::tanh(mk.gaussian());
      batch.push_back({s, a, mk.uniform(0.0, 1.0), s2, a2, i % 3 == 0});
    }
    const auto loss = safety::critic_losses(batch, nets, store, 0.97);
    note(testutil::max_grad_rel_error(store, loss.grads, [&] {
      const auto l = safety::critic_losses(batch, nets, store, 0.97);
      return l.j_c + l.j_v;
    }));
  }
  {  // J_R
    agent::RewardCritics critics(feat_dim, act_dim, {8});
    agent::PolicyNet policy(feat_dim, act_dim, {8});
    nn::ParamStore store;
    critics.init(store, Rng(44));
    policy.init(store, Rng(45));
    Rng mk(46);
    std::vector<agent::RewardTransition> batch;
    for (int i = 0; i < 5; ++i) {
      Vec s(feat_dim), s2(feat_dim), a(act_dim);
      for (double& x : s) x = mk.gaussian();
      for (double& x : s2) x = mk.gaussian();
      for (double& x : a) x = std::tanh(mk.gaussian());
      batch.push_back({s, a, mk.uniform(-1.0, 1.0), s2, i == 2});
    }
    const auto grads = [&] {
      Rng r(24);
      return agent::reward_critic_loss(batch, critics, policy, store, 0.2, 0.97, r);
    }();
    note(testutil::max_grad_rel_error(store, grads.grads, [&] {
      Rng r(24);
      return agent::reward_critic_loss(batch, critics, policy, store, 0.2, 0.97, r).loss;
    }));
  }
  {  // J_pi with an active CVaR hinge, and the barrier penalty
    agent::RewardCritics critics(feat_dim, act_dim, {8});
    agent::PolicyNet policy(feat_dim, act_dim, {8});
    safety::SafetyCriticNets nets(feat_dim, act_dim, {8}, "acc_p");
    nn::ParamStore store;
    critics.init(store, Rng(47));
    policy.init(store, Rng(48));
    nets.init(store, Rng(49));
    // Shift the safety mean head so Gamma > 0 and the hinge is active.
    {
      std::string last;
      for (const auto& name : store.names_with_prefix("acc_p_q.b")) {
        if (name.find("_target") == std::string::npos && (last.empty() || name > last)) last = name;
      }
      for (double& x : store.values(last)) x += 2.0;
    }
    Rng mk(50);
    std::vector<Vec> feats;
    for (int i = 0; i < 5; ++i) {
      Vec s(feat_dim);
      for (double& x : s) x = mk.gaussian();
      feats.push_back(s);
    }
    const agent::Multipliers mult{0.2, 0.7, 0.5};
    const auto ploss = [&] {
      Rng r(31);
      return agent::policy_loss(feats, policy, critics, &nets, mult, 0.0, 0.5, store, r);
    }();
    note(testutil::max_grad_rel_error(store, ploss.grads, [&] {
      Rng r(31);
      return agent::policy_loss(feats, policy, critics, &nets, mult, 0.0, 0.5, store, r).loss;
    }));
    const auto bloss = [&] {
      Rng r(32);
      return agent::imagined_barrier_penalty(feats, policy, nets, 0.5, 0.1, 1, store, r);
    }();
    note(testutil::max_grad_rel_error(store, bloss.grads, [&] {
      Rng r(32);
      return agent::imagined_barrier_penalty(feats, policy, nets, 0.5, 0.1, 1, store, r).penalty;
    }));
  }
  {  // J_e analogue: scalar derivative in beta
    const std::vector<double> logp{-1.2, -0.4, 0.3, -2.0};
    const double floor = 0.7, beta = 0.35;
    const double mean =
        std::accumulate(logp.begin(), logp.end(), 0.0) / static_cast<double>(logp.size());
    const double analytic = -(mean + floor);
    const double h = 1e-6;
    const double fd = (agent::entropy_multiplier_loss(beta + h, logp, floor) -
                       agent::entropy_multiplier_loss(beta - h, logp, floor)) /
                      (2.0 * h);
    note(std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-4}));
  }
  {  // world model + denoiser
    wm::WorldModel model(wm::WorldModelSpec{feat_dim, act_dim, 4, 3, 6});
    nn::ParamStore store;
    model.init(store, Rng(51));
    Rng mk(52);
    Episode ep;
    for (int t = 0; t < 6; ++t) {
      Vec o(feat_dim), a(act_dim);
      for (double& x : o) x = mk.gaussian();
      for (double& x : a) x = std::tanh(mk.gaussian());
      ep.steps.push_back({o, a, mk.uniform(-1.0, 1.0), mk.uniform(0.0, 0.5), t == 5, false});
    }
    const std::vector<SequenceWindow> batch{{&ep, 0, 4}, {&ep, 2, 4}};
    const auto wloss = [&] {
      Rng r(11);
      return model.world_model_loss(batch, store, r);
    }();
    note(testutil::max_grad_rel_error(store, wloss.grads, [&] {
      Rng r(11);
      return model.world_model_loss(batch, store, r).total;
    }));
    std::vector<Vec> z_clean, ctx;
    for (int i = 0; i < 4; ++i) {
      Vec z(3), h(4);
      for (double& x : z) x = mk.gaussian();
      for (double& x : h) x = std::tanh(mk.gaussian());
      z_clean.push_back(z);
      ctx.push_back(h);
    }
    const auto sched = wm::DiffusionSchedule::linear(4);
    const auto dloss = [&] {
      Rng r(12);
      return model.denoiser_loss(z_clean, ctx, sched, store, r);
    }();
    note(testutil::max_grad_rel_error(store, dloss.grads, [&] {
      Rng r(12);
      return model.denoiser_loss(z_clean, ctx, sched, store, r).loss;
    }));
  }
  const double dt = seconds_since(t0);
  msg = "worst FD relative error " + fmt(worst) + ", " + fmt(dt) + " s";
  return worst <= 1e-4 && dt < 60.0;
}

// ---------------------------------------------------------------------------
// 5. Bit-for-bit SAC reduction over 100 epochs.
agent::TrainConfig small_cfg() {
  agent::TrainConfig c;
  c.h_dim = 8;
  c.z_dim = 4;
  c.hidden = 8;
  c.batch = 4;
  c.seq_len = 4;
  c.imagine_horizon = 4;
  c.seed_episodes = 2;
  c.diffusion_k = 2;
  c.diffusion_steps = 2;
  c.epochs = 100;
  c.seed = 9;
  c.use_screening = false;
  c.use_barrier = false;
  return c;
}

envs::NavWorldConfig small_env() {
  auto ec = envs::nav_preset("hazard-grid");
  ec.time_limit = 40;
  return ec;
}

bool criterion5(std::string& msg) {
  agent::TrainConfig ca = small_cfg();  // constrained path, multipliers pinned to zero
  ca.constrain_policy = true;
  ca.kappa_init = 0.0;
  ca.lr_kappa = 0.0;
  ca.rho = 0.0;
  agent::TrainConfig cb = small_cfg();  // plain-SAC ablation
  cb.constrain_policy = false;
  cb.rho = 0.0;

  envs::NavWorld env_a(small_env()), env_b(small_env());
  agent::Agent a(env_a.obs_dim(), 2, ca), b(env_b.obs_dim(), 2, cb);
  a.init();
  b.init();
  ReplayBuffer buf_a(ca.replay_capacity), buf_b(cb.replay_capacity);
  agent::seed_buffer(buf_a, env_a, ca.seed_episodes, Rng(ca.seed).split("seed_episodes"));
  agent::seed_buffer(buf_b, env_b, cb.seed_episodes, Rng(cb.seed).split("seed_episodes"));
  for (int e = 0; e < 100; ++e) {
    agent::train_epoch(a, buf_a, env_a, e);
    agent::train_epoch(b, buf_b, env_b, e);
  }
  for (const auto& name : a.store().names()) {
    if (name == "mult.kappa") continue;  // bookkeeping slot, zero vs absent semantics match
    const Vec& va = a.store().values(name);
    const Vec& vb = b.store().values(name);
    for (std::size_t i = 0; i < va.size(); ++i) {
      if (va[i] != vb[i]) {
        msg = "divergence in " + name + "[" + std::to_string(i) + "]";
        return false;
      }
    }
  }
  if (a.multipliers().kappa != 0.0) {
    msg = "kappa drifted from zero";
    return false;
  }
  msg = "all parameters identical after 100 epochs";
  return true;
}

// ---------------------------------------------------------------------------
// 6 + 7. Constrained-training outcome and barrier enforcement share the two
// trained agents.
struct TrainedPair {
  agent::Agent safe;
  agent::Agent unconstrained;
  ReplayBuffer buf_safe;
  ReplayBuffer buf_unc;
  double safe_cost = 0.0, safe_return = 0.0;
  double unc_cost = 0.0, unc_return = 0.0;
  double train_seconds = 0.0;
};

agent::TrainConfig hazard_cfg(bool constrained) {
  agent::TrainConfig c;
  c.h_dim = 16;
  c.z_dim = 4;
  c.hidden = 16;
  c.batch = 8;
  c.seq_len = 8;
  c.imagine_horizon = 6;
  c.replay_behavior = true;
  c.epochs = 300;
  c.updates_per_epoch = 48;
  c.seed_episodes = 10;
  c.seed = 3;
  c.diffusion_k = 4;
  c.diffusion_steps = 3;
  c.tau = 0.05;
  c.lr_reward = 1e-3;
  c.lr_policy = 1e-3;
  c.reward_scale = 0.05;
  c.beta_init = 0.05;
  c.explore_noise_start = 0.3;
  c.explore_noise_end = 0.05;
  c.budget.d = 0.5;
  c.gamma = 0.99;
  c.use_screening = false;  // keep behavior data on-distribution for this small budget
  if (constrained) {
    c.barrier_weight = 0.3;
  } else {
    c.constrain_policy = false;
    c.use_barrier = false;
  }
  return c;
}

TrainedPair train_pair() {
  const auto t0 = Clock::now();
  const agent::TrainConfig cs = hazard_cfg(true), cu = hazard_cfg(false);
  envs::NavWorld env_s(envs::nav_preset("hazard-grid")), env_u(envs::nav_preset("hazard-grid"));
  TrainedPair out{agent::Agent(env_s.obs_dim(), 2, cs), agent::Agent(env_u.obs_dim(), 2, cu),
                  ReplayBuffer(cs.replay_capacity), ReplayBuffer(cu.replay_capacity)};
  out.safe.init();
  out.unconstrained.init();
  agent::seed_buffer(out.buf_safe, env_s, cs.seed_episodes, Rng(cs.seed).split("seed_episodes"));
  agent::seed_buffer(out.buf_unc, env_u, cu.seed_episodes, Rng(cu.seed).split("seed_episodes"));
  double sc = 0.0, sr = 0.0, uc = 0.0, ur = 0.0;
  for (int e = 0; e < cs.epochs; ++e) {
    const auto ss = agent::train_epoch(out.safe, out.buf_safe, env_s, e);
    const auto su = agent::train_epoch(out.unconstrained, out.buf_unc, env_u, e);
    if (e >= cs.epochs - 50) {
      sc += ss.ep_discounted_cost;
      sr += ss.ep_return;
      uc += su.ep_discounted_cost;
      ur += su.ep_return;
    }
  }
  out.safe_cost = sc / 50.0;
  out.safe_return = sr / 50.0;
  out.unc_cost = uc / 50.0;
  out.unc_return = ur / 50.0;
  out.train_seconds = seconds_since(t0);
  return out;
}

bool criterion6(const TrainedPair& p, std::string& msg) {
  const double d = 0.5;
  msg = "safe cost " + fmt(p.safe_cost) + " (budget+0.1 = " + fmt(d + 0.1) + "), safe return " +
        fmt(p.safe_return) + " vs unconstrained " + fmt(p.unc_return) + ", unconstrained cost " +
        fmt(p.unc_cost) + " (2x budget = " + fmt(2.0 * d) + "), " + fmt(p.train_seconds) + " s";
  return p.safe_cost <= d + 0.1 && p.safe_return >= 0.8 * p.unc_return &&
         p.unc_cost >= 2.0 * d && p.train_seconds < 900.0;
}

// Fraction of imagined (t, t+m) pairs violating the barrier decrease.
// Rollouts start from windows of fresh on-policy episodes. The constrained
// agent imagines through its barrier screen (diffusion candidates filtered
// by the decrease condition); the ablation imagines unscreened.
double barrier_violation_fraction(const agent::Agent& ag, bool screened) {
  const agent::TrainConfig& cfg = ag.config();
  const auto& model = ag.world_model();
  const nn::ParamStore& store = ag.store();
  envs::NavWorld env(envs::nav_preset("hazard-grid"));
  ReplayBuffer buf(cfg.replay_capacity);
  for (int i = 0; i < 20; ++i) {
    auto run = agent::run_episode(ag, env, 5000 + static_cast<std::uint64_t>(i),
                                  Rng(700 + static_cast<std::uint64_t>(i)), 0.05, false);
    buf.push_episode(std::move(run.episode));
  }
  Rng rng(606);
  Rng dummy(0);
  int violated = 0, total = 0;
  const int m = cfg.budget.barrier_degree_m;
  const double decay = cfg.budget.barrier_decay;
  const int screen_k = 256;
  for (int trial = 0; trial < 50; ++trial) {
    Rng r = rng.split(static_cast<std::uint64_t>(trial));
    const auto win = buf.sample_sequence_batch(1, cfg.seq_len, r.split("win").seed())[0];
    Vec h(cfg.h_dim, 0.0);
    Vec z;
    for (std::size_t t = 0; t < win.length; ++t) {
      z = model.posterior(store, win.step(t).observation, h).mean;
      if (t + 1 < win.length) h = model.recurrent_step(store, h, z, win.step(t).action);
    }
    auto policy_fn = [&](const Vec& dec_obs, const Vec& zz, Rng& rr) {
      return ag.policy().sample(store, ag.features(dec_obs, zz), true, rr).action;
    };
    const wm::LatentState start{h, z};
    const auto traj =
        screened ? agent::imagine_screened(ag, start, policy_fn, 10, screen_k, r.split("roll"))
                 : model.imagine(store, start, policy_fn, 10, r.split("roll"));
    std::vector<double> gammas;
    for (const auto& step : traj) {
      const Vec feat = ag.features(step.decoded_obs, step.state.z);
      const Vec act = ag.policy().sample(store, feat, true, dummy).action;
      gammas.push_back(ag.safety_critic().gamma_value(store, feat, act, cfg.budget.alpha));
    }
    for (std::size_t t = 0; t + static_cast<std::size_t>(m) < gammas.size(); ++t) {
      ++total;
      if (!agent::barrier_check(gammas[t], gammas[t + static_cast<std::size_t>(m)], decay)) {
        ++violated;
      }
    }
  }
  return static_cast<double>(violated) / static_cast<double>(total);
}

bool criterion7(const TrainedPair& p, std::string& msg) {
  const double safe_frac = barrier_violation_fraction(p.safe, true);
  const double unc_frac = barrier_violation_fraction(p.unconstrained, false);
  msg = "violation fraction safe " + fmt(safe_frac) + " (<= 0.05), unconstrained " +
        fmt(unc_frac) + " (>= 0.25)";
  return safe_frac <= 0.05 && unc_frac >= 0.25;
}

// ---------------------------------------------------------------------------
// 8. select_candidate vs brute force on 1e4 random candidate sets.
bool criterion8(std::string& msg) {
  Rng rng(808);
  for (int trial = 0; trial < 10000; ++trial) {
    Rng r = rng.split(static_cast<std::uint64_t>(trial));
    const std::size_t k = 1 + r.below(8);
    std::vector<Vec> cands(k);
    std::vector<double> qs(k), gs(k);
    for (std::size_t i = 0; i < k; ++i) {
      cands[i] = Vec{static_cast<double>(i)};
      // Coarse grid so exact ties occur regularly.
      qs[i] = std::floor(r.uniform(-2.0, 2.0) * 4.0) / 4.0;
      gs[i] = std::floor(r.uniform(-1.0, 3.0) * 4.0) / 4.0;
    }
    const double budget = std::floor(r.uniform(-0.5, 2.0) * 4.0) / 4.0;
    auto q_of = [&](const Vec& zc) { return qs[static_cast<std::size_t>(zc[0])]; };
    auto g_of = [&](const Vec& zc) { return gs[static_cast<std::size_t>(zc[0])]; };
    std::size_t expect = 0;
    bool any_safe = false;
    for (std::size_t i = 0; i < k; ++i) {
      const bool safe = gs[i] <= budget;
      if (safe && !any_safe) {
        any_safe = true;
        expect = i;
      } else if (safe && any_safe && qs[i] > qs[expect]) {
        expect = i;
      } else if (!any_safe && gs[i] < gs[expect]) {
        expect = i;
      }
    }
    const std::size_t got = wm::select_candidate(cands, q_of, g_of, budget);
    if (got != expect) {
      msg = "disagreement at trial " + std::to_string(trial);
      return false;
    }
  }
  msg = "100% agreement on 10000 candidate sets";
  return true;
}

// ---------------------------------------------------------------------------
// 9. Metrics arithmetic on the worked examples.
bool criterion9(std::string& msg) {
  using namespace harness;
  bool ok = true;
  ok &= infraction_score({1, 0, 0, 2}) == 0.5 * 0.7 * 0.7;
  ok &= infraction_score({0, 0, 0, 0}) == 1.0;
  {
    const std::vector<double> rc{0.9, 0.8}, is{1.0, 0.5};
    ok &= driving_score(rc, is) == (0.9 * 1.0 + 0.8 * 0.5) / 2.0;
  }
  {
    EpisodeLog a;
    a.route_completion_fraction = 1.0;
    a.off_route_distance_m = 20.0;
    const std::vector<EpisodeLog> logs{a};
    ok &= route_completion(logs) == 80.0;
    EpisodeLog b;
    b.route_completion_fraction = 0.75;
    const std::vector<EpisodeLog> logs2{b};
    ok &= route_completion(logs2) == 75.0;
  }
  ok &= collision_occurrences(1, 3.0) == 100.0 / 3.0;
  {
    const std::vector<double> inf{2.0, 1.0}, km{1.0, 2.0};
    ok &= infractions_per_km(inf, km) == 1.0;
  }
  ok &= time_to_collision(10.0, 2.0).value() == 5.0;
  ok &= !time_to_collision(10.0, -1.0).has_value();
  ok &= !time_to_collision(10.0, 0.0).has_value();
  ok &= collision_rate(2, 4.0) == 0.5;
  msg = ok ? "all worked examples exact" : "a worked example diverged";
  return ok;
}

// ---------------------------------------------------------------------------
// 10. Robustness trend with the shipped checkpoints.
bool criterion10(std::string& msg) {
  const auto t0 = Clock::now();
  const std::string assets = SAFENAV_ASSETS_DIR;
  auto load = [&](const std::string& stem) {
    const auto cm = harness::parse_config_file(assets + "/" + stem + ".ini");
    const agent::TrainConfig cfg = harness::train_config_from(cm);
    envs::NavWorld env(envs::nav_preset("dynamic-1"));
    agent::Agent ag(env.obs_dim(), 2, cfg);
    ag.init();
    ag.load(assets + "/" + stem + ".bin");
    return ag;
  };
  const agent::Agent safe = load("safe_dynamic");
  const agent::Agent unc = load("unconstrained_dynamic");
  const auto rows_safe = harness::sweep_variant(safe, "safe", 100, 77);
  const auto rows_unc = harness::sweep_variant(unc, "unconstrained", 100, 77);
  std::ostringstream detail;
  bool ok = true;
  for (std::size_t i = 0; i < rows_safe.size(); ++i) {
    detail << " v" << rows_safe[i].obstacle_speed << ": " << rows_safe[i].fail_rate << " vs "
           << rows_unc[i].fail_rate;
    if (i > 0 && rows_safe[i].fail_rate < rows_safe[i - 1].fail_rate) ok = false;
    if (!(rows_safe[i].fail_rate < rows_unc[i].fail_rate)) ok = false;
  }
  const double dt = seconds_since(t0);
  msg = "fail rates (safe vs unconstrained):" + detail.str() + ", " + fmt(dt) + " s";
  return ok && dt < 600.0;
}

// ---------------------------------------------------------------------------
// 11. Byte-identical logs + checkpoints across two CLI runs.
std::string slurp_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool criterion11(std::string& msg) {
  namespace fs = std::filesystem;
  const fs::path work = fs::temp_directory_path() / "safenav_acceptance_c11";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path cfg_path = work / "train.ini";
  {
    std::ofstream cfg(cfg_path);
    cfg << "[env]\nscenario = hazard-grid\n[model]\nh_dim = 8\nz_dim = 4\nhidden = 8\n"
        << "diffusion_k = 2\ndiffusion_steps = 2\n[train]\nepochs = 8\nbatch = 4\nseq_len = 4\n"
        << "imagine_horizon = 4\nseed_episodes = 2\nseed = 12\nreplay_behavior = true\n";
  }
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + SAFENAV_CLI_PATH + "\" train --config " +
                            cfg_path.string() + " --out " + (work / run).string() +
                            " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      msg = std::string("CLI train run ") + run + " failed";
      return false;
    }
  }
  for (const char* file : {"train_log.jsonl", "checkpoint_final.bin"}) {
    const auto a = slurp_bytes((work / "a" / file).string());
    const auto b = slurp_bytes((work / "b" / file).string());
    if (a.empty() || a != b) {
      msg = std::string(file) + (a.empty() ? " missing/empty" : " differs between runs");
      return false;
    }
  }
  msg = "train_log.jsonl and checkpoint_final.bin byte-identical";
  return true;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const char* title, const std::function<bool(std::string&)>& fn) {
    std::string msg;
    bool ok = false;
    try {
      ok = fn(msg);
    } catch (const std::exception& ex) {
      msg = std::string("exception: ") + ex.what();
    }
    std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", n, title, msg.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  };

  report(1, "tabular critic oracle equivalence", criterion1);
  report(2, "CVaR closed form vs Monte Carlo", criterion2);
  report(3, "2-Wasserstein correctness", criterion3);
  report(4, "gradient integrity", criterion4);
  report(5, "SAC-reduction regression", criterion5);

  {
    // Criteria 6 and 7 share one constrained/unconstrained training pair.
    std::string msg6 = "training failed", msg7 = "training failed";
    bool ok6 = false, ok7 = false;
    try {
      const TrainedPair pair = train_pair();
      ok6 = criterion6(pair, msg6);
      ok7 = criterion7(pair, msg7);
    } catch (const std::exception& ex) {
      msg6 = msg7 = std::string("exception: ") + ex.what();
    }
    std::printf("%s criterion 6 (constrained-training outcome): %s\n", ok6 ? "PASS" : "FAIL",
                msg6.c_str());
    std::printf("%s criterion 7 (barrier enforcement): %s\n", ok7 ? "PASS" : "FAIL", msg7.c_str());
    std::fflush(stdout);
    failures += (ok6 ? 0 : 1) + (ok7 ? 0 : 1);
  }

  report(8, "candidate-selection invariant", criterion8);
  report(9, "metrics arithmetic", criterion9);
  report(10, "robustness trend", criterion10);
  report(11, "determinism", criterion11);

  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all 11 criteria passed\n");
  return 0;
}
