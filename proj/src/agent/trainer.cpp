#include "safenav/agent/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace safenav::agent {

namespace {

std::map<std::string, Vec> filter_grads(const std::map<std::string, Vec>& grads,
                                        const std::string& prefix) {
  std::map<std::string, Vec> out;
  for (const auto& [name, g] : grads) {
    if (name.rfind(prefix, 0) == 0) out.emplace(name, g);
  }
  return out;
}

void add_grads(std::map<std::string, Vec>& into, const std::map<std::string, Vec>& other,
               double scale) {
  for (const auto& [name, g] : other) {
    auto it = into.find(name);
    if (it == into.end()) it = into.emplace(name, Vec(g.size(), 0.0)).first;
    for (std::size_t i = 0; i < g.size(); ++i) it->second[i] += scale * g[i];
  }
}

// Per-step (h_t, z_t = posterior mean) along a replay window, h_0 = 0.
struct UnrolledWindow {
  std::vector<Vec> h;  // length L
  std::vector<Vec> z;  // length L
};

UnrolledWindow unroll_posterior_mean(const wm::WorldModel& model, const nn::ParamStore& store,
                                     const SequenceWindow& win) {
  UnrolledWindow out;
  Vec h(model.spec().h_dim, 0.0);
  for (std::size_t t = 0; t < win.length; ++t) {
    const TransitionStep& st = win.step(t);
    Vec z = model.posterior(store, st.observation, h).mean;
    out.h.push_back(h);
    out.z.push_back(z);
    h = model.recurrent_step(store, h, z, st.action);
  }
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  std::string errs;
  auto bad = [&](const std::string& msg) { errs += (errs.empty() ? "" : "; ") + msg; };
  if (h_dim == 0 || z_dim == 0 || hidden == 0) bad("h_dim/z_dim/hidden must be positive");
  for (const auto& [v, n] :
       std::initializer_list<std::pair<double, const char*>>{{lr_model, "lr_model"},
                                                             {lr_denoiser, "lr_denoiser"},
                                                             {lr_reward, "lr_reward"},
                                                             {lr_policy, "lr_policy"},
                                                             {lr_cost_q, "lr_cost_q"},
                                                             {lr_cost_v, "lr_cost_v"},
                                                             {lr_beta, "lr_beta"},
                                                             {lr_kappa, "lr_kappa"}}) {
    if (v < 0.0) bad(std::string(n) + " must be >= 0");
  }
  if (!(tau > 0.0 && tau <= 1.0)) bad("tau must be in (0,1]");
  if (imagine_horizon < 1) bad("imagine_horizon must be >= 1");
  if (batch == 0) bad("batch must be >= 1");
  if (seq_len < 2) bad("seq_len must be >= 2");
  if (!(gamma > 0.0 && gamma < 1.0)) bad("gamma must be in (0,1)");
  if (!(budget.alpha > 0.0 && budget.alpha < 1.0)) bad("budget.alpha must be in (0,1)");
  if (!(budget.barrier_decay > 0.0 && budget.barrier_decay < 1.0)) {
    bad("budget.barrier_decay must be in (0,1)");
  }
  if (budget.barrier_degree_m < 1) bad("budget.barrier_degree_m must be >= 1");
  if (rho < 0.0) bad("rho must be >= 0");
  if (barrier_weight < 0.0) bad("barrier_weight must be >= 0");
  if (!(beta_init > 0.0)) bad("beta_init must be > 0");
  if (kappa_init < 0.0) bad("kappa_init must be >= 0");
  if (explore_noise_start < 0.0 || explore_noise_end < 0.0) bad("explore noise must be >= 0");
  if (epochs < 1) bad("epochs must be >= 1");
  if (updates_per_epoch < 1) bad("updates_per_epoch must be >= 1");
  if (reward_scale <= 0.0) bad("reward_scale must be > 0");
  if (replay_capacity == 0) bad("replay_capacity must be >= 1");
  if (diffusion_k < 1) bad("diffusion_k must be >= 1");
  if (diffusion_steps < 1) bad("diffusion_steps must be >= 1");
  if (!errs.empty()) throw std::invalid_argument("TrainConfig: " + errs);
}

std::string stats_to_json(const EpochStats& s) {
  nlohmann::ordered_json j;
  j["epoch"] = s.epoch;
  j["j_model"] = s.j_model;
  j["kl"] = s.kl;
  j["j_denoiser"] = s.j_denoiser;
  j["j_c"] = s.j_c;
  j["j_v"] = s.j_v;
  j["j_r"] = s.j_r;
  j["j_pi"] = s.j_pi;
  j["barrier_penalty"] = s.barrier_penalty;
  j["mean_gamma"] = s.mean_gamma;
  j["kappa"] = s.kappa;
  j["beta"] = s.beta;
  j["ep_return"] = s.ep_return;
  j["ep_cost"] = s.ep_cost;
  j["ep_discounted_cost"] = s.ep_discounted_cost;
  j["ep_steps"] = s.ep_steps;
  j["violations"] = s.violations;
  j["reached_goal"] = s.reached_goal;
  return j.dump();
}

Agent::Agent(std::size_t obs_dim, std::size_t act_dim, const TrainConfig& cfg)
    : obs_dim_(obs_dim),
      act_dim_(act_dim),
      cfg_(cfg),
      wm_(wm::WorldModelSpec{obs_dim, act_dim, cfg.h_dim, cfg.z_dim, cfg.hidden}),
      policy_(obs_dim + cfg.z_dim, act_dim, {cfg.hidden, cfg.hidden}),
      critics_(obs_dim + cfg.z_dim, act_dim, {cfg.hidden, cfg.hidden}),
      safety_(obs_dim + cfg.z_dim, act_dim, {cfg.hidden, cfg.hidden}),
      opt_model_(cfg.lr_model),
      opt_denoiser_(cfg.lr_denoiser),
      opt_reward_(cfg.lr_reward),
      opt_policy_(cfg.lr_policy),
      opt_cost_q_(cfg.lr_cost_q),
      opt_cost_v_(cfg.lr_cost_v) {
  cfg_.validate();
  mult_.beta = cfg_.beta_init;
  mult_.kappa = cfg_.kappa_init;
  mult_.rho = cfg_.rho;
}

void Agent::init() {
  Rng rng = Rng(cfg_.seed).split("init");
  wm_.init(store_, rng.split("wm"));
  policy_.init(store_, rng.split("policy"));
  critics_.init(store_, rng.split("critics"));
  safety_.init(store_, rng.split("safety"));
  store_.add("mult.beta", {1}, {mult_.beta});
  store_.add("mult.kappa", {1}, {mult_.kappa});
}

Vec Agent::features(const Vec& obs, const Vec& z) const {
  Vec feat;
  feat.reserve(obs.size() + z.size());
  feat.insert(feat.end(), obs.begin(), obs.end());
  feat.insert(feat.end(), z.begin(), z.end());
  return feat;
}

void Agent::save(const std::string& path) {
  store_.values("mult.beta")[0] = mult_.beta;
  store_.values("mult.kappa")[0] = mult_.kappa;
  store_.save(path);
}

void Agent::load(const std::string& path) {
  store_ = nn::ParamStore::load(path);
  mult_.beta = store_.values("mult.beta")[0];
  mult_.kappa = store_.values("mult.kappa")[0];
}

EpisodeRun run_episode(const Agent& agent, envs::NavWorld& env, std::uint64_t env_seed, Rng rng,
                       double explore_noise, bool deterministic) {
  const TrainConfig& cfg = agent.config();
  const nn::ParamStore& store = agent.store();
  const wm::WorldModel& model = agent.world_model();
  const wm::DiffusionSchedule sched = wm::DiffusionSchedule::linear(cfg.diffusion_steps);
  const double dt = env.config().dt;
  const int time_limit = env.config().time_limit;

  EpisodeRun run;
  run.episode.seed = env_seed;
  Vec obs = env.reset(env_seed);
  Vec h(cfg.h_dim, 0.0);
  Rng dummy(0);

  for (int t = 0; t < time_limit; ++t) {
    const wm::DiagonalGaussian post = model.posterior(store, obs, h);
    Vec z;
    if (cfg.use_screening) {
      wm::LatentState ctx{h, post.mean};
      const auto cands =
          model.diffusion_sample_candidates(store, ctx, cfg.diffusion_k, sched, rng);
      const double budget_t =
          cfg.budget.d * static_cast<double>(time_limit - t) / static_cast<double>(time_limit);
      auto q_of = [&](const Vec& zc) {
        const Vec feat = agent.features(obs, zc);
        const Vec a = agent.policy().sample(store, feat, true, dummy).action;
        return agent.critics().q_min(store, feat, a);
      };
      auto gamma_of = [&](const Vec& zc) {
        const Vec feat = agent.features(obs, zc);
        const Vec a = agent.policy().sample(store, feat, true, dummy).action;
        return agent.safety_critic().gamma_value(store, feat, a, cfg.budget.alpha);
      };
      z = cands[wm::select_candidate(cands, q_of, gamma_of, budget_t)];
    } else {
      z = post.sample(rng);
    }
    const Vec feat = agent.features(obs, z);
    const PolicyNet::Sample s =
        sample_action(agent.policy(), store, feat, deterministic, rng, explore_noise);
    const envs::NavStepResult res = env.step({s.action[0], s.action[1]});

    run.episode.steps.push_back(
        TransitionStep{obs, s.action, res.reward, res.cost, res.done, res.violation});
    run.distance_m += env.ego().v * dt;
    if (res.collided_moving) ++run.collisions_moving;
    if (res.collided_static) ++run.collisions_static;
    if (res.entered_hazard) ++run.hazard_entries;
    if (res.reached_goal) run.reached_goal = true;
    if (res.min_ttc >= 0.0 && (run.min_ttc < 0.0 || res.min_ttc < run.min_ttc)) {
      run.min_ttc = res.min_ttc;
    }
    h = model.recurrent_step(store, h, z, s.action);
    obs = res.observation;
    if (res.done) break;
  }
  run.episode.route_length_m = env.route_length();
  run.episode.completed_fraction = env.completed_fraction();
  run.off_route_m = env.off_route_distance();
  return run;
}

std::vector<wm::ImaginedStep> imagine_screened(const Agent& agent, const wm::LatentState& start,
                                               const wm::WorldModel::PolicyFn& policy, int horizon,
                                               int candidates, Rng rng) {
  if (horizon < 1) throw std::invalid_argument("imagine_screened: horizon must be >= 1");
  if (candidates < 1) throw std::invalid_argument("imagine_screened: candidates must be >= 1");
  const TrainConfig& cfg = agent.config();
  const nn::ParamStore& store = agent.store();
  const wm::WorldModel& model = agent.world_model();
  const wm::DiffusionSchedule sched = wm::DiffusionSchedule::linear(cfg.diffusion_steps);
  Rng dummy(0);

  std::vector<wm::ImaginedStep> out;
  out.reserve(horizon);
  Vec h = start.h;
  Vec z = start.z;
  double gamma_prev = 0.0;
  for (int t = 0; t < horizon; ++t) {
    auto gamma_of = [&](const Vec& zc) {
      const auto [obs, r, c] = model.decode_heads(store, h, zc);
      const Vec feat = agent.features(obs, zc);
      const Vec a = agent.policy().sample(store, feat, true, dummy).action;
      return agent.safety_critic().gamma_value(store, feat, a, cfg.budget.alpha);
    };
    if (t > 0) {
      wm::LatentState ctx{h, model.prior(store, h).mean};
      const auto cands = model.diffusion_sample_candidates(store, ctx, candidates, sched, rng);
      auto q_of = [&](const Vec& zc) {
        const auto [obs, r, c] = model.decode_heads(store, h, zc);
        const Vec feat = agent.features(obs, zc);
        const Vec a = agent.policy().sample(store, feat, true, dummy).action;
        return agent.critics().q_min(store, feat, a);
      };
      const double budget = (1.0 - cfg.budget.barrier_decay) * gamma_prev;
      z = cands[wm::select_candidate(cands, q_of, gamma_of, budget)];
    }
    gamma_prev = gamma_of(z);
    wm::ImaginedStep step;
    step.state = wm::LatentState{h, z};
    auto [obs, r, c] = model.decode_heads(store, h, z);
    step.decoded_obs = std::move(obs);
    step.reward_hat = r;
    step.cost_hat = c;
    step.action = policy(step.decoded_obs, z, rng);
    h = model.recurrent_step(store, h, z, step.action);
    out.push_back(std::move(step));
  }
  return out;
}

void seed_buffer(ReplayBuffer& buffer, envs::NavWorld& env, std::size_t n, Rng rng) {
  for (std::size_t i = 0; i < n; ++i) {
    Rng ep_rng = rng.split(i);
    const std::uint64_t seed = ep_rng.next_u64();
    Episode ep;
    ep.seed = seed;
    Vec obs = env.reset(seed);
    for (int t = 0; t < env.config().time_limit; ++t) {
      Vec action{ep_rng.uniform(-1.0, 1.0), ep_rng.uniform(-1.0, 1.0)};
      const envs::NavStepResult res = env.step({action[0], action[1]});
      ep.steps.push_back(TransitionStep{obs, action, res.reward, res.cost, res.done, res.violation});
      obs = res.observation;
      if (res.done) break;
    }
    ep.route_length_m = env.route_length();
    ep.completed_fraction = env.completed_fraction();
    buffer.push_episode(std::move(ep));
  }
}

EpochStats train_epoch(Agent& agent, ReplayBuffer& buffer, envs::NavWorld& env, int epoch) {
  const TrainConfig& cfg = agent.config();
  nn::ParamStore& store = agent.store();
  const wm::WorldModel& model = agent.world_model();
  Multipliers& mult = agent.multipliers();
  Rng e = Rng(cfg.seed).split("epoch").split(static_cast<std::uint64_t>(epoch));
  Rng dummy(0);
  EpochStats stats;
  stats.epoch = epoch;
  try {
    for (int upd = 0; upd < cfg.updates_per_epoch; ++upd) {
    Rng u = e.split("update").split(static_cast<std::uint64_t>(upd));
    // --- world model ---
    const auto wm_batch =
        buffer.sample_sequence_batch(cfg.batch, cfg.seq_len, u.split("wm_batch").seed());
    Rng wm_noise = u.split("wm_noise");
    const wm::WorldModelLoss wloss = model.world_model_loss(wm_batch, store, wm_noise);
    stats.j_model = wloss.total;
    stats.kl = wloss.kl;
    agent.opt_model().step(store, wloss.grads);

    // --- denoiser, on posterior-mean latents of the same windows ---
    std::vector<Vec> z_clean, contexts;
    for (const auto& win : wm_batch) {
      const UnrolledWindow u = unroll_posterior_mean(model, store, win);
      for (std::size_t t = 0; t < win.length; ++t) {
        z_clean.push_back(u.z[t]);
        contexts.push_back(u.h[t]);
      }
    }
    Rng dn_rng = u.split("denoiser");
    const wm::DiffusionSchedule sched = wm::DiffusionSchedule::linear(cfg.diffusion_steps);
    const auto dloss = model.denoiser_loss(z_clean, contexts, sched, store, dn_rng);
    stats.j_denoiser = dloss.loss;
    agent.opt_denoiser().step(store, dloss.grads);

    // --- behavior data ---
    std::vector<safety::SafetyTransition> safety_batch;
    std::vector<RewardTransition> reward_batch;
    std::vector<Vec> policy_feats;
    Rng act_rng = u.split("behavior_actions");
    if (cfg.replay_behavior) {
      const auto windows =
          buffer.sample_sequence_batch(cfg.batch, cfg.seq_len, u.split("behavior_batch").seed());
      for (const auto& win : windows) {
        const UnrolledWindow u = unroll_posterior_mean(model, store, win);
        std::vector<Vec> feats(win.length);
        for (std::size_t t = 0; t < win.length; ++t) {
          feats[t] = agent.features(win.step(t).observation, u.z[t]);
        }
        for (std::size_t t = 0; t < win.length; ++t) {
          const TransitionStep& st = win.step(t);
          const bool last = t + 1 == win.length;
          if (last && !st.done) break;  // no bootstrap target available
          const Vec& next = last ? feats[t] : feats[t + 1];
          reward_batch.push_back(
              RewardTransition{feats[t], st.action, cfg.reward_scale * st.reward, next, st.done});
          const Vec next_action =
              st.done ? st.action : agent.policy().sample(store, next, false, act_rng).action;
          safety_batch.push_back(
              safety::SafetyTransition{feats[t], st.action, st.cost, next, next_action, st.done});
          policy_feats.push_back(feats[t]);
        }
      }
    } else {
      const auto windows =
          buffer.sample_sequence_batch(cfg.batch, cfg.seq_len, u.split("behavior_batch").seed());
      Rng im_rng = u.split("imagine");
      for (const auto& win : windows) {
        const UnrolledWindow u = unroll_posterior_mean(model, store, win);
        wm::LatentState start{u.h.back(), u.z.back()};
        auto policy_fn = [&](const Vec& dec_obs, const Vec& z, Rng& r) {
          return agent.policy().sample(store, agent.features(dec_obs, z), false, r).action;
        };
        const auto traj = model.imagine(store, start, policy_fn, cfg.imagine_horizon,
                                        im_rng.split(win.episode->seed ^ win.start));
        for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
          const Vec feat = agent.features(traj[t].decoded_obs, traj[t].state.z);
          const Vec next = agent.features(traj[t + 1].decoded_obs, traj[t + 1].state.z);
          reward_batch.push_back(RewardTransition{feat, traj[t].action,
                                                  cfg.reward_scale * traj[t].reward_hat, next, false});
          safety_batch.push_back(safety::SafetyTransition{feat, traj[t].action, traj[t].cost_hat,
                                                          next, traj[t + 1].action, false});
          policy_feats.push_back(feat);
        }
      }
    }
    if (policy_feats.empty()) throw std::runtime_error("no behavior transitions this epoch");

    // --- safety critic ---
    const auto closs = safety::critic_losses(safety_batch, agent.safety_critic(), store, cfg.gamma);
    stats.j_c = closs.j_c;
    stats.j_v = closs.j_v;
    agent.opt_cost_q().step(store, filter_grads(closs.grads, agent.safety_critic().prefix() + "_q."));
    agent.opt_cost_v().step(store, filter_grads(closs.grads, agent.safety_critic().prefix() + "_v."));

    // --- reward critics ---
    Rng rc_rng = u.split("reward_critic");
    const auto rloss = reward_critic_loss(reward_batch, agent.critics(), agent.policy(), store,
                                          mult.beta, cfg.gamma, rc_rng);
    stats.j_r = rloss.loss;
    agent.opt_reward().step(store, rloss.grads);

    // --- policy ---
    Rng pi_rng = u.split("policy");
    const Multipliers eff{mult.beta, cfg.constrain_policy ? mult.kappa : 0.0,
                          cfg.constrain_policy ? mult.rho : 0.0};
    const safety::SafetyCriticNets* safety_ptr =
        cfg.constrain_policy ? &agent.safety_critic() : nullptr;
    auto ploss = policy_loss(policy_feats, agent.policy(), agent.critics(), safety_ptr, eff,
                             cfg.budget.d, cfg.budget.alpha, store, pi_rng);
    stats.j_pi = ploss.loss;
    if (cfg.use_barrier) {
      Rng br_rng = u.split("barrier");
      const int horizon = std::max(cfg.budget.barrier_degree_m + 1, cfg.imagine_horizon);
      const auto start_win =
          buffer.sample_sequence_batch(1, cfg.seq_len, u.split("barrier_start").seed());
      const UnrolledWindow u = unroll_posterior_mean(model, store, start_win[0]);
      auto policy_fn = [&](const Vec& dec_obs, const Vec& z, Rng& r) {
        return agent.policy().sample(store, agent.features(dec_obs, z), false, r).action;
      };
      const auto traj = model.imagine(store, wm::LatentState{u.h.back(), u.z.back()}, policy_fn,
                                      horizon, br_rng.split("rollout"));
      std::vector<Vec> feats;
      feats.reserve(traj.size());
      for (const auto& step : traj) feats.push_back(agent.features(step.decoded_obs, step.state.z));
      Rng bp_rng = br_rng.split("actions");
      const auto bloss = imagined_barrier_penalty(feats, agent.policy(), agent.safety_critic(),
                                                  cfg.budget.alpha, cfg.budget.barrier_decay,
                                                  cfg.budget.barrier_degree_m, store, bp_rng);
      stats.barrier_penalty = bloss.penalty;
      add_grads(ploss.grads, bloss.grads, cfg.barrier_weight);
    }
    agent.opt_policy().step(store, ploss.grads);

    // --- multipliers ---
    mult.beta = update_entropy_multiplier(mult.beta, ploss.mean_log_prob, cfg.budget.entropy_floor,
                                          cfg.lr_beta);
    double gamma_sum = 0.0;
    for (const Vec& feat : policy_feats) {
      const Vec a = agent.policy().sample(store, feat, true, dummy).action;
      gamma_sum += agent.safety_critic().gamma_value(store, feat, a, cfg.budget.alpha);
    }
    stats.mean_gamma = gamma_sum / static_cast<double>(policy_feats.size());
    if (cfg.constrain_policy) {
      mult.kappa = update_safety_multiplier(mult.kappa, stats.mean_gamma - cfg.budget.d, cfg.lr_kappa);
    }
    store.values("mult.beta")[0] = mult.beta;
    store.values("mult.kappa")[0] = mult.kappa;
    stats.beta = mult.beta;
    stats.kappa = mult.kappa;

    // --- target networks ---
    agent.critics().polyak(store, cfg.tau);
    agent.safety_critic().polyak(store, cfg.tau);
    }

    // --- environment interaction ---
    const double frac =
        cfg.epochs > 1 ? static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1) : 0.0;
    const double noise =
        cfg.explore_noise_start + frac * (cfg.explore_noise_end - cfg.explore_noise_start);
    const std::uint64_t env_seed = e.split("env_seed").seed();
    EpisodeRun run = run_episode(agent, env, env_seed, e.split("env"), noise, false);
    std::vector<double> costs;
    for (const auto& st : run.episode.steps) {
      stats.ep_return += st.reward;
      stats.ep_cost += st.cost;
      costs.push_back(st.cost);
      if (st.violation) ++stats.violations;
    }
    stats.ep_discounted_cost = discounted_return(costs, cfg.gamma);
    stats.ep_steps = static_cast<int>(run.episode.size());
    stats.reached_goal = run.reached_goal;
    buffer.push_episode(std::move(run.episode));
  } catch (const std::exception& ex) {
    throw std::runtime_error("train_epoch " + std::to_string(epoch) + ": " + ex.what());
  }
  return stats;
}

}  // namespace safenav::agent
