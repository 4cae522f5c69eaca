#pragma once

#include <cstdint>
#include <string>

#include "safenav/agent/sac.hpp"
#include "safenav/core/replay_buffer.hpp"
#include "safenav/envs/nav_world.hpp"
#include "safenav/nn/adam.hpp"
#include "safenav/wm/world_model.hpp"

namespace safenav::agent {

struct TrainConfig {
  // model dimensions
  std::size_t h_dim = 32, z_dim = 8, hidden = 32;

  // learning rates
  double lr_model = 1e-3;     // world model
  double lr_denoiser = 1e-3;
  double lr_reward = 3e-4;    // lambda_R
  double lr_policy = 3e-4;    // lambda_pi
  double lr_cost_q = 3e-4;    // lambda_C
  double lr_cost_v = 3e-4;    // lambda_V
  double lr_beta = 3e-4;      // lambda_beta
  double lr_kappa = 1e-2;     // lambda_kappa

  double tau = 0.02;          // polyak weight, in (0,1]
  double reward_scale = 1.0;  // reward multiplier inside critic/actor updates only
  int imagine_horizon = 8;    // H
  std::size_t batch = 16;
  std::size_t seq_len = 8;
  double gamma = 0.99;

  RiskBudget budget;          // d, alpha, barrier_decay, m, H_0
  double rho = 1.0;           // augmented quadratic weight
  double beta_init = 0.2;
  double kappa_init = 0.0;

  double explore_noise_start = 0.1;  // linear decay over training
  double explore_noise_end = 0.01;

  int epochs = 300;
  int updates_per_epoch = 1;         // gradient passes per epoch before the env episode
  std::size_t seed_episodes = 5;     // random episodes before epoch 0
  std::size_t replay_capacity = 200000;
  std::uint64_t seed = 1;

  bool constrain_policy = true;  // CVaR hinge in J_pi + kappa updates
  bool use_barrier = true;       // imagined barrier penalty in J_pi
  double barrier_weight = 1.0;   // scale of that penalty inside J_pi
  bool use_screening = true;     // diffusion candidates + safety screen
  bool replay_behavior = false;  // behavior learning on replay sequences
                                 // instead of imagined rollouts

  int diffusion_k = 8;
  int diffusion_steps = 5;

  void validate() const;  // throws listing every invalid field
};

struct EpochStats {
  int epoch = 0;
  double j_model = 0.0, kl = 0.0, j_denoiser = 0.0;
  double j_c = 0.0, j_v = 0.0, j_r = 0.0, j_pi = 0.0;
  double barrier_penalty = 0.0;
  double mean_gamma = 0.0;
  double kappa = 0.0, beta = 0.0;
  double ep_return = 0.0, ep_cost = 0.0, ep_discounted_cost = 0.0;
  int ep_steps = 0, violations = 0;
  bool reached_goal = false;
};

// One JSONL record; field order fixed so identical runs are byte-identical.
std::string stats_to_json(const EpochStats& s);

// All learned state for one agent: world model, policy, twin reward critics,
// distributional safety critic, multipliers, and their optimizers.
class Agent {
 public:
  Agent(std::size_t obs_dim, std::size_t act_dim, const TrainConfig& cfg);

  void init();  // seeds every net from cfg.seed

  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  std::size_t feat_dim() const { return obs_dim_ + cfg_.z_dim; }
  Vec features(const Vec& obs, const Vec& z) const;

  nn::ParamStore& store() { return store_; }
  const nn::ParamStore& store() const { return store_; }
  const wm::WorldModel& world_model() const { return wm_; }
  const PolicyNet& policy() const { return policy_; }
  const RewardCritics& critics() const { return critics_; }
  const safety::SafetyCriticNets& safety_critic() const { return safety_; }
  const TrainConfig& config() const { return cfg_; }
  Multipliers& multipliers() { return mult_; }
  const Multipliers& multipliers() const { return mult_; }

  // Multipliers ride along inside the store (mult.beta / mult.kappa), so a
  // checkpoint restores them too.
  void save(const std::string& path);
  void load(const std::string& path);

  nn::Adam& opt_model() { return opt_model_; }
  nn::Adam& opt_denoiser() { return opt_denoiser_; }
  nn::Adam& opt_reward() { return opt_reward_; }
  nn::Adam& opt_policy() { return opt_policy_; }
  nn::Adam& opt_cost_q() { return opt_cost_q_; }
  nn::Adam& opt_cost_v() { return opt_cost_v_; }

 private:
  std::size_t obs_dim_, act_dim_;
  TrainConfig cfg_;
  nn::ParamStore store_;
  wm::WorldModel wm_;
  PolicyNet policy_;
  RewardCritics critics_;
  safety::SafetyCriticNets safety_;
  Multipliers mult_;
  nn::Adam opt_model_, opt_denoiser_, opt_reward_, opt_policy_, opt_cost_q_, opt_cost_v_;
};

struct EpisodeRun {
  Episode episode;
  bool reached_goal = false;
  double min_ttc = -1.0;           // min positive TTC seen; < 0 if none
  int collisions_moving = 0;       // -> Ped
  int collisions_static = 0;       // -> Stat
  int hazard_entries = 0;          // -> Veh
  double distance_m = 0.0;
  double off_route_m = 0.0;
};

// One environment episode driven by the agent: posterior (or diffusion-
// screened) latents feed the policy; the recurrent state is carried with the
// executed actions. Pure function of (agent state, env config, seeds).
EpisodeRun run_episode(const Agent& agent, envs::NavWorld& env, std::uint64_t env_seed, Rng rng,
                       double explore_noise, bool deterministic);

// Fills the buffer with `n` uniform-random-action episodes.
void seed_buffer(ReplayBuffer& buffer, envs::NavWorld& env, std::size_t n, Rng rng);

// Latent rollout with barrier screening: after the first step, each next
// latent is picked among `candidates` diffusion proposals so that Gamma
// obeys the decrease condition against the previous step (select_candidate
// with budget (1 - barrier_decay) * Gamma_prev); when no proposal qualifies
// it falls back to the Gamma-minimal one. Gamma uses the deterministic
// action, matching the screening in run_episode; `policy` drives the
// transitions.
std::vector<wm::ImaginedStep> imagine_screened(const Agent& agent, const wm::LatentState& start,
                                               const wm::WorldModel::PolicyFn& policy, int horizon,
                                               int candidates, Rng rng);

// One outer-loop iteration: world-model + denoiser updates, safety/reward
// critic updates, policy update with CVaR and barrier terms, multiplier
// steps, polyak averaging, then one environment episode appended to the
// buffer. Throws with epoch diagnostics on any non-finite loss.
EpochStats train_epoch(Agent& agent, ReplayBuffer& buffer, envs::NavWorld& env, int epoch);

}  // namespace safenav::agent
