#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "safenav/core/replay_buffer.hpp"
#include "safenav/core/rng.hpp"
#include "safenav/core/types.hpp"
#include "safenav/nn/mlp.hpp"

namespace safenav::wm {

struct LatentState {
  Vec h;  // deterministic recurrent state, ||h||_inf <= 1
  Vec z;  // stochastic latent sample
};

struct DiagonalGaussian {
  Vec mean;
  Vec std;  // floored at 1e-6

  Vec sample(Rng& rng) const;
  std::size_t dim() const { return mean.size(); }
};

// Closed-form KL(post || prior) for diagonal Gaussians, summed over dims.
double kl_divergence(const DiagonalGaussian& post, const DiagonalGaussian& prior);

struct DiffusionSchedule {
  std::vector<double> noise_levels;  // strictly decreasing, positive

  int n_steps() const { return static_cast<int>(noise_levels.size()); }
  static DiffusionSchedule linear(int n_steps, double sigma_max = 1.0, double sigma_min = 0.05);
  void validate() const;
};

struct WorldModelSpec {
  std::size_t obs_dim = 0;
  std::size_t act_dim = 0;
  std::size_t h_dim = 64;
  std::size_t z_dim = 16;
  std::size_t hidden = 64;
  double beta_kl = 1.0;
  double free_bits = 1.0;  // nats
};

struct WorldModelLoss {
  double total = 0.0;
  double recon = 0.0;
  double reward = 0.0;
  double cost = 0.0;
  double kl = 0.0;
  std::map<std::string, Vec> grads;
};

struct ImaginedStep {
  LatentState state;
  Vec decoded_obs;
  Vec action;
  double reward_hat = 0.0;
  double cost_hat = 0.0;
};

// Latent world model: representation (posterior), transition (prior),
// gated recurrent core, observation/reward/cost heads, and a noise-
// prediction denoiser for candidate-latent generation.
class WorldModel {
 public:
  WorldModel() = default;
  explicit WorldModel(WorldModelSpec spec);

  void init(nn::ParamStore& store, Rng rng) const;
  const WorldModelSpec& spec() const { return spec_; }

  // --- numeric (no-graph) evaluation ---
  DiagonalGaussian posterior(const nn::ParamStore& store, const Vec& o, const Vec& h) const;
  DiagonalGaussian prior(const nn::ParamStore& store, const Vec& h) const;
  Vec recurrent_step(const nn::ParamStore& store, const Vec& h, const Vec& z, const Vec& a) const;
  // (obs mean, reward mean, cost mean >= 0)
  std::tuple<Vec, double, double> decode_heads(const nn::ParamStore& store, const Vec& h,
                                               const Vec& z) const;
  LatentState initial_state() const;

  // --- tape-level building blocks (frozen=true for constant weights) ---
  struct GaussVar {
    nn::Var mean;
    nn::Var std;
  };
  GaussVar posterior_var(nn::Tape& tape, nn::Var o, nn::Var h, bool frozen) const;
  GaussVar prior_var(nn::Tape& tape, nn::Var h, bool frozen) const;
  nn::Var recurrent_var(nn::Tape& tape, nn::Var h, nn::Var z, nn::Var a, bool frozen) const;
  struct HeadsVar {
    nn::Var obs;
    nn::Var reward;
    nn::Var cost;
  };
  HeadsVar heads_var(nn::Tape& tape, nn::Var h, nn::Var z, bool frozen) const;
  nn::Var kl_var(nn::Tape& tape, const GaussVar& post, const GaussVar& prior) const;
  nn::Var denoiser_var(nn::Tape& tape, nn::Var z_noisy, nn::Var h, double sigma, bool frozen) const;
  Vec denoise_eval(const nn::ParamStore& store, const Vec& z_noisy, const Vec& h, double sigma) const;

  // Sequence ELBO-style loss: sum_t [ ||o-ohat||^2 + (r-rhat)^2 + (c-chat)^2
  // + beta_kl * max(KL_t, free_bits) ], averaged over the batch. Posterior
  // samples are reparameterized so gradients flow into the encoder.
  WorldModelLoss world_model_loss(std::span<const SequenceWindow> batch, nn::ParamStore& store,
                                  Rng& rng) const;

  // Denoising objective: MSE between predicted and true noise at random
  // schedule levels, for posterior latents z_clean with recurrent contexts.
  struct DenoiserLoss {
    double loss = 0.0;
    std::map<std::string, Vec> grads;
  };
  DenoiserLoss denoiser_loss(std::span<const Vec> z_clean, std::span<const Vec> contexts,
                             const DiffusionSchedule& schedule, nn::ParamStore& store, Rng& rng) const;

  // Pure latent rollout under `policy`; prior latents after the first step.
  using PolicyFn = std::function<Vec(const Vec& decoded_obs, const Vec& z, Rng& rng)>;
  std::vector<ImaginedStep> imagine(const nn::ParamStore& store, const LatentState& start,
                                    const PolicyFn& policy, int horizon, Rng rng) const;

  // K candidate latents by iterative denoising conditioned on h.
  std::vector<Vec> diffusion_sample_candidates(const nn::ParamStore& store, const LatentState& context,
                                               int k, const DiffusionSchedule& schedule, Rng& rng) const;

 private:
  WorldModelSpec spec_;
  nn::Mlp post_net_;     // (o, h)   -> 2*z (mean, raw std)
  nn::Mlp prior_net_;    // h        -> 2*z
  nn::Mlp gate_net_;     // (h,z,a)  -> h (sigmoid gate)
  nn::Mlp cand_net_;     // (h,z,a)  -> h (tanh candidate)
  nn::Mlp obs_head_;     // (h,z)    -> obs
  nn::Mlp reward_head_;  // (h,z)    -> 1
  nn::Mlp cost_head_;    // (h,z)    -> 1, softplus
  nn::Mlp denoiser_;     // (z_noisy, h, sigma) -> noise estimate
};

// Among candidates with gamma_of(z) <= budget, the Q-maximal one; if none
// is safe, the gamma-minimal one. Ties break to the lowest index.
std::size_t select_candidate(std::span<const Vec> candidates,
                             const std::function<double(const Vec&)>& q_of,
                             const std::function<double(const Vec&)>& gamma_of, double budget);

}  // namespace safenav::wm
