#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "safenav/agent/policy.hpp"
#include "safenav/core/rng.hpp"
#include "safenav/core/types.hpp"
#include "safenav/safety/critic_nets.hpp"

namespace safenav::agent {

struct Multipliers {
  double beta = 0.2;   // entropy temperature, > 0
  double kappa = 0.0;  // safety multiplier, >= 0
  double rho = 1.0;    // augmented quadratic weight, >= 0
};

// Twin reward critics with frozen target copies, prefixes rc1/rc2.
class RewardCritics {
 public:
  RewardCritics() = default;
  RewardCritics(std::size_t feat_dim, std::size_t act_dim, std::vector<std::size_t> hidden);

  void init(nn::ParamStore& store, Rng rng) const;
  void polyak(nn::ParamStore& store, double tau) const;

  double q1(const nn::ParamStore& store, const Vec& feat, const Vec& act) const;
  double q2(const nn::ParamStore& store, const Vec& feat, const Vec& act) const;
  double q_min(const nn::ParamStore& store, const Vec& feat, const Vec& act) const;
  double target_min(const nn::ParamStore& store, const Vec& feat, const Vec& act) const;

  nn::Var q1_var(nn::Tape& tape, nn::Var input, bool frozen) const;
  nn::Var q2_var(nn::Tape& tape, nn::Var input, bool frozen) const;

 private:
  nn::Mlp c1_, c2_, c1_target_, c2_target_;
};

struct RewardTransition {
  Vec feat;
  Vec action;
  double reward = 0.0;
  Vec next_feat;
  bool done = false;
};

struct LossResult {
  double loss = 0.0;
  std::map<std::string, Vec> grads;
};

// Soft Bellman regression for both critics:
//   y = r + gamma * ( min(Qbar1, Qbar2)(s', a') - beta * log pi(a'|s') )
// with a' freshly sampled; done bootstraps 0. Loss is the summed per-critic
// MSE; gradients land on the online critics only.
LossResult reward_critic_loss(std::span<const RewardTransition> batch, const RewardCritics& critics,
                              const PolicyNet& policy, nn::ParamStore& store, double beta,
                              double gamma, Rng& rng);

struct PolicyLossResult {
  double loss = 0.0;
  double mean_log_prob = 0.0;
  std::map<std::string, Vec> grads;  // on the policy only
};

// J_pi = E[ beta*log pi(a|s) - min(Q1,Q2)(s,a)
//           + kappa*(Gamma - d)+ + rho/2*((Gamma - d)+)^2 ]
// with a freshly reparameterized. Constraint terms are built only when
// kappa > 0 or rho > 0 so the unconstrained path is untouched; pass
// safety = nullptr to disable them outright.
PolicyLossResult policy_loss(std::span<const Vec> feats, const PolicyNet& policy,
                             const RewardCritics& critics, const safety::SafetyCriticNets* safety,
                             const Multipliers& mult, double budget_d, double alpha,
                             nn::ParamStore& store, Rng& rng);

// J_e = -beta * E[log pi + H_0]; dJ_e/dbeta = -E[log pi + H_0].
double entropy_multiplier_loss(double beta, std::span<const double> log_probs, double entropy_floor);
// One projected descent step on J_e: beta <- max(1e-6, beta + lr*E[log pi + H_0]).
double update_entropy_multiplier(double beta, double mean_log_prob, double entropy_floor, double lr);

// J_s = -kappa * E[Gamma - d].
double safety_multiplier_loss(double kappa, std::span<const double> gammas, double budget_d);
// Projected ascent on violation: kappa <- max(0, kappa + lr*E[Gamma - d]).
double update_safety_multiplier(double kappa, double mean_gamma_excess, double lr);

// Generalized barrier condition: Gamma_{t+m} <= (1 - decay) * Gamma_t.
bool barrier_check(double gamma_t, double gamma_t_plus_m, double decay);

struct BarrierPenaltyResult {
  double penalty = 0.0;
  std::map<std::string, Vec> grads;  // on the policy only
};

// Mean over t of (Gamma_{t+m} - (1-decay)*Gamma_t)+ along a feature
// trajectory, with fresh reparameterized policy actions at every step and a
// frozen critic, so the gradient flows to the policy. Throws when the
// trajectory is shorter than m+1.
BarrierPenaltyResult imagined_barrier_penalty(std::span<const Vec> feats, const PolicyNet& policy,
                                              const safety::SafetyCriticNets& safety, double alpha,
                                              double decay, int m, nn::ParamStore& store, Rng& rng);

}  // namespace safenav::agent
