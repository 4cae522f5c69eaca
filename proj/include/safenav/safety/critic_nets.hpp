#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "safenav/core/rng.hpp"
#include "safenav/core/types.hpp"
#include "safenav/nn/mlp.hpp"
#include "safenav/safety/distribution.hpp"

namespace safenav::safety {

// Distributional safety critic: a mean net and a softplus-headed variance
// net over (state features, action), with frozen target copies.
class SafetyCriticNets {
 public:
  SafetyCriticNets() = default;
  SafetyCriticNets(std::size_t feat_dim, std::size_t act_dim, std::vector<std::size_t> hidden,
                   std::string prefix = "safety");

  void init(nn::ParamStore& store, Rng rng) const;  // also creates target copies
  void polyak(nn::ParamStore& store, double tau) const;

  double q(const nn::ParamStore& store, const Vec& feat, const Vec& act) const;
  double v(const nn::ParamStore& store, const Vec& feat, const Vec& act) const;
  double q_target(const nn::ParamStore& store, const Vec& feat, const Vec& act) const;
  double v_target(const nn::ParamStore& store, const Vec& feat, const Vec& act) const;

  GaussianCostDistribution dist(const nn::ParamStore& store, const Vec& feat, const Vec& act) const;
  double gamma_value(const nn::ParamStore& store, const Vec& feat, const Vec& act, double alpha) const;

  // Tape-level evaluation. frozen=true uses constant leaves (no parameter
  // gradients) while still propagating through the input.
  nn::Var q_var(nn::Tape& tape, nn::Var input, bool frozen) const;
  nn::Var v_var(nn::Tape& tape, nn::Var input, bool frozen) const;  // includes the 1e-12 floor

  // Differentiable CVaR: q + (pdf(quantile(alpha))/alpha) * sqrt(v).
  nn::Var gamma_var(nn::Tape& tape, nn::Var input, double alpha, bool frozen) const;

  std::size_t input_dim() const { return feat_dim_ + act_dim_; }
  const std::string& prefix() const { return prefix_; }

 private:
  std::size_t feat_dim_ = 0, act_dim_ = 0;
  std::string prefix_;
  nn::Mlp mean_, var_, mean_target_, var_target_;
};

struct SafetyTransition {
  Vec state;
  Vec action;
  double cost = 0.0;
  Vec next_state;
  Vec next_action;  // fresh sample from the current policy
  bool done = false;
};

struct SafetyCriticLoss {
  double j_c = 0.0;
  double j_v = 0.0;
  std::map<std::string, Vec> grads;  // on the online nets only
};

// W2-projection TD losses. Targets come from the frozen target nets:
//   Qbar = c + gamma * Q_target(s', a')                 (0 bootstrap at done)
//   Vbar = v_c_target(c, gamma, Q_target(s,a), E[Q'], E[V'], E[Q'^2])
//   J_C  = mean (Qbar - Q(s,a))^2
//   J_V  = mean (sqrt(Vbar) - sqrt(V(s,a)))^2
// Throws on a non-finite loss.
SafetyCriticLoss critic_losses(std::span<const SafetyTransition> batch, const SafetyCriticNets& nets,
                               nn::ParamStore& store, double gamma);

}  // namespace safenav::safety
