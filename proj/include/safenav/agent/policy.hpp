#pragma once

#include <string>
#include <vector>

#include "safenav/core/rng.hpp"
#include "safenav/core/types.hpp"
#include "safenav/nn/mlp.hpp"

namespace safenav::agent {

// Squashed-Gaussian policy: an MLP maps features to (mean, raw std) of a
// pre-squash Gaussian; actions are tanh-squashed to (-1,1) with the exact
// log-density correction. Std is floored at 1e-6.
class PolicyNet {
 public:
  PolicyNet() = default;
  PolicyNet(std::size_t feat_dim, std::size_t act_dim, std::vector<std::size_t> hidden,
            std::string prefix = "policy");

  void init(nn::ParamStore& store, Rng rng) const;

  struct Sample {
    Vec action;            // in (-1,1)^m (before any exploration noise)
    double log_prob = 0.0; // of `action` under the squashed density
  };

  // deterministic=true returns tanh(mean) with its log density.
  Sample sample(const nn::ParamStore& store, const Vec& feat, bool deterministic, Rng& rng) const;

  // Mean/std heads without sampling.
  void heads(const nn::ParamStore& store, const Vec& feat, Vec& mean, Vec& std) const;

  struct SampleVar {
    nn::Var action;
    nn::Var log_prob;  // scalar
  };

  // Reparameterized tape sample: u = mean + std*eps, a = tanh(u). `eps` is
  // the caller's noise draw so the graph is a pure function of it.
  SampleVar sample_var(nn::Tape& tape, nn::Var feat, const Vec& eps) const;

  std::size_t feat_dim() const { return feat_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  const std::string& prefix() const { return prefix_; }

 private:
  std::size_t feat_dim_ = 0, act_dim_ = 0;
  std::string prefix_;
  nn::Mlp net_;
};

// Interaction-mode sampler: stochastic draw (or squashed mean when
// deterministic), then additive Gaussian exploration noise of scale
// `explore_noise` applied after the squash, clipped to [-1,1].
PolicyNet::Sample sample_action(const PolicyNet& policy, const nn::ParamStore& store,
                                const Vec& feat, bool deterministic, Rng& rng,
                                double explore_noise = 0.0);

}  // namespace safenav::agent
