#include "safenav/agent/sac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safenav::agent {

namespace {
Vec join(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}
}  // namespace

RewardCritics::RewardCritics(std::size_t feat_dim, std::size_t act_dim,
                             std::vector<std::size_t> hidden) {
  nn::MlpSpec spec{feat_dim + act_dim, std::move(hidden), 1, nn::Act::Tanh, nn::Act::Identity};
  c1_ = nn::Mlp("rc1", spec);
  c2_ = nn::Mlp("rc2", spec);
  c1_target_ = nn::Mlp("rc1_target", spec);
  c2_target_ = nn::Mlp("rc2_target", spec);
}

void RewardCritics::init(nn::ParamStore& store, Rng rng) const {
  c1_.init(store, rng.split("rc1"));
  c2_.init(store, rng.split("rc2"));
  nn::clone_params(store, "rc1.", "rc1_target.");
  nn::clone_params(store, "rc2.", "rc2_target.");
}

void RewardCritics::polyak(nn::ParamStore& store, double tau) const {
  nn::polyak_update(store, "rc1.", "rc1_target.", tau);
  nn::polyak_update(store, "rc2.", "rc2_target.", tau);
}

double RewardCritics::q1(const nn::ParamStore& store, const Vec& feat, const Vec& act) const {
  return c1_.eval(store, join(feat, act))[0];
}
double RewardCritics::q2(const nn::ParamStore& store, const Vec& feat, const Vec& act) const {
  return c2_.eval(store, join(feat, act))[0];
}
double RewardCritics::q_min(const nn::ParamStore& store, const Vec& feat, const Vec& act) const {
  return std::min(q1(store, feat, act), q2(store, feat, act));
}
double RewardCritics::target_min(const nn::ParamStore& store, const Vec& feat, const Vec& act) const {
  return std::min(c1_target_.eval(store, join(feat, act))[0],
                  c2_target_.eval(store, join(feat, act))[0]);
}

nn::Var RewardCritics::q1_var(nn::Tape& tape, nn::Var input, bool frozen) const {
  return c1_.forward(tape, input, frozen);
}
nn::Var RewardCritics::q2_var(nn::Tape& tape, nn::Var input, bool frozen) const {
  return c2_.forward(tape, input, frozen);
}

LossResult reward_critic_loss(std::span<const RewardTransition> batch, const RewardCritics& critics,
                              const PolicyNet& policy, nn::ParamStore& store, double beta,
                              double gamma, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("reward_critic_loss: empty batch");
  nn::Tape tape(&store);
  nn::Var sum = tape.constant(0.0);
  for (const auto& tr : batch) {
    double y = tr.reward;
    if (!tr.done) {
      PolicyNet::Sample next = policy.sample(store, tr.next_feat, false, rng);
      y += gamma * (critics.target_min(store, tr.next_feat, next.action) - beta * next.log_prob);
    }
    nn::Var input = tape.constant(join(tr.feat, tr.action));
    nn::Var target = tape.constant(y);
    nn::Var d1 = tape.sub(target, critics.q1_var(tape, input, false));
    nn::Var d2 = tape.sub(target, critics.q2_var(tape, input, false));
    sum = tape.add(sum, tape.add(tape.square(d1), tape.square(d2)));
  }
  nn::Var loss = tape.scale(sum, 1.0 / static_cast<double>(batch.size()));
  LossResult out;
  out.loss = tape.scalar(loss);
  if (!std::isfinite(out.loss)) throw std::runtime_error("reward_critic_loss: non-finite loss");
  tape.backward(loss);
  out.grads = tape.param_grads();
  return out;
}

PolicyLossResult policy_loss(std::span<const Vec> feats, const PolicyNet& policy,
                             const RewardCritics& critics, const safety::SafetyCriticNets* safety,
                             const Multipliers& mult, double budget_d, double alpha,
                             nn::ParamStore& store, Rng& rng) {
  if (feats.empty()) throw std::invalid_argument("policy_loss: empty batch");
  const bool constrained = safety != nullptr && (mult.kappa > 0.0 || mult.rho > 0.0);
  nn::Tape tape(&store);
  nn::Var sum = tape.constant(0.0);
  nn::Var logp_sum = tape.constant(0.0);
  for (const Vec& feat : feats) {
    Vec eps(policy.act_dim());
    for (double& e : eps) e = rng.gaussian();
    nn::Var feat_var = tape.constant(feat);
    PolicyNet::SampleVar s = policy.sample_var(tape, feat_var, eps);
    nn::Var input = tape.concat(feat_var, s.action);
    nn::Var q = tape.min2(critics.q1_var(tape, input, true), critics.q2_var(tape, input, true));
    nn::Var term = tape.sub(tape.scale(s.log_prob, mult.beta), q);
    if (constrained) {
      nn::Var gamma = safety->gamma_var(tape, input, alpha, true);
      nn::Var hinge = tape.relu(tape.offset(gamma, -budget_d));
      term = tape.add(term, tape.scale(hinge, mult.kappa));
      term = tape.add(term, tape.scale(tape.square(hinge), 0.5 * mult.rho));
    }
    sum = tape.add(sum, term);
    logp_sum = tape.add(logp_sum, s.log_prob);
  }
  const double inv_n = 1.0 / static_cast<double>(feats.size());
  nn::Var loss = tape.scale(sum, inv_n);
  PolicyLossResult out;
  out.loss = tape.scalar(loss);
  out.mean_log_prob = tape.scalar(logp_sum) * inv_n;
  if (!std::isfinite(out.loss)) throw std::runtime_error("policy_loss: non-finite loss");
  tape.backward(loss);
  // Frozen critic leaves leave only policy parameters in the gradient map.
  out.grads = tape.param_grads();
  return out;
}

double entropy_multiplier_loss(double beta, std::span<const double> log_probs,
                               double entropy_floor) {
  double mean = 0.0;
  for (const double lp : log_probs) mean += lp;
  mean /= static_cast<double>(log_probs.size());
  return -beta * (mean + entropy_floor);
}

double update_entropy_multiplier(double beta, double mean_log_prob, double entropy_floor,
                                 double lr) {
  return std::max(1e-6, beta + lr * (mean_log_prob + entropy_floor));
}

double safety_multiplier_loss(double kappa, std::span<const double> gammas, double budget_d) {
  double mean = 0.0;
  for (const double g : gammas) mean += g - budget_d;
  mean /= static_cast<double>(gammas.size());
  return -kappa * mean;
}

double update_safety_multiplier(double kappa, double mean_gamma_excess, double lr) {
  return std::max(0.0, kappa + lr * mean_gamma_excess);
}

bool barrier_check(double gamma_t, double gamma_t_plus_m, double decay) {
  if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("barrier_check: decay not in (0,1)");
  return gamma_t_plus_m <= (1.0 - decay) * gamma_t;
}

BarrierPenaltyResult imagined_barrier_penalty(std::span<const Vec> feats, const PolicyNet& policy,
                                              const safety::SafetyCriticNets& safety, double alpha,
                                              double decay, int m, nn::ParamStore& store, Rng& rng) {
  if (m < 1) throw std::invalid_argument("imagined_barrier_penalty: m must be >= 1");
  if (feats.size() < static_cast<std::size_t>(m) + 1) {
    throw std::invalid_argument("imagined_barrier_penalty: trajectory shorter than m+1");
  }
  nn::Tape tape(&store);
  std::vector<nn::Var> gammas;
  gammas.reserve(feats.size());
  for (const Vec& feat : feats) {
    Vec eps(policy.act_dim());
    for (double& e : eps) e = rng.gaussian();
    nn::Var feat_var = tape.constant(feat);
    PolicyNet::SampleVar s = policy.sample_var(tape, feat_var, eps);
    gammas.push_back(safety.gamma_var(tape, tape.concat(feat_var, s.action), alpha, true));
  }
  const std::size_t pairs = feats.size() - static_cast<std::size_t>(m);
  nn::Var sum = tape.constant(0.0);
  for (std::size_t t = 0; t < pairs; ++t) {
    nn::Var bound = tape.scale(gammas[t], 1.0 - decay);
    sum = tape.add(sum, tape.relu(tape.sub(gammas[t + m], bound)));
  }
  nn::Var penalty = tape.scale(sum, 1.0 / static_cast<double>(pairs));
  BarrierPenaltyResult out;
  out.penalty = tape.scalar(penalty);
  if (!std::isfinite(out.penalty)) {
    throw std::runtime_error("imagined_barrier_penalty: non-finite penalty");
  }
  tape.backward(penalty);
  out.grads = tape.param_grads();
  return out;
}

}  // namespace safenav::agent
