#include "safenav/agent/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safenav::agent {

namespace {
constexpr double kStdFloor = 1e-6;
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLog2 = 0.6931471805599453094;

double softplus_d(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
}  // namespace

PolicyNet::PolicyNet(std::size_t feat_dim, std::size_t act_dim, std::vector<std::size_t> hidden,
                     std::string prefix)
    : feat_dim_(feat_dim), act_dim_(act_dim), prefix_(std::move(prefix)) {
  net_ = nn::Mlp(prefix_, {feat_dim, std::move(hidden), 2 * act_dim, nn::Act::Tanh, nn::Act::Identity});
}

void PolicyNet::init(nn::ParamStore& store, Rng rng) const { net_.init(store, rng.split(prefix_)); }

void PolicyNet::heads(const nn::ParamStore& store, const Vec& feat, Vec& mean, Vec& std) const {
  if (feat.size() != feat_dim_) throw std::invalid_argument("PolicyNet: feature size mismatch");
  const Vec raw = net_.eval(store, feat);
  mean.assign(raw.begin(), raw.begin() + act_dim_);
  std.resize(act_dim_);
  for (std::size_t i = 0; i < act_dim_; ++i) std[i] = softplus_d(raw[act_dim_ + i]) + kStdFloor;
}

PolicyNet::Sample PolicyNet::sample(const nn::ParamStore& store, const Vec& feat,
                                    bool deterministic, Rng& rng) const {
  Vec mean, std;
  heads(store, feat, mean, std);
  Sample out;
  out.action.resize(act_dim_);
  for (std::size_t i = 0; i < act_dim_; ++i) {
    const double eps = deterministic ? 0.0 : rng.gaussian();
    const double u = mean[i] + std[i] * eps;
    out.action[i] = std::tanh(u);
    // log N(u; mean, std) - log(1 - tanh(u)^2), the latter in the stable
    // form 2*(log2 - u - softplus(-2u)).
    out.log_prob += -0.5 * eps * eps - std::log(std[i]) - 0.5 * kLog2Pi;
    out.log_prob -= 2.0 * (kLog2 - u - softplus_d(-2.0 * u));
  }
  return out;
}

PolicyNet::SampleVar PolicyNet::sample_var(nn::Tape& tape, nn::Var feat, const Vec& eps) const {
  if (eps.size() != act_dim_) throw std::invalid_argument("PolicyNet: eps size mismatch");
  nn::Var raw = net_.forward(tape, feat, false);
  nn::Var mean = tape.slice(raw, 0, act_dim_);
  nn::Var std = tape.offset(tape.softplus(tape.slice(raw, act_dim_, act_dim_)), kStdFloor);
  nn::Var u = tape.add(mean, tape.mul(std, tape.constant(eps)));

  SampleVar out;
  out.action = tape.tanh_(u);
  double const_term = 0.0;
  for (const double e : eps) const_term += -0.5 * e * e;
  const_term += -0.5 * kLog2Pi * static_cast<double>(act_dim_);
  const_term += -2.0 * kLog2 * static_cast<double>(act_dim_);
  // logp = const - sum(log std) + 2*sum(u + softplus(-2u))
  nn::Var corr = tape.scale(tape.sum(tape.add(u, tape.softplus(tape.scale(u, -2.0)))), 2.0);
  out.log_prob = tape.offset(tape.add(tape.neg(tape.sum(tape.log_(std))), corr), const_term);
  return out;
}

PolicyNet::Sample sample_action(const PolicyNet& policy, const nn::ParamStore& store,
                                const Vec& feat, bool deterministic, Rng& rng,
                                double explore_noise) {
  PolicyNet::Sample s = policy.sample(store, feat, deterministic, rng);
  if (explore_noise > 0.0) {
    for (double& a : s.action) {
      a += explore_noise * rng.gaussian();
      a = std::clamp(a, -1.0, 1.0);
    }
  }
  return s;
}

}  // namespace safenav::agent
