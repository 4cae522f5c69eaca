#include "safenav/safety/critic_nets.hpp"

#include <cmath>
#include <stdexcept>

namespace safenav::safety {

namespace {
Vec join(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}
constexpr double kVarFloor = 1e-12;
}  // namespace

SafetyCriticNets::SafetyCriticNets(std::size_t feat_dim, std::size_t act_dim,
                                   std::vector<std::size_t> hidden, std::string prefix)
    : feat_dim_(feat_dim), act_dim_(act_dim), prefix_(std::move(prefix)) {
  nn::MlpSpec mean_spec{feat_dim + act_dim, hidden, 1, nn::Act::Tanh, nn::Act::Identity};
  nn::MlpSpec var_spec{feat_dim + act_dim, hidden, 1, nn::Act::Tanh, nn::Act::Softplus};
  mean_ = nn::Mlp(prefix_ + "_q", mean_spec);
  var_ = nn::Mlp(prefix_ + "_v", var_spec);
  mean_target_ = nn::Mlp(prefix_ + "_q_target", mean_spec);
  var_target_ = nn::Mlp(prefix_ + "_v_target", var_spec);
}

void SafetyCriticNets::init(nn::ParamStore& store, Rng rng) const {
  mean_.init(store, rng.split(prefix_ + "_q"));
  var_.init(store, rng.split(prefix_ + "_v"));
  nn::clone_params(store, prefix_ + "_q.", prefix_ + "_q_target.");
  nn::clone_params(store, prefix_ + "_v.", prefix_ + "_v_target.");
}

void SafetyCriticNets::polyak(nn::ParamStore& store, double tau) const {
  nn::polyak_update(store, prefix_ + "_q.", prefix_ + "_q_target.", tau);
  nn::polyak_update(store, prefix_ + "_v.", prefix_ + "_v_target.", tau);
}

double SafetyCriticNets::q(const nn::ParamStore& store, const Vec& feat, const Vec& act) const {
  return mean_.eval(store, join(feat, act))[0];
}
double SafetyCriticNets::v(const nn::ParamStore& store, const Vec& feat, const Vec& act) const {
  return var_.eval(store, join(feat, act))[0] + kVarFloor;
}
double SafetyCriticNets::q_target(const nn::ParamStore& store, const Vec& feat, const Vec& act) const {
  return mean_target_.eval(store, join(feat, act))[0];
}
double SafetyCriticNets::v_target(const nn::ParamStore& store, const Vec& feat, const Vec& act) const {
  return var_target_.eval(store, join(feat, act))[0] + kVarFloor;
}

GaussianCostDistribution SafetyCriticNets::dist(const nn::ParamStore& store, const Vec& feat,
                                                const Vec& act) const {
  return GaussianCostDistribution(q(store, feat, act), v(store, feat, act));
}

double SafetyCriticNets::gamma_value(const nn::ParamStore& store, const Vec& feat, const Vec& act,
                                     double alpha) const {
  return cvar(q(store, feat, act), v(store, feat, act), alpha);
}

nn::Var SafetyCriticNets::q_var(nn::Tape& tape, nn::Var input, bool frozen) const {
  return mean_.forward(tape, input, frozen);
}

nn::Var SafetyCriticNets::v_var(nn::Tape& tape, nn::Var input, bool frozen) const {
  return tape.offset(var_.forward(tape, input, frozen), kVarFloor);
}

nn::Var SafetyCriticNets::gamma_var(nn::Tape& tape, nn::Var input, double alpha, bool frozen) const {
  const double k = normal_pdf(normal_quantile(alpha)) / alpha;
  nn::Var qv = q_var(tape, input, frozen);
  nn::Var sv = tape.sqrt_(v_var(tape, input, frozen));
  return tape.add(qv, tape.scale(sv, k));
}

SafetyCriticLoss critic_losses(std::span<const SafetyTransition> batch, const SafetyCriticNets& nets,
                               nn::ParamStore& store, double gamma) {
  if (batch.empty()) throw std::invalid_argument("critic_losses: empty batch");
  nn::Tape tape(&store);
  nn::Var jc_sum = tape.constant(0.0);
  nn::Var jv_sum = tape.constant(0.0);
  for (const auto& tr : batch) {
    const double next_q = tr.done ? 0.0 : nets.q_target(store, tr.next_state, tr.next_action);
    const double next_v = tr.done ? 0.0 : nets.v_target(store, tr.next_state, tr.next_action);
    const double qbar = q_c_target(tr.cost, gamma, next_q);
    const double q_here = nets.q_target(store, tr.state, tr.action);
    const double vbar = v_c_target(tr.cost, gamma, q_here, next_q, next_v, next_q * next_q);

    nn::Var input = tape.constant(join(tr.state, tr.action));
    nn::Var q_online = nets.q_var(tape, input, false);
    nn::Var dq = tape.sub(tape.constant(qbar), q_online);
    jc_sum = tape.add(jc_sum, tape.square(dq));

    nn::Var sv_online = tape.sqrt_(nets.v_var(tape, input, false));
    nn::Var dv = tape.sub(tape.constant(std::sqrt(vbar)), sv_online);
    jv_sum = tape.add(jv_sum, tape.square(dv));
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  nn::Var jc = tape.scale(jc_sum, inv_n);
  nn::Var jv = tape.scale(jv_sum, inv_n);
  nn::Var total = tape.add(jc, jv);
  SafetyCriticLoss out;
  out.j_c = tape.scalar(jc);
  out.j_v = tape.scalar(jv);
  if (!std::isfinite(out.j_c) || !std::isfinite(out.j_v)) {
    throw std::runtime_error("critic_losses: non-finite loss");
  }
  tape.backward(total);
  out.grads = tape.param_grads();
  return out;
}

}  // namespace safenav::safety
