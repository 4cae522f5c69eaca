#include "safenav/wm/world_model.hpp"

#include <cmath>
#include <stdexcept>

namespace safenav::wm {

namespace {
constexpr double kStdFloor = 1e-6;

Vec join(std::initializer_list<const Vec*> parts) {
  Vec out;
  std::size_t n = 0;
  for (const Vec* p : parts) n += p->size();
  out.reserve(n);
  for (const Vec* p : parts) out.insert(out.end(), p->begin(), p->end());
  return out;
}
}  // namespace

Vec DiagonalGaussian::sample(Rng& rng) const {
  Vec out(mean.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mean[i] + std[i] * rng.gaussian();
  return out;
}

double kl_divergence(const DiagonalGaussian& post, const DiagonalGaussian& prior) {
  if (post.dim() != prior.dim()) throw std::invalid_argument("kl_divergence: dimension mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < post.dim(); ++i) {
    const double s1 = post.std[i], s2 = prior.std[i];
    const double dm = post.mean[i] - prior.mean[i];
    kl += std::log(s2 / s1) + (s1 * s1 + dm * dm) / (2.0 * s2 * s2) - 0.5;
  }
  return kl;
}

DiffusionSchedule DiffusionSchedule::linear(int n_steps, double sigma_max, double sigma_min) {
  if (n_steps < 1) throw std::invalid_argument("DiffusionSchedule: n_steps must be >= 1");
  DiffusionSchedule s;
  s.noise_levels.resize(n_steps);
  if (n_steps == 1) {
    s.noise_levels[0] = sigma_max;
  } else {
    for (int i = 0; i < n_steps; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(n_steps - 1);
      s.noise_levels[i] = sigma_max + t * (sigma_min - sigma_max);
    }
  }
  s.validate();
  return s;
}

void DiffusionSchedule::validate() const {
  if (noise_levels.empty()) throw std::invalid_argument("DiffusionSchedule: empty");
  for (std::size_t i = 0; i < noise_levels.size(); ++i) {
    if (!(noise_levels[i] > 0.0)) throw std::invalid_argument("DiffusionSchedule: non-positive level");
    if (i > 0 && !(noise_levels[i] < noise_levels[i - 1])) {
      throw std::invalid_argument("DiffusionSchedule: levels must be strictly decreasing");
    }
  }
}

WorldModel::WorldModel(WorldModelSpec spec) : spec_(spec) {
  const std::size_t o = spec_.obs_dim, a = spec_.act_dim, h = spec_.h_dim, z = spec_.z_dim;
  const std::vector<std::size_t> hid{spec_.hidden, spec_.hidden};
  post_net_ = nn::Mlp("wm_post", {o + h, hid, 2 * z, nn::Act::Tanh, nn::Act::Identity});
  prior_net_ = nn::Mlp("wm_prior", {h, hid, 2 * z, nn::Act::Tanh, nn::Act::Identity});
  gate_net_ = nn::Mlp("wm_gate", {h + z + a, {spec_.hidden}, h, nn::Act::Tanh, nn::Act::Identity});
  cand_net_ = nn::Mlp("wm_cand", {h + z + a, {spec_.hidden}, h, nn::Act::Tanh, nn::Act::Identity});
  obs_head_ = nn::Mlp("wm_obs", {h + z, hid, o, nn::Act::Tanh, nn::Act::Identity});
  reward_head_ = nn::Mlp("wm_reward", {h + z, hid, 1, nn::Act::Tanh, nn::Act::Identity});
  cost_head_ = nn::Mlp("wm_cost", {h + z, hid, 1, nn::Act::Tanh, nn::Act::Softplus});
  denoiser_ = nn::Mlp("wm_denoise", {z + h + 1, hid, z, nn::Act::Tanh, nn::Act::Identity});
}

void WorldModel::init(nn::ParamStore& store, Rng rng) const {
  post_net_.init(store, rng.split("wm_post"));
  prior_net_.init(store, rng.split("wm_prior"));
  gate_net_.init(store, rng.split("wm_gate"));
  cand_net_.init(store, rng.split("wm_cand"));
  obs_head_.init(store, rng.split("wm_obs"));
  reward_head_.init(store, rng.split("wm_reward"));
  cost_head_.init(store, rng.split("wm_cost"));
  denoiser_.init(store, rng.split("wm_denoise"));
}

LatentState WorldModel::initial_state() const {
  return LatentState{Vec(spec_.h_dim, 0.0), Vec(spec_.z_dim, 0.0)};
}

static DiagonalGaussian split_gauss(const Vec& raw, std::size_t z_dim) {
  DiagonalGaussian g;
  g.mean.assign(raw.begin(), raw.begin() + z_dim);
  g.std.resize(z_dim);
  for (std::size_t i = 0; i < z_dim; ++i) {
    const double r = raw[z_dim + i];
    // softplus + floor, matching the tape-level head
    const double sp = r > 30.0 ? r : std::log1p(std::exp(r));
    g.std[i] = sp + kStdFloor;
  }
  return g;
}

DiagonalGaussian WorldModel::posterior(const nn::ParamStore& store, const Vec& o, const Vec& h) const {
  if (o.size() != spec_.obs_dim || h.size() != spec_.h_dim) {
    throw std::invalid_argument("posterior: shape mismatch");
  }
  return split_gauss(post_net_.eval(store, join({&o, &h})), spec_.z_dim);
}

DiagonalGaussian WorldModel::prior(const nn::ParamStore& store, const Vec& h) const {
  if (h.size() != spec_.h_dim) throw std::invalid_argument("prior: shape mismatch");
  return split_gauss(prior_net_.eval(store, join({&h})), spec_.z_dim);
}

Vec WorldModel::recurrent_step(const nn::ParamStore& store, const Vec& h, const Vec& z,
                               const Vec& a) const {
  if (h.size() != spec_.h_dim || z.size() != spec_.z_dim || a.size() != spec_.act_dim) {
    throw std::invalid_argument("recurrent_step: shape mismatch");
  }
  const Vec in = join({&h, &z, &a});
  const Vec gate = gate_net_.eval(store, in);
  const Vec cand = cand_net_.eval(store, in);
  Vec out(spec_.h_dim);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 / (1.0 + std::exp(-gate[i]))) * std::tanh(cand[i]);
  }
  return out;
}

std::tuple<Vec, double, double> WorldModel::decode_heads(const nn::ParamStore& store, const Vec& h,
                                                         const Vec& z) const {
  const Vec in = join({&h, &z});
  Vec obs = obs_head_.eval(store, in);
  const double r = reward_head_.eval(store, in)[0];
  const double c = cost_head_.eval(store, in)[0];
  return {std::move(obs), r, c};
}

WorldModel::GaussVar WorldModel::posterior_var(nn::Tape& tape, nn::Var o, nn::Var h,
                                               bool frozen) const {
  nn::Var raw = post_net_.forward(tape, tape.concat(o, h), frozen);
  GaussVar g;
  g.mean = tape.slice(raw, 0, spec_.z_dim);
  g.std = tape.offset(tape.softplus(tape.slice(raw, spec_.z_dim, spec_.z_dim)), kStdFloor);
  return g;
}

WorldModel::GaussVar WorldModel::prior_var(nn::Tape& tape, nn::Var h, bool frozen) const {
  nn::Var raw = prior_net_.forward(tape, h, frozen);
  GaussVar g;
  g.mean = tape.slice(raw, 0, spec_.z_dim);
  g.std = tape.offset(tape.softplus(tape.slice(raw, spec_.z_dim, spec_.z_dim)), kStdFloor);
  return g;
}

nn::Var WorldModel::recurrent_var(nn::Tape& tape, nn::Var h, nn::Var z, nn::Var a,
                                  bool frozen) const {
  nn::Var in = tape.concat(tape.concat(h, z), a);
  nn::Var gate = tape.sigmoid(gate_net_.forward(tape, in, frozen));
  nn::Var cand = tape.tanh_(cand_net_.forward(tape, in, frozen));
  return tape.mul(gate, cand);
}

WorldModel::HeadsVar WorldModel::heads_var(nn::Tape& tape, nn::Var h, nn::Var z, bool frozen) const {
  nn::Var in = tape.concat(h, z);
  HeadsVar out;
  out.obs = obs_head_.forward(tape, in, frozen);
  out.reward = reward_head_.forward(tape, in, frozen);
  out.cost = cost_head_.forward(tape, in, frozen);
  return out;
}

nn::Var WorldModel::kl_var(nn::Tape& tape, const GaussVar& post, const GaussVar& prior) const {
  nn::Var log_ratio = tape.log_(tape.div(prior.std, post.std));
  nn::Var num = tape.add(tape.square(post.std), tape.square(tape.sub(post.mean, prior.mean)));
  nn::Var den = tape.scale(tape.square(prior.std), 2.0);
  nn::Var per_dim = tape.add(log_ratio, tape.div(num, den));
  return tape.offset(tape.sum(per_dim), -0.5 * static_cast<double>(post.mean.size));
}

nn::Var WorldModel::denoiser_var(nn::Tape& tape, nn::Var z_noisy, nn::Var h, double sigma,
                                 bool frozen) const {
  nn::Var in = tape.concat(tape.concat(z_noisy, h), tape.constant(sigma));
  return denoiser_.forward(tape, in, frozen);
}

Vec WorldModel::denoise_eval(const nn::ParamStore& store, const Vec& z_noisy, const Vec& h,
                             double sigma) const {
  const Vec sig{sigma};
  return denoiser_.eval(store, join({&z_noisy, &h, &sig}));
}

WorldModelLoss WorldModel::world_model_loss(std::span<const SequenceWindow> batch,
                                            nn::ParamStore& store, Rng& rng) const {
  if (batch.empty()) throw std::invalid_argument("world_model_loss: empty batch");
  nn::Tape tape(&store);
  nn::Var recon_sum = tape.constant(0.0);
  nn::Var reward_sum = tape.constant(0.0);
  nn::Var cost_sum = tape.constant(0.0);
  nn::Var kl_sum = tape.constant(0.0);
  for (const auto& win : batch) {
    nn::Var h = tape.constant(Vec(spec_.h_dim, 0.0));
    for (std::size_t t = 0; t < win.length; ++t) {
      const TransitionStep& st = win.step(t);
      nn::Var o = tape.constant(st.observation);
      GaussVar post = posterior_var(tape, o, h, false);
      GaussVar prior = prior_var(tape, h, false);

      Vec eps(spec_.z_dim);
      for (double& e : eps) e = rng.gaussian();
      nn::Var z = tape.add(post.mean, tape.mul(post.std, tape.constant(eps)));

      HeadsVar heads = heads_var(tape, h, z, false);
      nn::Var d_obs = tape.sub(o, heads.obs);
      recon_sum = tape.add(recon_sum, tape.sum(tape.square(d_obs)));
      nn::Var d_r = tape.sub(tape.constant(st.reward), heads.reward);
      reward_sum = tape.add(reward_sum, tape.square(d_r));
      nn::Var d_c = tape.sub(tape.constant(st.cost), heads.cost);
      cost_sum = tape.add(cost_sum, tape.square(d_c));
      kl_sum = tape.add(kl_sum, tape.clamp_min(kl_var(tape, post, prior), spec_.free_bits));

      h = recurrent_var(tape, h, z, tape.constant(st.action), false);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  nn::Var recon = tape.scale(recon_sum, inv_n);
  nn::Var reward = tape.scale(reward_sum, inv_n);
  nn::Var cost = tape.scale(cost_sum, inv_n);
  nn::Var kl = tape.scale(kl_sum, inv_n);
  nn::Var total = tape.add(tape.add(recon, reward), tape.add(cost, tape.scale(kl, spec_.beta_kl)));

  WorldModelLoss out;
  out.total = tape.scalar(total);
  out.recon = tape.scalar(recon);
  out.reward = tape.scalar(reward);
  out.cost = tape.scalar(cost);
  out.kl = tape.scalar(kl);
  if (!std::isfinite(out.total)) throw std::runtime_error("world_model_loss: non-finite loss");
  tape.backward(total);
  out.grads = tape.param_grads();
  return out;
}

WorldModel::DenoiserLoss WorldModel::denoiser_loss(std::span<const Vec> z_clean,
                                                   std::span<const Vec> contexts,
                                                   const DiffusionSchedule& schedule,
                                                   nn::ParamStore& store, Rng& rng) const {
  if (z_clean.empty() || z_clean.size() != contexts.size()) {
    throw std::invalid_argument("denoiser_loss: batch size mismatch");
  }
  schedule.validate();
  nn::Tape tape(&store);
  nn::Var sum = tape.constant(0.0);
  for (std::size_t i = 0; i < z_clean.size(); ++i) {
    const double sigma =
        schedule.noise_levels[rng.below(static_cast<std::uint64_t>(schedule.n_steps()))];
    Vec eps(spec_.z_dim);
    Vec noisy = z_clean[i];
    for (std::size_t j = 0; j < spec_.z_dim; ++j) {
      eps[j] = rng.gaussian();
      noisy[j] += sigma * eps[j];
    }
    nn::Var pred = denoiser_var(tape, tape.constant(noisy), tape.constant(contexts[i]), sigma, false);
    nn::Var diff = tape.sub(pred, tape.constant(eps));
    sum = tape.add(sum, tape.mean(tape.square(diff)));
  }
  nn::Var loss = tape.scale(sum, 1.0 / static_cast<double>(z_clean.size()));
  DenoiserLoss out;
  out.loss = tape.scalar(loss);
  if (!std::isfinite(out.loss)) throw std::runtime_error("denoiser_loss: non-finite loss");
  tape.backward(loss);
  out.grads = tape.param_grads();
  return out;
}

std::vector<ImaginedStep> WorldModel::imagine(const nn::ParamStore& store, const LatentState& start,
                                              const PolicyFn& policy, int horizon, Rng rng) const {
  if (horizon < 1) throw std::invalid_argument("imagine: horizon must be >= 1");
  std::vector<ImaginedStep> out;
  out.reserve(horizon);
  Vec h = start.h;
  Vec z = start.z;
  for (int t = 0; t < horizon; ++t) {
    if (t > 0) z = prior(store, h).sample(rng);
    ImaginedStep step;
    step.state = LatentState{h, z};
    auto [obs, r, c] = decode_heads(store, h, z);
    step.decoded_obs = std::move(obs);
    step.reward_hat = r;
    step.cost_hat = c;
    step.action = policy(step.decoded_obs, z, rng);
    h = recurrent_step(store, h, z, step.action);
    out.push_back(std::move(step));
  }
  return out;
}

std::vector<Vec> WorldModel::diffusion_sample_candidates(const nn::ParamStore& store,
                                                         const LatentState& context, int k,
                                                         const DiffusionSchedule& schedule,
                                                         Rng& rng) const {
  if (k < 1) throw std::invalid_argument("diffusion_sample_candidates: k must be >= 1");
  schedule.validate();
  std::vector<Vec> out;
  out.reserve(k);
  const auto& levels = schedule.noise_levels;
  for (int c = 0; c < k; ++c) {
    Vec z(spec_.z_dim);
    for (double& zi : z) zi = rng.gaussian();
    for (std::size_t s = 0; s < levels.size(); ++s) {
      const Vec eps_hat = denoise_eval(store, z, context.h, levels[s]);
      const double step = levels[s] - (s + 1 < levels.size() ? levels[s + 1] : 0.0);
      for (std::size_t j = 0; j < spec_.z_dim; ++j) z[j] -= step * eps_hat[j];
    }
    out.push_back(std::move(z));
  }
  return out;
}

std::size_t select_candidate(std::span<const Vec> candidates,
                             const std::function<double(const Vec&)>& q_of,
                             const std::function<double(const Vec&)>& gamma_of, double budget) {
  if (candidates.empty()) throw std::invalid_argument("select_candidate: no candidates");
  std::size_t best_safe = candidates.size();
  double best_q = 0.0;
  std::size_t best_any = 0;
  double best_gamma = gamma_of(candidates[0]);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double g = gamma_of(candidates[i]);
    if (g < best_gamma) {
      best_gamma = g;
      best_any = i;
    }
    if (g <= budget) {
      const double q = q_of(candidates[i]);
      if (best_safe == candidates.size() || q > best_q) {
        best_safe = i;
        best_q = q;
      }
    }
  }
  return best_safe < candidates.size() ? best_safe : best_any;
}

}  // namespace safenav::wm
