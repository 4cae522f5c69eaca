#include "safenav/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace safenav::harness {

namespace {
std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": unclosed section");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    }
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

double config_double(const ConfigMap& cfg, const std::string& key, double fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  std::size_t pos = 0;
  const double v = std::stod(it->second, &pos);
  if (pos != it->second.size()) throw std::invalid_argument("config " + key + ": not a number");
  return v;
}

long config_int(const ConfigMap& cfg, const std::string& key, long fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  std::size_t pos = 0;
  const long v = std::stol(it->second, &pos);
  if (pos != it->second.size()) throw std::invalid_argument("config " + key + ": not an integer");
  return v;
}

bool config_bool(const ConfigMap& cfg, const std::string& key, bool fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::invalid_argument("config " + key + ": expected true/false");
}

std::string config_string(const ConfigMap& cfg, const std::string& key, std::string fallback) {
  const auto it = cfg.find(key);
  return it == cfg.end() ? std::move(fallback) : it->second;
}

agent::TrainConfig train_config_from(const ConfigMap& cfg) {
  static const std::set<std::string> known{
      "model.h_dim",        "model.z_dim",          "model.hidden",
      "model.lr_model",     "model.lr_denoiser",    "model.diffusion_k",
      "model.diffusion_steps",
      "train.lr_reward",    "train.lr_policy",      "train.lr_cost_q",
      "train.lr_cost_v",    "train.lr_beta",        "train.lr_kappa",
      "train.tau",          "train.reward_scale",   "train.imagine_horizon", "train.batch",
      "train.seq_len",      "train.gamma",          "train.rho",
      "train.beta_init",    "train.kappa_init",     "train.explore_noise_start",
      "train.explore_noise_end", "train.epochs",    "train.updates_per_epoch",
      "train.seed_episodes",
      "train.replay_capacity", "train.seed",        "train.constrain_policy",
      "train.use_barrier",  "train.barrier_weight", "train.use_screening",
      "train.replay_behavior",
      "risk.d",             "risk.alpha",           "risk.barrier_decay",
      "risk.barrier_degree_m", "risk.entropy_floor"};
  for (const auto& [key, _] : cfg) {
    const bool owned = key.rfind("model.", 0) == 0 || key.rfind("train.", 0) == 0 ||
                       key.rfind("risk.", 0) == 0;
    if (owned && known.count(key) == 0) throw std::invalid_argument("unknown config key: " + key);
  }
  agent::TrainConfig c;
  c.h_dim = static_cast<std::size_t>(config_int(cfg, "model.h_dim", static_cast<long>(c.h_dim)));
  c.z_dim = static_cast<std::size_t>(config_int(cfg, "model.z_dim", static_cast<long>(c.z_dim)));
  c.hidden = static_cast<std::size_t>(config_int(cfg, "model.hidden", static_cast<long>(c.hidden)));
  c.lr_model = config_double(cfg, "model.lr_model", c.lr_model);
  c.lr_denoiser = config_double(cfg, "model.lr_denoiser", c.lr_denoiser);
  c.diffusion_k = static_cast<int>(config_int(cfg, "model.diffusion_k", c.diffusion_k));
  c.diffusion_steps = static_cast<int>(config_int(cfg, "model.diffusion_steps", c.diffusion_steps));
  c.lr_reward = config_double(cfg, "train.lr_reward", c.lr_reward);
  c.lr_policy = config_double(cfg, "train.lr_policy", c.lr_policy);
  c.lr_cost_q = config_double(cfg, "train.lr_cost_q", c.lr_cost_q);
  c.lr_cost_v = config_double(cfg, "train.lr_cost_v", c.lr_cost_v);
  c.lr_beta = config_double(cfg, "train.lr_beta", c.lr_beta);
  c.lr_kappa = config_double(cfg, "train.lr_kappa", c.lr_kappa);
  c.tau = config_double(cfg, "train.tau", c.tau);
  c.reward_scale = config_double(cfg, "train.reward_scale", c.reward_scale);
  c.imagine_horizon = static_cast<int>(config_int(cfg, "train.imagine_horizon", c.imagine_horizon));
  c.batch = static_cast<std::size_t>(config_int(cfg, "train.batch", static_cast<long>(c.batch)));
  c.seq_len = static_cast<std::size_t>(config_int(cfg, "train.seq_len", static_cast<long>(c.seq_len)));
  c.gamma = config_double(cfg, "train.gamma", c.gamma);
  c.rho = config_double(cfg, "train.rho", c.rho);
  c.beta_init = config_double(cfg, "train.beta_init", c.beta_init);
  c.kappa_init = config_double(cfg, "train.kappa_init", c.kappa_init);
  c.explore_noise_start = config_double(cfg, "train.explore_noise_start", c.explore_noise_start);
  c.explore_noise_end = config_double(cfg, "train.explore_noise_end", c.explore_noise_end);
  c.epochs = static_cast<int>(config_int(cfg, "train.epochs", c.epochs));
  c.updates_per_epoch =
      static_cast<int>(config_int(cfg, "train.updates_per_epoch", c.updates_per_epoch));
  c.seed_episodes =
      static_cast<std::size_t>(config_int(cfg, "train.seed_episodes", static_cast<long>(c.seed_episodes)));
  c.replay_capacity = static_cast<std::size_t>(
      config_int(cfg, "train.replay_capacity", static_cast<long>(c.replay_capacity)));
  c.seed = static_cast<std::uint64_t>(config_int(cfg, "train.seed", static_cast<long>(c.seed)));
  c.constrain_policy = config_bool(cfg, "train.constrain_policy", c.constrain_policy);
  c.use_barrier = config_bool(cfg, "train.use_barrier", c.use_barrier);
  c.barrier_weight = config_double(cfg, "train.barrier_weight", c.barrier_weight);
  c.use_screening = config_bool(cfg, "train.use_screening", c.use_screening);
  c.replay_behavior = config_bool(cfg, "train.replay_behavior", c.replay_behavior);
  c.budget.d = config_double(cfg, "risk.d", c.budget.d);
  c.budget.alpha = config_double(cfg, "risk.alpha", c.budget.alpha);
  c.budget.barrier_decay = config_double(cfg, "risk.barrier_decay", c.budget.barrier_decay);
  c.budget.barrier_degree_m =
      static_cast<int>(config_int(cfg, "risk.barrier_degree_m", c.budget.barrier_degree_m));
  c.budget.entropy_floor = config_double(cfg, "risk.entropy_floor", c.budget.entropy_floor);
  c.validate();
  return c;
}

std::string config_digest(const ConfigMap& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const std::string& s) {
    for (const char c : s) {
      h ^= static_cast<std::uint8_t>(c);
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [key, value] : cfg) {
    feed(key);
    feed("=");
    feed(value);
    feed("\n");
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace safenav::harness
