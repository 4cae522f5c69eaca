#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "safenav/agent/trainer.hpp"
#include "safenav/harness/config.hpp"
#include "safenav/harness/eval.hpp"
#include "safenav/harness/metrics.hpp"
#include "safenav/harness/oracle_check.hpp"

namespace {

using namespace safenav;

int cmd_train(const std::string& config_path, std::uint64_t seed_override, bool has_seed,
              const std::string& out_dir, int checkpoint_every) {
  harness::ConfigMap cm =
      config_path.empty() ? harness::ConfigMap{} : harness::parse_config_file(config_path);
  agent::TrainConfig cfg = harness::train_config_from(cm);
  if (has_seed) cfg.seed = seed_override;
  const std::string scenario = harness::config_string(cm, "env.scenario", "hazard-grid");

  std::filesystem::create_directories(out_dir);
  envs::NavWorld env(envs::nav_preset(scenario));
  agent::Agent agent(env.obs_dim(), 2, cfg);
  agent.init();
  ReplayBuffer buffer(cfg.replay_capacity);
  agent::seed_buffer(buffer, env, cfg.seed_episodes, Rng(cfg.seed).split("seed_episodes"));

  std::ofstream log(out_dir + "/train_log.jsonl", std::ios::trunc);
  if (!log) {
    std::cerr << "cannot open " << out_dir << "/train_log.jsonl\n";
    return 1;
  }
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    agent::EpochStats stats;
    try {
      stats = agent::train_epoch(agent, buffer, env, epoch);
    } catch (const std::exception& ex) {
      std::cerr << "training diverged: " << ex.what() << "\n";
      return 3;
    }
    log << agent::stats_to_json(stats) << "\n";
    if (checkpoint_every > 0 && (epoch + 1) % checkpoint_every == 0) {
      agent.save(out_dir + "/checkpoint_" + std::to_string(epoch + 1) + ".bin");
    }
  }
  agent.save(out_dir + "/checkpoint_final.bin");
  std::cout << "trained " << cfg.epochs << " epochs on " << scenario << ", outputs in " << out_dir
            << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& config_path,
             const std::string& scenario, int episodes, std::uint64_t seed,
             const std::string& out_dir) {
  harness::ConfigMap cm =
      config_path.empty() ? harness::ConfigMap{} : harness::parse_config_file(config_path);
  agent::TrainConfig cfg = harness::train_config_from(cm);
  envs::NavWorld env(envs::nav_preset(scenario));
  agent::Agent agent(env.obs_dim(), 2, cfg);
  agent.init();
  agent.load(checkpoint);

  harness::EvalOptions opts;
  opts.scenario = scenario;
  opts.episodes = episodes;
  opts.seed = seed;
  const auto logs = harness::evaluate(agent, opts);
  harness::MetricsReport rep = harness::compute_report(logs);
  rep.config_digest = harness::config_digest(cm);

  std::filesystem::create_directories(out_dir);
  harness::write_metrics_csv(rep, out_dir + "/metrics.csv");
  harness::write_routes_csv(rep, out_dir + "/routes.csv");
  harness::write_episode_logs(logs, out_dir + "/episodes.jsonl");
  std::cout << "DS=" << rep.ds << " RC=" << rep.rc << " IS=" << rep.is << " CO=" << rep.co
            << " IPK=" << rep.ipk << " TTC=" << rep.ttc << " CR=" << rep.cr << "\n";
  return 0;
}

int cmd_sweep(const std::vector<std::string>& checkpoints, const std::vector<std::string>& names,
              const std::string& config_path, int episodes, std::uint64_t seed,
              const std::string& out_path) {
  harness::ConfigMap cm =
      config_path.empty() ? harness::ConfigMap{} : harness::parse_config_file(config_path);
  agent::TrainConfig cfg = harness::train_config_from(cm);
  std::vector<harness::SweepRow> rows;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    envs::NavWorld env(envs::nav_preset("dynamic-1"));
    agent::Agent agent(env.obs_dim(), 2, cfg);
    agent.init();
    agent.load(checkpoints[i]);
    const std::string name = i < names.size() ? names[i] : "variant" + std::to_string(i);
    const auto part = harness::sweep_variant(agent, name, episodes, seed);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  harness::write_sweep_csv(rows, out_path);
  for (const auto& r : rows) {
    std::cout << r.variant << " speed=" << r.obstacle_speed << " fail_rate=" << r.fail_rate
              << " avg_time=" << r.avg_time_s << " safety=" << r.safety << "\n";
  }
  return 0;
}

int cmd_report(const std::string& episodes_path, const std::string& out_dir) {
  const auto logs = harness::read_episode_logs(episodes_path);
  const harness::MetricsReport rep = harness::compute_report(logs);
  std::filesystem::create_directories(out_dir);
  harness::write_metrics_csv(rep, out_dir + "/metrics.csv");
  harness::write_routes_csv(rep, out_dir + "/routes.csv");
  std::cout << "report written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"safenav: CVaR-constrained model-based navigation agent"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "train an agent");
  std::string train_config, train_out = "out/train";
  std::uint64_t train_seed = 0;
  int checkpoint_every = 0;
  train->add_option("--config", train_config, "config file");
  train->add_option("--seed", train_seed, "seed override");
  train->add_option("--out", train_out, "output directory");
  train->add_option("--checkpoint-every", checkpoint_every, "epochs between checkpoints");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_ckpt, eval_config, eval_scenario = "corridor", eval_out = "out/eval";
  int eval_episodes = 10;
  std::uint64_t eval_seed = 1;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint path")->required();
  eval->add_option("--config", eval_config, "config file");
  eval->add_option("--scenario", eval_scenario, "scenario preset");
  eval->add_option("--episodes", eval_episodes, "episode count")
      ->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "evaluation seed");
  eval->add_option("--out", eval_out, "output directory");

  auto* sweep = app.add_subcommand("sweep", "obstacle-speed robustness sweep");
  std::vector<std::string> sweep_ckpts, sweep_names;
  std::string sweep_config, sweep_out = "out/sweep.csv";
  int sweep_episodes = 20;
  std::uint64_t sweep_seed = 1;
  sweep->add_option("--checkpoint", sweep_ckpts, "checkpoint path(s)")->required();
  sweep->add_option("--name", sweep_names, "variant name per checkpoint");
  sweep->add_option("--config", sweep_config, "config file");
  sweep->add_option("--episodes", sweep_episodes, "episodes per (variant, speed)")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_seed, "sweep seed");
  sweep->add_option("--out", sweep_out, "output CSV path");

  auto* oracle = app.add_subcommand("oracle-check", "run derived-value oracle suites");

  auto* report = app.add_subcommand("report", "episode logs -> metrics CSVs");
  std::string report_in, report_out = "out/report";
  report->add_option("--episodes", report_in, "episodes.jsonl path")->required();
  report->add_option("--out", report_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return cmd_train(train_config, train_seed, train->count("--seed") > 0, train_out,
                       checkpoint_every);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_ckpt, eval_config, eval_scenario, eval_episodes, eval_seed, eval_out);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_ckpts, sweep_names, sweep_config, sweep_episodes, sweep_seed,
                       sweep_out);
    }
    if (oracle->parsed()) {
      return safenav::harness::run_oracle_checks(std::cout) == 0 ? 0 : 2;
    }
    if (report->parsed()) return cmd_report(report_in, report_out);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
