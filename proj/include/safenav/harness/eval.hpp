#pragma once

#include <string>
#include <vector>

#include "safenav/agent/trainer.hpp"
#include "safenav/harness/metrics.hpp"

namespace safenav::harness {

struct EvalOptions {
  std::string scenario = "corridor";
  int episodes = 10;
  std::uint64_t seed = 1;
  bool deterministic = true;
  double explore_noise = 0.0;
};

// Maps an executed episode to its metrics inputs. Infraction typing:
// moving-obstacle collision -> Ped, static collision -> Stat, hazard-region
// entry -> Veh; Red never occurs in the 2D world.
EpisodeLog log_from_run(const agent::EpisodeRun& run, double dt);

// Runs `episodes` evaluation rollouts with per-episode derived seeds,
// aggregated in seed order (deterministic regardless of execution order).
std::vector<EpisodeLog> evaluate(const agent::Agent& agent, const EvalOptions& opts);

struct SweepRow {
  std::string variant;       // e.g. "safe", "unconstrained"
  double obstacle_speed = 0.0;  // m/s
  double fail_rate = 0.0;       // fraction of episodes not reaching the goal
  double avg_time_s = 0.0;      // mean simulated episode duration
  double safety = 0.0;          // safety_score proxy
};

// Obstacle-speed robustness sweep over the dynamic-{1,2,3} scenarios.
std::vector<SweepRow> sweep_variant(const agent::Agent& agent, const std::string& variant,
                                    int episodes, std::uint64_t seed);

// CSV writers. `metric,value,stderr` for the report (stderr of per-route
// values where it applies, 0 otherwise).
void write_metrics_csv(const MetricsReport& rep, const std::string& path);
void write_routes_csv(const MetricsReport& rep, const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

// Episode logs as JSONL and back, for the `report` subcommand.
void write_episode_logs(const std::vector<EpisodeLog>& logs, const std::string& path);
std::vector<EpisodeLog> read_episode_logs(const std::string& path);

}  // namespace safenav::harness
