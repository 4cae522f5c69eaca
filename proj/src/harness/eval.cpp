#include "safenav/harness/eval.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace safenav::harness {

namespace {
std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(17);
  return out;
}

double stderr_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (const double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}
}  // namespace

EpisodeLog log_from_run(const agent::EpisodeRun& run, double dt) {
  EpisodeLog log;
  log.route_completion_fraction = run.episode.completed_fraction;
  log.off_route_distance_m = run.off_route_m;
  log.infractions.ped = run.collisions_moving;
  log.infractions.stat = run.collisions_static;
  log.infractions.veh = run.hazard_entries;
  log.infractions.red = 0;
  log.collisions = run.collisions_moving + run.collisions_static;
  log.distance_driven_km = run.distance_m / 1000.0;
  log.min_ttc_s = run.min_ttc;
  log.sim_time_s = static_cast<double>(run.episode.size()) * dt;
  log.seed = run.episode.seed;
  log.reached_goal = run.reached_goal;
  return log;
}

std::vector<EpisodeLog> evaluate(const agent::Agent& agent, const EvalOptions& opts) {
  if (opts.episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  envs::NavWorld env(envs::nav_preset(opts.scenario));
  Rng root = Rng(opts.seed).split("eval").split(opts.scenario);
  std::vector<EpisodeLog> logs;
  logs.reserve(opts.episodes);
  for (int i = 0; i < opts.episodes; ++i) {
    Rng er = root.split(static_cast<std::uint64_t>(i));
    const agent::EpisodeRun run = run_episode(agent, env, er.split("env_seed").seed(),
                                              er.split("policy"), opts.explore_noise,
                                              opts.deterministic);
    logs.push_back(log_from_run(run, env.config().dt));
  }
  return logs;
}

std::vector<SweepRow> sweep_variant(const agent::Agent& agent, const std::string& variant,
                                    int episodes, std::uint64_t seed) {
  std::vector<SweepRow> rows;
  for (int speed = 1; speed <= 3; ++speed) {
    EvalOptions opts;
    opts.scenario = "dynamic-" + std::to_string(speed);
    opts.episodes = episodes;
    opts.seed = seed;
    const auto logs = evaluate(agent, opts);
    SweepRow row;
    row.variant = variant;
    row.obstacle_speed = static_cast<double>(speed);
    int fails = 0;
    double time_sum = 0.0;
    for (const auto& log : logs) {
      if (!log.reached_goal) ++fails;
      time_sum += log.sim_time_s;
    }
    row.fail_rate = static_cast<double>(fails) / static_cast<double>(logs.size());
    row.avg_time_s = time_sum / static_cast<double>(logs.size());
    const MetricsReport rep = compute_report(logs);
    row.safety = safety_score(rep.is, rep.cr);
    rows.push_back(row);
  }
  return rows;
}

void write_metrics_csv(const MetricsReport& rep, const std::string& path) {
  std::vector<double> rc, is, ds;
  for (const auto& r : rep.routes) {
    rc.push_back(r.rc);
    is.push_back(r.is);
    ds.push_back(r.ds);
  }
  auto out = open_out(path);
  out << "metric,value,stderr\n";
  out << "DS," << rep.ds << "," << stderr_of(ds) << "\n";
  out << "RC," << rep.rc << "," << stderr_of(rc) << "\n";
  out << "IS," << rep.is << "," << stderr_of(is) << "\n";
  out << "CO," << rep.co << ",0\n";
  out << "IPK," << rep.ipk << ",0\n";
  out << "TTC," << rep.ttc << ",0\n";
  out << "CR," << rep.cr << ",0\n";
}

void write_routes_csv(const MetricsReport& rep, const std::string& path) {
  auto out = open_out(path);
  out << "route_id,rc,is,ds,collisions,distance_km,min_ttc\n";
  for (const auto& r : rep.routes) {
    out << r.route_id << "," << r.rc << "," << r.is << "," << r.ds << "," << r.collisions << ","
        << r.distance_km << "," << r.min_ttc << "\n";
  }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  auto out = open_out(path);
  out << "variant,obstacle_speed,fail_rate,avg_time_s,safety_score\n";
  for (const auto& r : rows) {
    out << r.variant << "," << r.obstacle_speed << "," << r.fail_rate << "," << r.avg_time_s << ","
        << r.safety << "\n";
  }
}

void write_episode_logs(const std::vector<EpisodeLog>& logs, const std::string& path) {
  auto out = open_out(path);
  for (const auto& log : logs) {
    nlohmann::ordered_json j;
    j["seed"] = log.seed;
    j["route_completion_fraction"] = log.route_completion_fraction;
    j["off_route_distance_m"] = log.off_route_distance_m;
    j["ped"] = log.infractions.ped;
    j["veh"] = log.infractions.veh;
    j["stat"] = log.infractions.stat;
    j["red"] = log.infractions.red;
    j["collisions"] = log.collisions;
    j["distance_driven_km"] = log.distance_driven_km;
    j["min_ttc_s"] = log.min_ttc_s;
    j["sim_time_s"] = log.sim_time_s;
    j["reached_goal"] = log.reached_goal;
    out << j.dump() << "\n";
  }
}

std::vector<EpisodeLog> read_episode_logs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open episode log: " + path);
  std::vector<EpisodeLog> logs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    EpisodeLog log;
    log.seed = j.at("seed").get<std::uint64_t>();
    log.route_completion_fraction = j.at("route_completion_fraction").get<double>();
    log.off_route_distance_m = j.at("off_route_distance_m").get<double>();
    log.infractions.ped = j.at("ped").get<int>();
    log.infractions.veh = j.at("veh").get<int>();
    log.infractions.stat = j.at("stat").get<int>();
    log.infractions.red = j.at("red").get<int>();
    log.collisions = j.at("collisions").get<int>();
    log.distance_driven_km = j.at("distance_driven_km").get<double>();
    log.min_ttc_s = j.at("min_ttc_s").get<double>();
    log.sim_time_s = j.at("sim_time_s").get<double>();
    log.reached_goal = j.at("reached_goal").get<bool>();
    logs.push_back(log);
  }
  return logs;
}

}  // namespace safenav::harness
