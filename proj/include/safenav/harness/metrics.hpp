#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace safenav::harness {

struct InfractionCounts {
  int ped = 0;   // collision with a moving obstacle
  int veh = 0;   // hazard-region entry
  int stat = 0;  // collision with a static obstacle
  int red = 0;   // rule infraction (unused by the 2D world, kept for parity)
};

struct EpisodeLog {
  double route_completion_fraction = 0.0;  // in [0,1]
  double off_route_distance_m = 0.0;
  InfractionCounts infractions;
  int collisions = 0;
  double distance_driven_km = 0.0;
  double min_ttc_s = -1.0;  // < 0 when never on a collision course
  double sim_time_s = 0.0;  // simulated episode duration (deterministic)
  std::uint64_t seed = 0;
  bool reached_goal = false;
};

struct RouteRow {
  std::uint64_t route_id = 0;
  double rc = 0.0;  // percent
  double is = 0.0;
  double ds = 0.0;  // in [0,1]
  int collisions = 0;
  double distance_km = 0.0;
  double min_ttc = -1.0;
};

struct MetricsReport {
  double ds = 0.0;   // mean per-route R_i * P_i, in [0,1]
  double rc = 0.0;   // percent
  double is = 0.0;   // mean per-route infraction score
  double co = 0.0;   // collisions per km * 100
  double ipk = 0.0;  // infractions per km
  double ttc = 0.0;  // mean min-TTC over routes that had one, seconds
  double cr = 0.0;   // collisions per km
  std::vector<RouteRow> routes;
  std::string config_digest;
};

// Mean over routes of max(0, fraction - penalty_per_m * off_route_m) * 100.
double route_completion(std::span<const EpisodeLog> logs, double off_route_penalty_per_m = 0.01);

// Product of p_j^count_j with p = {Ped 0.50, Veh 0.60, Stat 0.65, Red 0.70}.
double infraction_score(const InfractionCounts& counts);

// Mean of R_i * P_i; throws on length mismatch or empty input.
double driving_score(std::span<const double> route_completion_01,
                     std::span<const double> infraction_scores);

// (collisions / distance_km) * 100; throws on distance <= 0.
double collision_occurrences(int collisions, double distance_km);

// Sum(I) / Sum(K); throws when total distance <= 0.
double infractions_per_km(std::span<const double> infractions, std::span<const double> distances_km);

// distance / closing speed when closing, else nullopt.
std::optional<double> time_to_collision(double distance_m, double v_rel_mps);

// collisions / distance_km; throws on distance <= 0.
double collision_rate(int collisions, double distance_km);

// Proxy used by the sweep tables: 100 * IS * (1 - CR/(1+CR)).
double safety_score(double is, double cr);

MetricsReport compute_report(std::span<const EpisodeLog> logs,
                             double off_route_penalty_per_m = 0.01);

}  // namespace safenav::harness
