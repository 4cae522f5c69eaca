#include "safenav/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safenav::harness {

namespace {
constexpr double kPed = 0.50, kVeh = 0.60, kStat = 0.65, kRed = 0.70;

double route_completion_01(const EpisodeLog& log, double penalty_per_m) {
  return std::max(0.0, log.route_completion_fraction - penalty_per_m * log.off_route_distance_m);
}
}  // namespace

double route_completion(std::span<const EpisodeLog> logs, double off_route_penalty_per_m) {
  if (logs.empty()) throw std::invalid_argument("route_completion: no episode logs");
  double sum = 0.0;
  for (const auto& log : logs) sum += route_completion_01(log, off_route_penalty_per_m);
  return 100.0 * sum / static_cast<double>(logs.size());
}

double infraction_score(const InfractionCounts& counts) {
  if (counts.ped < 0 || counts.veh < 0 || counts.stat < 0 || counts.red < 0) {
    throw std::invalid_argument("infraction_score: negative count");
  }
  return std::pow(kPed, counts.ped) * std::pow(kVeh, counts.veh) * std::pow(kStat, counts.stat) *
         std::pow(kRed, counts.red);
}

double driving_score(std::span<const double> route_completion_01,
                     std::span<const double> infraction_scores) {
  if (route_completion_01.size() != infraction_scores.size()) {
    throw std::invalid_argument("driving_score: length mismatch");
  }
  if (route_completion_01.empty()) throw std::invalid_argument("driving_score: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < route_completion_01.size(); ++i) {
    sum += route_completion_01[i] * infraction_scores[i];
  }
  return sum / static_cast<double>(route_completion_01.size());
}

double collision_occurrences(int collisions, double distance_km) {
  if (!(distance_km > 0.0)) throw std::invalid_argument("collision_occurrences: zero distance");
  return 100.0 * static_cast<double>(collisions) / distance_km;
}

double infractions_per_km(std::span<const double> infractions,
                          std::span<const double> distances_km) {
  if (infractions.size() != distances_km.size()) {
    throw std::invalid_argument("infractions_per_km: length mismatch");
  }
  double total_i = 0.0, total_k = 0.0;
  for (std::size_t i = 0; i < infractions.size(); ++i) {
    total_i += infractions[i];
    total_k += distances_km[i];
  }
  if (!(total_k > 0.0)) throw std::invalid_argument("infractions_per_km: zero total distance");
  return total_i / total_k;
}

std::optional<double> time_to_collision(double distance_m, double v_rel_mps) {
  if (distance_m < 0.0) throw std::invalid_argument("time_to_collision: negative distance");
  if (v_rel_mps > 0.0) return distance_m / v_rel_mps;
  return std::nullopt;
}

double collision_rate(int collisions, double distance_km) {
  if (!(distance_km > 0.0)) throw std::invalid_argument("collision_rate: zero distance");
  return static_cast<double>(collisions) / distance_km;
}

double safety_score(double is, double cr) { return 100.0 * is * (1.0 - cr / (1.0 + cr)); }

MetricsReport compute_report(std::span<const EpisodeLog> logs, double off_route_penalty_per_m) {
  if (logs.empty()) throw std::invalid_argument("compute_report: no episode logs");
  MetricsReport rep;
  std::vector<double> rc01, is_scores, infra, dist;
  int total_collisions = 0;
  double total_km = 0.0, ttc_sum = 0.0;
  int ttc_count = 0;
  for (const auto& log : logs) {
    const double r = route_completion_01(log, off_route_penalty_per_m);
    const double p = infraction_score(log.infractions);
    rc01.push_back(r);
    is_scores.push_back(p);
    infra.push_back(static_cast<double>(log.infractions.ped + log.infractions.veh +
                                        log.infractions.stat + log.infractions.red));
    dist.push_back(log.distance_driven_km);
    total_collisions += log.collisions;
    total_km += log.distance_driven_km;
    if (log.min_ttc_s >= 0.0) {
      ttc_sum += log.min_ttc_s;
      ++ttc_count;
    }
    RouteRow row;
    row.route_id = log.seed;
    row.rc = 100.0 * r;
    row.is = p;
    row.ds = r * p;
    row.collisions = log.collisions;
    row.distance_km = log.distance_driven_km;
    row.min_ttc = log.min_ttc_s;
    rep.routes.push_back(row);
  }
  rep.rc = route_completion(logs, off_route_penalty_per_m);
  rep.ds = driving_score(rc01, is_scores);
  double is_sum = 0.0;
  for (const double p : is_scores) is_sum += p;
  rep.is = is_sum / static_cast<double>(is_scores.size());
  rep.co = total_km > 0.0 ? collision_occurrences(total_collisions, total_km) : 0.0;
  rep.ipk = total_km > 0.0 ? infractions_per_km(infra, dist) : 0.0;
  rep.ttc = ttc_count > 0 ? ttc_sum / static_cast<double>(ttc_count) : -1.0;
  rep.cr = total_km > 0.0 ? collision_rate(total_collisions, total_km) : 0.0;
  return rep;
}

}  // namespace safenav::harness
