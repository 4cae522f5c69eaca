#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "safenav/core/rng.hpp"
#include "safenav/core/types.hpp"
#include "safenav/envs/rewards.hpp"

namespace safenav::envs {

struct Disc {
  double x = 0.0, y = 0.0, r = 0.0;
};

struct RectRegion {
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
};

// Constant-speed obstacle looping along a piecewise-linear path.
struct MovingObstacle {
  std::vector<std::array<double, 2>> waypoints;  // closed by wrap-around
  double speed = 1.0;                            // m/s
  double radius = 0.4;                           // m
  double start_phase = 0.0;                      // m along path
};

struct NavWorldConfig {
  double arena_w = 40.0, arena_h = 12.0;  // m
  double corridor_half_width = 2.0;       // d_max, m
  double v_target = 1.5;                  // m/s
  double v_max = 3.0;
  double accel_max = 1.5;      // m/s^2
  double steer_rate_max = 1.5; // rad/s

  std::array<double, 2> start{2.0, 6.0};
  double start_heading = 0.0;
  std::array<double, 2> goal{38.0, 6.0};
  double goal_radius = 0.8;

  std::vector<Disc> hazard_discs;        // unsafe set S_u
  std::vector<RectRegion> hazard_rects;
  std::vector<Disc> static_obstacles;
  std::vector<MovingObstacle> moving_obstacles;

  double dt = 0.1;       // s
  int time_limit = 400;  // steps

  RewardWeights weights;
  double lambda = 0.5;  // velocity shaping
  double mu = 1.0;      // orientation shaping
  double nu = 0.1;      // exploration decay

  double safety_margin = 1.0;  // m, proximity-cost range
  double ego_radius = 0.3;     // m
  double visit_cell = 1.0;     // m
  double phase_jitter = 1.0;   // m, seed jitter on moving-obstacle phases

  int n_rays = 9;
  double ray_max = 10.0;  // m

  void validate() const;  // throws listing every invalid field
};

struct EgoState {
  double x = 0.0, y = 0.0;
  double theta = 0.0;   // heading, rad
  double v = 0.0;       // speed, >= 0
  double d_offset = 0.0;     // |lateral offset from route centerline|
  double theta_ideal = 0.0;  // route heading
  int n_visits = 0;          // of the current visit-grid cell
};

struct NavStepResult {
  Vec observation;
  double reward = 0.0;
  double cost = 0.0;
  bool violation = false;
  bool done = false;
  bool reached_goal = false;
  bool collided_moving = false;
  bool collided_static = false;
  bool entered_hazard = false;
  double nearest_obstacle_dist = 0.0;  // surface-to-surface, m
  double min_ttc = -1.0;               // s; < 0 when no collision course
  std::array<double, 4> reward_components{};  // R_v, R_l, R_o, R_e
};

// 2D navigation world: unicycle ego on a straight route with lane keeping,
// hazard regions, static discs, and looping moving obstacles. Deterministic
// given (config, seed, action sequence).
class NavWorld {
 public:
  explicit NavWorld(NavWorldConfig cfg);

  // Zeroes the visit grid, places the ego at the start, seed-jitters
  // moving-obstacle phases. Returns the initial observation.
  Vec reset(std::uint64_t seed);

  // Action = (acceleration command, steering command) in [-1, 1]^2.
  // Throws std::logic_error before the first reset.
  NavStepResult step(const std::array<double, 2>& action);

  const EgoState& ego() const { return ego_; }
  const NavWorldConfig& config() const { return cfg_; }
  int step_count() const { return step_count_; }
  std::size_t obs_dim() const { return static_cast<std::size_t>(cfg_.n_rays) + 6; }
  double route_length() const;
  double completed_fraction() const;
  double off_route_distance() const { return off_route_m_; }

  // Exposed for the brute-force geometry oracle in tests.
  bool point_in_hazard(double x, double y) const;
  std::vector<std::array<double, 2>> moving_positions() const;
  double surface_distance(double x, double y) const;  // to nearest obstacle/hazard surface

 private:
  Vec observe() const;
  double raycast(double angle) const;
  void advance_obstacles();
  std::array<double, 2> moving_position(const MovingObstacle& mo, double phase) const;

  NavWorldConfig cfg_;
  EgoState ego_;
  bool active_ = false;
  int step_count_ = 0;
  double off_route_m_ = 0.0;  // integrated distance while |offset| > d_max
  std::vector<double> phases_;  // m along each moving obstacle's path
  std::map<std::pair<int, int>, int> visit_grid_;
};

// Named scenario presets: "corridor", "intersection", "obstacle-field",
// "dynamic-1", "dynamic-2", "dynamic-3", "hazard-grid".
NavWorldConfig nav_preset(const std::string& name);
std::vector<std::string> nav_preset_names();

}  // namespace safenav::envs
