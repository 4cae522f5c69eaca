#include "safenav/envs/nav_world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace safenav::envs {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

double dist2(double ax, double ay, double bx, double by) {
  const double dx = ax - bx, dy = ay - by;
  return dx * dx + dy * dy;
}

// Distance from a point to an axis-aligned rectangle (0 inside).
double rect_distance(double x, double y, const RectRegion& r) {
  const double dx = std::max({r.xmin - x, 0.0, x - r.xmax});
  const double dy = std::max({r.ymin - y, 0.0, y - r.ymax});
  return std::hypot(dx, dy);
}

// First positive ray-circle intersection parameter, or +inf.
double ray_circle(double px, double py, double dx, double dy, const Disc& c) {
  const double ox = px - c.x, oy = py - c.y;
  const double b = ox * dx + oy * dy;
  const double q = ox * ox + oy * oy - c.r * c.r;
  if (q <= 0.0) return 0.0;  // starting inside
  const double disc = b * b - q;
  if (disc < 0.0) return kInf;
  const double t = -b - std::sqrt(disc);
  return t >= 0.0 ? t : kInf;
}

// First positive ray-rectangle intersection (entering), or +inf.
double ray_rect(double px, double py, double dx, double dy, const RectRegion& r) {
  double tmin = 0.0, tmax = kInf;
  const double p[2] = {px, py}, d[2] = {dx, dy};
  const double lo[2] = {r.xmin, r.ymin}, hi[2] = {r.xmax, r.ymax};
  for (int i = 0; i < 2; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (p[i] < lo[i] || p[i] > hi[i]) return kInf;
    } else {
      double t1 = (lo[i] - p[i]) / d[i];
      double t2 = (hi[i] - p[i]) / d[i];
      if (t1 > t2) std::swap(t1, t2);
      tmin = std::max(tmin, t1);
      tmax = std::min(tmax, t2);
      if (tmin > tmax) return kInf;
    }
  }
  return tmin;
}

double path_length(const std::vector<std::array<double, 2>>& wp) {
  double len = 0.0;
  const std::size_t n = wp.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = wp[i];
    const auto& b = wp[(i + 1) % n];
    len += std::hypot(b[0] - a[0], b[1] - a[1]);
  }
  return len;
}
}  // namespace

void NavWorldConfig::validate() const {
  std::string errs;
  auto bad = [&errs](const std::string& msg) { errs += (errs.empty() ? "" : "; ") + msg; };
  if (dt <= 0.0) bad("dt must be > 0");
  if (corridor_half_width <= 0.0) bad("corridor_half_width (d_max) must be > 0");
  if (v_target <= 0.0) bad("v_target must be > 0");
  if (v_max <= 0.0) bad("v_max must be > 0");
  if (arena_w <= 0.0 || arena_h <= 0.0) bad("arena dimensions must be > 0");
  if (time_limit <= 0) bad("time_limit must be > 0");
  if (lambda <= 0.0) bad("lambda must be > 0");
  if (mu <= 0.0) bad("mu must be > 0");
  if (nu < 0.0) bad("nu must be >= 0");
  if (weights.velocity < 0.0 || weights.lane < 0.0 || weights.orientation < 0.0 ||
      weights.exploration < 0.0) {
    bad("reward weights must be >= 0");
  }
  if (safety_margin <= 0.0) bad("safety_margin must be > 0");
  if (visit_cell <= 0.0) bad("visit_cell must be > 0");
  if (n_rays < 2) bad("n_rays must be >= 2");
  if (ray_max <= 0.0) bad("ray_max must be > 0");
  for (const auto& mo : moving_obstacles) {
    if (mo.speed <= 0.0) bad("moving obstacle speed must be > 0");
    if (mo.waypoints.size() < 2) bad("moving obstacle needs >= 2 waypoints");
  }
  if (!errs.empty()) throw std::invalid_argument("NavWorldConfig: " + errs);
}

NavWorld::NavWorld(NavWorldConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

double NavWorld::route_length() const {
  return std::hypot(cfg_.goal[0] - cfg_.start[0], cfg_.goal[1] - cfg_.start[1]);
}

double NavWorld::completed_fraction() const {
  const double ux = (cfg_.goal[0] - cfg_.start[0]) / route_length();
  const double uy = (cfg_.goal[1] - cfg_.start[1]) / route_length();
  const double progress = (ego_.x - cfg_.start[0]) * ux + (ego_.y - cfg_.start[1]) * uy;
  return clamp(progress / route_length(), 0.0, 1.0);
}

Vec NavWorld::reset(std::uint64_t seed) {
  Rng rng = Rng(seed).split("nav_reset");
  phases_.clear();
  for (const auto& mo : cfg_.moving_obstacles) {
    const double len = path_length(mo.waypoints);
    double ph = mo.start_phase + rng.uniform() * cfg_.phase_jitter;
    ph = std::fmod(ph, len);
    phases_.push_back(ph);
  }
  ego_ = EgoState{};
  ego_.x = cfg_.start[0];
  ego_.y = cfg_.start[1];
  ego_.theta = cfg_.start_heading;
  ego_.v = 0.0;
  const double ux = (cfg_.goal[0] - cfg_.start[0]) / route_length();
  const double uy = (cfg_.goal[1] - cfg_.start[1]) / route_length();
  ego_.theta_ideal = std::atan2(uy, ux);
  ego_.d_offset = 0.0;
  ego_.n_visits = 0;
  visit_grid_.clear();
  step_count_ = 0;
  off_route_m_ = 0.0;
  active_ = true;
  return observe();
}

std::array<double, 2> NavWorld::moving_position(const MovingObstacle& mo, double phase) const {
  const std::size_t n = mo.waypoints.size();
  double s = phase;
  for (std::size_t i = 0;; i = (i + 1) % n) {
    const auto& a = mo.waypoints[i];
    const auto& b = mo.waypoints[(i + 1) % n];
    const double seg = std::hypot(b[0] - a[0], b[1] - a[1]);
    if (s <= seg || seg == 0.0) {
      if (seg == 0.0) return a;
      const double f = s / seg;
      return {a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])};
    }
    s -= seg;
  }
}

std::vector<std::array<double, 2>> NavWorld::moving_positions() const {
  std::vector<std::array<double, 2>> out;
  for (std::size_t i = 0; i < cfg_.moving_obstacles.size(); ++i) {
    out.push_back(moving_position(cfg_.moving_obstacles[i], phases_[i]));
  }
  return out;
}

void NavWorld::advance_obstacles() {
  for (std::size_t i = 0; i < cfg_.moving_obstacles.size(); ++i) {
    const auto& mo = cfg_.moving_obstacles[i];
    const double len = path_length(mo.waypoints);
    phases_[i] = std::fmod(phases_[i] + mo.speed * cfg_.dt, len);
  }
}

bool NavWorld::point_in_hazard(double x, double y) const {
  for (const auto& d : cfg_.hazard_discs) {
    if (dist2(x, y, d.x, d.y) <= d.r * d.r) return true;
  }
  for (const auto& r : cfg_.hazard_rects) {
    if (x >= r.xmin && x <= r.xmax && y >= r.ymin && y <= r.ymax) return true;
  }
  return false;
}

double NavWorld::surface_distance(double x, double y) const {
  double best = kInf;
  for (const auto& d : cfg_.hazard_discs) {
    best = std::min(best, std::sqrt(dist2(x, y, d.x, d.y)) - d.r);
  }
  for (const auto& r : cfg_.hazard_rects) {
    best = std::min(best, rect_distance(x, y, r));
  }
  for (const auto& d : cfg_.static_obstacles) {
    best = std::min(best, std::sqrt(dist2(x, y, d.x, d.y)) - d.r);
  }
  const auto mov = moving_positions();
  for (std::size_t i = 0; i < mov.size(); ++i) {
    best = std::min(best, std::sqrt(dist2(x, y, mov[i][0], mov[i][1])) - cfg_.moving_obstacles[i].radius);
  }
  return best - cfg_.ego_radius;
}

double NavWorld::raycast(double angle) const {
  const double dx = std::cos(angle), dy = std::sin(angle);
  double best = cfg_.ray_max;
  // Arena walls (ray exits the [0,w]x[0,h] box).
  if (dx > 1e-15) best = std::min(best, (cfg_.arena_w - ego_.x) / dx);
  if (dx < -1e-15) best = std::min(best, (0.0 - ego_.x) / dx);
  if (dy > 1e-15) best = std::min(best, (cfg_.arena_h - ego_.y) / dy);
  if (dy < -1e-15) best = std::min(best, (0.0 - ego_.y) / dy);
  for (const auto& d : cfg_.hazard_discs) {
    best = std::min(best, ray_circle(ego_.x, ego_.y, dx, dy, d));
  }
  for (const auto& r : cfg_.hazard_rects) {
    best = std::min(best, ray_rect(ego_.x, ego_.y, dx, dy, r));
  }
  for (const auto& d : cfg_.static_obstacles) {
    best = std::min(best, ray_circle(ego_.x, ego_.y, dx, dy, d));
  }
  const auto mov = moving_positions();
  for (std::size_t i = 0; i < mov.size(); ++i) {
    Disc d{mov[i][0], mov[i][1], cfg_.moving_obstacles[i].radius};
    best = std::min(best, ray_circle(ego_.x, ego_.y, dx, dy, d));
  }
  return clamp(best, 0.0, cfg_.ray_max);
}

Vec NavWorld::observe() const {
  Vec obs;
  obs.reserve(obs_dim());
  for (int i = 0; i < cfg_.n_rays; ++i) {
    const double rel = -0.5 * kPi + kPi * static_cast<double>(i) / static_cast<double>(cfg_.n_rays - 1);
    obs.push_back(raycast(ego_.theta + rel) / cfg_.ray_max);
  }
  obs.push_back(ego_.v / cfg_.v_max);
  obs.push_back(wrap_angle(ego_.theta - ego_.theta_ideal) / kPi);
  // Signed lateral offset, normalized and clipped to [-1, 1] at 2*d_max.
  const double ux = (cfg_.goal[0] - cfg_.start[0]) / route_length();
  const double uy = (cfg_.goal[1] - cfg_.start[1]) / route_length();
  const double signed_off = -(ego_.y - cfg_.start[1]) * ux + (ego_.x - cfg_.start[0]) * uy;
  obs.push_back(clamp(signed_off / (2.0 * cfg_.corridor_half_width), -1.0, 1.0));
  const double gdx = cfg_.goal[0] - ego_.x, gdy = cfg_.goal[1] - ego_.y;
  const double bearing = wrap_angle(std::atan2(gdy, gdx) - ego_.theta);
  obs.push_back(std::sin(bearing));
  obs.push_back(std::cos(bearing));
  const double diag = std::hypot(cfg_.arena_w, cfg_.arena_h);
  obs.push_back(clamp(std::hypot(gdx, gdy) / diag, 0.0, 1.0));
  return obs;
}

NavStepResult NavWorld::step(const std::array<double, 2>& action) {
  if (!active_) throw std::logic_error("NavWorld::step before reset");
  const double a_acc = clamp(action[0], -1.0, 1.0);
  const double a_steer = clamp(action[1], -1.0, 1.0);

  ego_.v = clamp(ego_.v + a_acc * cfg_.accel_max * cfg_.dt, 0.0, cfg_.v_max);
  ego_.theta = wrap_angle(ego_.theta + a_steer * cfg_.steer_rate_max * cfg_.dt);
  ego_.x = clamp(ego_.x + ego_.v * std::cos(ego_.theta) * cfg_.dt, cfg_.ego_radius,
                 cfg_.arena_w - cfg_.ego_radius);
  ego_.y = clamp(ego_.y + ego_.v * std::sin(ego_.theta) * cfg_.dt, cfg_.ego_radius,
                 cfg_.arena_h - cfg_.ego_radius);
  advance_obstacles();
  ++step_count_;

  const double rl = route_length();
  const double ux = (cfg_.goal[0] - cfg_.start[0]) / rl;
  const double uy = (cfg_.goal[1] - cfg_.start[1]) / rl;
  const double signed_off = -(ego_.y - cfg_.start[1]) * ux + (ego_.x - cfg_.start[0]) * uy;
  ego_.d_offset = std::abs(signed_off);
  ego_.theta_ideal = std::atan2(uy, ux);
  if (ego_.d_offset > cfg_.corridor_half_width) off_route_m_ += ego_.v * cfg_.dt;

  const auto cell = std::make_pair(static_cast<int>(std::floor(ego_.x / cfg_.visit_cell)),
                                   static_cast<int>(std::floor(ego_.y / cfg_.visit_cell)));
  ego_.n_visits = visit_grid_[cell];
  ++visit_grid_[cell];

  NavStepResult res;
  res.reward_components = {velocity_reward(ego_.v, cfg_.v_target, cfg_.lambda),
                           lane_reward(ego_.d_offset, cfg_.corridor_half_width),
                           orientation_reward(ego_.theta, ego_.theta_ideal, cfg_.mu),
                           exploration_reward(ego_.n_visits, cfg_.nu)};
  res.reward = composite_reward(res.reward_components, cfg_.weights);

  // Violation: the ego disc intersects a hazard region or an obstacle.
  res.entered_hazard = false;
  for (const auto& d : cfg_.hazard_discs) {
    if (dist2(ego_.x, ego_.y, d.x, d.y) <= (d.r + cfg_.ego_radius) * (d.r + cfg_.ego_radius)) {
      res.entered_hazard = true;
    }
  }
  for (const auto& r : cfg_.hazard_rects) {
    if (rect_distance(ego_.x, ego_.y, r) <= cfg_.ego_radius) res.entered_hazard = true;
  }
  for (const auto& d : cfg_.static_obstacles) {
    if (dist2(ego_.x, ego_.y, d.x, d.y) <= (d.r + cfg_.ego_radius) * (d.r + cfg_.ego_radius)) {
      res.collided_static = true;
    }
  }
  const auto mov = moving_positions();
  for (std::size_t i = 0; i < mov.size(); ++i) {
    const double rr = cfg_.moving_obstacles[i].radius + cfg_.ego_radius;
    if (dist2(ego_.x, ego_.y, mov[i][0], mov[i][1]) <= rr * rr) res.collided_moving = true;
  }
  res.violation = res.entered_hazard || res.collided_static || res.collided_moving;

  const double sdist = surface_distance(ego_.x, ego_.y);
  res.nearest_obstacle_dist = std::max(sdist, 0.0);
  res.cost = (res.violation ? 1.0 : 0.0) +
             std::max(0.0, 1.0 - res.nearest_obstacle_dist / cfg_.safety_margin);

  // Minimum time-to-collision over obstacles on a closing course.
  res.min_ttc = -1.0;
  const double evx = ego_.v * std::cos(ego_.theta), evy = ego_.v * std::sin(ego_.theta);
  auto consider_ttc = [&](double cx, double cy, double radius, double ovx, double ovy) {
    const double rx = cx - ego_.x, ry = cy - ego_.y;
    const double sep = std::hypot(rx, ry);
    if (sep < 1e-12) return;
    const double gap = std::max(0.0, sep - radius - cfg_.ego_radius);
    const double closing = ((evx - ovx) * rx + (evy - ovy) * ry) / sep;
    if (closing > 1e-12) {
      const double ttc = gap / closing;
      if (res.min_ttc < 0.0 || ttc < res.min_ttc) res.min_ttc = ttc;
    }
  };
  for (const auto& d : cfg_.static_obstacles) consider_ttc(d.x, d.y, d.r, 0.0, 0.0);
  for (const auto& d : cfg_.hazard_discs) consider_ttc(d.x, d.y, d.r, 0.0, 0.0);
  for (std::size_t i = 0; i < mov.size(); ++i) {
    // Obstacle velocity from its current segment direction.
    const auto before = moving_position(cfg_.moving_obstacles[i], phases_[i]);
    const double len = path_length(cfg_.moving_obstacles[i].waypoints);
    const double eps = std::min(1e-6, len * 0.5);
    const auto after = moving_position(cfg_.moving_obstacles[i], std::fmod(phases_[i] + eps, len));
    const double inv = cfg_.moving_obstacles[i].speed / eps;
    consider_ttc(mov[i][0], mov[i][1], cfg_.moving_obstacles[i].radius,
                 (after[0] - before[0]) * inv, (after[1] - before[1]) * inv);
  }

  res.reached_goal =
      dist2(ego_.x, ego_.y, cfg_.goal[0], cfg_.goal[1]) <= cfg_.goal_radius * cfg_.goal_radius;
  res.done = res.reached_goal || res.violation || step_count_ >= cfg_.time_limit;
  if (res.done) active_ = false;
  res.observation = observe();
  return res;
}

NavWorldConfig nav_preset(const std::string& name) {
  NavWorldConfig cfg;
  if (name == "corridor") {
    // Empty corridor; pure lane/velocity shaping.
    return cfg;
  }
  if (name == "intersection") {
    cfg.moving_obstacles.push_back({{{20.0, 1.0}, {20.0, 11.0}}, 1.0, 0.5, 0.0});
    return cfg;
  }
  if (name == "obstacle-field") {
    cfg.static_obstacles = {{10.0, 5.0, 0.7}, {16.0, 7.2, 0.7}, {23.0, 5.2, 0.8}, {30.0, 6.8, 0.7}};
    return cfg;
  }
  if (name == "dynamic-1" || name == "dynamic-2" || name == "dynamic-3") {
    const double speed = static_cast<double>(name.back() - '0');
    cfg.static_obstacles = {{14.0, 7.0, 0.6}, {26.0, 5.0, 0.6}};
    // Movers sweep the full corridor height so the crossings cannot be
    // bypassed along a wall; passing is purely a timing decision.
    cfg.moving_obstacles.push_back({{{20.0, 1.0}, {20.0, 11.0}}, speed, 0.7, 0.0});
    cfg.moving_obstacles.push_back({{{32.0, 11.0}, {32.0, 1.0}}, speed, 0.7, 0.0});
    cfg.phase_jitter = 20.0;  // full loop, so crossing times vary uniformly per seed
    cfg.goal_radius = 2.0;    // generous arrival zone: finishing the corridor counts
    cfg.time_limit = 400;
    cfg.lambda = 3.0;
    cfg.weights = {0.7, 0.0, 0.25, 0.05};
    return cfg;
  }
  if (name == "hazard-grid") {
    cfg.arena_w = 20.0;
    cfg.arena_h = 12.0;
    cfg.start = {2.0, 6.0};
    cfg.goal = {18.0, 6.0};
    cfg.v_target = 1.2;
    cfg.v_max = 2.0;
    cfg.time_limit = 150;
    cfg.hazard_discs = {{14.0, 6.0, 0.8}};
    cfg.safety_margin = 1.2;
    // Velocity-dominant shaping: loitering pays clearly less than driving the
    // route, so the reward/cost trade-off at the hazard is what distinguishes
    // constrained from unconstrained agents.
    cfg.lambda = 3.0;
    cfg.weights = {0.7, 0.0, 0.25, 0.05};
    return cfg;
  }
  throw std::invalid_argument("nav_preset: unknown scenario '" + name + "'");
}

std::vector<std::string> nav_preset_names() {
  return {"corridor", "intersection", "obstacle-field", "dynamic-1", "dynamic-2", "dynamic-3",
          "hazard-grid"};
}

}  // namespace safenav::envs
