#pragma once

#include <array>

namespace safenav::envs {

// Reward components for the navigation world. All four are bounded:
// velocity/orientation/exploration in (0, 1], lane in [-1, 1].

// 1 at the target speed, 1/(1 + lambda*|dv|) otherwise.
double velocity_reward(double v_current, double v_target, double lambda);

// 1 centered, -1 beyond d_max, linear in between.
double lane_reward(double d_offset, double d_max);

// 1/(1 + mu*|dtheta|), angular difference taken on the circle.
double orientation_reward(double theta_current, double theta_ideal, double mu);

// exp(-nu * n_visits).
double exploration_reward(int n_visits, double nu);

struct RewardWeights {
  double velocity = 0.4;
  double lane = 0.3;
  double orientation = 0.2;
  double exploration = 0.1;
};

double composite_reward(const std::array<double, 4>& components, const RewardWeights& weights);

// Wraps an angle to (-pi, pi].
double wrap_angle(double theta);

}  // namespace safenav::envs
