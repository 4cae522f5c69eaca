#include "safenav/envs/rewards.hpp"

#include <cmath>
#include <stdexcept>

namespace safenav::envs {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double wrap_angle(double theta) {
  theta = std::fmod(theta + kPi, 2.0 * kPi);
  if (theta <= 0.0) theta += 2.0 * kPi;
  return theta - kPi;
}

double velocity_reward(double v_current, double v_target, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("velocity_reward: lambda must be > 0");
  if (v_current == v_target) return 1.0;
  return 1.0 / (1.0 + lambda * std::abs(v_current - v_target));
}

double lane_reward(double d_offset, double d_max) {
  if (d_max <= 0.0) throw std::invalid_argument("lane_reward: d_max must be > 0");
  if (d_offset == 0.0) return 1.0;
  if (d_offset > d_max) return -1.0;
  return (d_max - d_offset) / d_max;
}

double orientation_reward(double theta_current, double theta_ideal, double mu) {
  if (mu <= 0.0) throw std::invalid_argument("orientation_reward: mu must be > 0");
  const double dtheta = std::abs(wrap_angle(theta_current - theta_ideal));
  return 1.0 / (1.0 + mu * dtheta);
}

double exploration_reward(int n_visits, double nu) {
  if (nu < 0.0 || n_visits < 0) throw std::invalid_argument("exploration_reward: bad inputs");
  return std::exp(-nu * static_cast<double>(n_visits));
}

double composite_reward(const std::array<double, 4>& components, const RewardWeights& weights) {
  return weights.velocity * components[0] + weights.lane * components[1] +
         weights.orientation * components[2] + weights.exploration * components[3];
}

}  // namespace safenav::envs
