#pragma once

#include <cstdint>

namespace safenav::safety {

// Gaussian model of the discounted cumulative cost return.
struct GaussianCostDistribution {
  double q_c = 0.0;  // mean
  double v_c = 0.0;  // variance, clamped >= 0 at construction

  GaussianCostDistribution() = default;
  GaussianCostDistribution(double q, double v) : q_c(q), v_c(v < 0.0 ? 0.0 : v) {}
};

// Standard normal density, CDF and quantile.
double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);  // throws for p outside (0, 1)

// Sample-level distributional Bellman operator: c + gamma * C(s', a').
double bellman_cost_operator(double c, double gamma, double next_dist_sample);

// c + gamma * E[Q_c(s', a')].
double q_c_target(double c, double gamma, double expected_next_q);

// Projection target for the cost-return variance:
//   c^2 - q_here^2 + 2*gamma*c*E[Q'] + gamma^2*E[V'] + gamma^2*E[Q'^2],
// clamped to [0, inf). Results below -1e-6 before the clamp are counted as
// projection inconsistencies (see v_c_projection_clamps()).
double v_c_target(double c, double gamma, double q_here, double expected_next_q,
                  double expected_next_v, double expected_next_q_sq);

// Number of v_c_target clamps beyond tolerance since process start.
std::uint64_t v_c_projection_clamps();
void reset_v_c_projection_clamps();

// W2 between univariate Gaussians: sqrt((q1-q2)^2 + (sqrt(v1)-sqrt(v2))^2).
double w2_distance_gaussian(const GaussianCostDistribution& g1, const GaussianCostDistribution& g2);

// CVaR at level alpha of N(q_c, v_c):
//   q_c + alpha^{-1} * pdf(quantile(alpha)) * sqrt(v_c).
// Throws for alpha outside (0, 1).
double cvar(double q_c, double v_c, double alpha);

}  // namespace safenav::safety
