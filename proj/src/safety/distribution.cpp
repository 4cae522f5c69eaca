#include "safenav/safety/distribution.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace safenav::safety {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kSqrt2 = 1.4142135623730950488;
std::atomic<std::uint64_t> g_clamp_count{0};
}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p outside (0,1)");
  // Acklam's rational approximation, then one Halley refinement step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01, -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p > phigh) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  // Halley step against the exact CDF.
  const double e = normal_cdf(x) - p;
  const double u = e / normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double bellman_cost_operator(double c, double gamma, double next_dist_sample) {
  return c + gamma * next_dist_sample;
}

double q_c_target(double c, double gamma, double expected_next_q) {
  return c + gamma * expected_next_q;
}

double v_c_target(double c, double gamma, double q_here, double expected_next_q,
                  double expected_next_v, double expected_next_q_sq) {
  const double v = c * c - q_here * q_here + 2.0 * gamma * c * expected_next_q +
                   gamma * gamma * expected_next_v + gamma * gamma * expected_next_q_sq;
  if (v < -1e-6) {
    const auto n = g_clamp_count.fetch_add(1) + 1;
    if (n <= 5) {
      std::fprintf(stderr, "[safety] v_c_target projection inconsistency: %.3e clamped to 0\n", v);
    }
  }
  return v < 0.0 ? 0.0 : v;
}

std::uint64_t v_c_projection_clamps() { return g_clamp_count.load(); }
void reset_v_c_projection_clamps() { g_clamp_count.store(0); }

double w2_distance_gaussian(const GaussianCostDistribution& g1, const GaussianCostDistribution& g2) {
  const double dm = g1.q_c - g2.q_c;
  const double ds = std::sqrt(g1.v_c) - std::sqrt(g2.v_c);
  return std::sqrt(dm * dm + ds * ds);
}

double cvar(double q_c, double v_c, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("cvar: alpha outside (0,1)");
  if (v_c < 0.0) v_c = 0.0;
  if (v_c == 0.0) return q_c;
  return q_c + normal_pdf(normal_quantile(alpha)) / alpha * std::sqrt(v_c);
}

}  // namespace safenav::safety
