#include "uavisac/transforms.hpp"

#include "uavisac/bound_model.hpp"

#include <cmath>

namespace uavisac::cvx {

double ratio_lb(double f, double g, double alpha) {
  return 2.0 * alpha * std::sqrt(f) - alpha * alpha * g;
}

double ratio_lb_multiplier(double f, double g) { return std::sqrt(f) / g; }

std::optional<double> log_ratio_ub(double f, double g, double theta, double rho) {
  double den = 2.0 * rho * std::sqrt(g) - rho * rho * f;
  if (!(den > 0)) return std::nullopt;
  double h = theta + std::log1p(-theta);
  return (1.0 - theta) / den - h;
}

double log_ratio_ub_theta(double f, double g) { return f / (f + g); }
double log_ratio_ub_rho(double f, double g) { return std::sqrt(g) / f; }

double inv_sq_dist_lb(Vec2 q, Vec2 g, double altitude_m, Vec2 q_prev) {
  double d2p = bound::dist_sq(q_prev, g, altitude_m);
  double d2 = altitude_m * altitude_m + norm_sq(q - g); // unfloored argument
  return 2.0 / d2p - d2 / (d2p * d2p);
}

double sq_dist_lb(Vec2 q, Vec2 g, double altitude_m, Vec2 q_prev) {
  double d2p = bound::dist_sq(q_prev, g, altitude_m);
  return 2.0 * dot(q_prev - g, q - q_prev) + d2p;
}

double inv_quad_dist_lb(Vec2 q, Vec2 g, double altitude_m, Vec2 q_prev) {
  double d2p = bound::dist_sq(q_prev, g, altitude_m);
  double d2 = altitude_m * altitude_m + norm_sq(q - g);
  return 3.0 / (d2p * d2p) - 2.0 * d2 / (d2p * d2p * d2p);
}

} // namespace uavisac::cvx
