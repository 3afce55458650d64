#pragma once

#include "uavisac/scenario.hpp"

#include <optional>

// Scalar building blocks for the successive convex approximation step.
// Every function returns a one-sided bound that touches the original
// expression when the multiplier is chosen at its stationary value.
namespace uavisac::cvx {

// Concave lower bound on the ratio f/g (f >= 0, g > 0):
//   f/g >= 2*alpha*sqrt(f) - alpha^2*g,  tight at alpha = sqrt(f)/g.
double ratio_lb(double f, double g, double alpha);
double ratio_lb_multiplier(double f, double g); // sqrt(f)/g

// Convex upper bound on ln(1 + f/g) (f >= 0, g > 0):
//   ln(1+f/g) <= (1-theta)*f/g - h(theta)
//             <= (1-theta)/(2*rho*sqrt(g) - rho^2*f) - h(theta)
// with h(theta) = theta + ln(1-theta); tight at theta = f/(f+g),
// rho = sqrt(g)/f. Returns nullopt when the denominator guard
// 2*rho*sqrt(g) - rho^2*f is not positive (caller must re-expand).
std::optional<double> log_ratio_ub(double f, double g, double theta, double rho);
double log_ratio_ub_theta(double f, double g); // f/(f+g)
double log_ratio_ub_rho(double f, double g);   // sqrt(g)/f

// First-order bounds around a previous UAV position q_prev. All squared
// distances include the altitude term and are floored at 1 m^2.
//   inv_sq_dist_lb  <= d^-2(q,g)   (affine in ||q-g||^2)
//   sq_dist_lb      <= d^2(q,g)    (affine in q)
//   inv_quad_dist_lb<= d^-4(q,g)   (affine in ||q-g||^2)
double inv_sq_dist_lb(Vec2 q, Vec2 g, double altitude_m, Vec2 q_prev);
double sq_dist_lb(Vec2 q, Vec2 g, double altitude_m, Vec2 q_prev);
double inv_quad_dist_lb(Vec2 q, Vec2 g, double altitude_m, Vec2 q_prev);

} // namespace uavisac::cvx
