#pragma once

#include "uavisac/bound_model.hpp"
#include "uavisac/scenario.hpp"
#include "uavisac/subproblem.hpp"

#include <functional>
#include <utility>
#include <vector>

// Slow, independent reference implementations used only by tests. These are
// written from the closed forms directly (hypot-based distances, explicit
// loops) and deliberately share no helpers with the library code they check.
namespace uavisac::oracle {

double dist_sq(Vec2 q, Vec2 g, double altitude_m);
double comm_sinr(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k);
double radar_sinr(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k,
                  bool transmitting);
double rate(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k);
double collected_bits(const ScenarioConfig& cfg, const bound::Decision& d, int k);
double worst_error(const ScenarioConfig& cfg, const bound::Decision& d);

// Central finite differences with per-coordinate relative steps.
std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h_rel = 1e-6);

struct GridAxis {
  int var;
  double lo, hi, step;
};

struct GridSpec {
  std::vector<GridAxis> axes;
  // (var, linear row index): the variable is set where that row is tight,
  // solving for it from the other coordinates. Applied in order.
  std::vector<std::pair<int, int>> closures;
  long max_points = 10'000'000;
  double feas_tol = 1e-9;
};

struct GridResult {
  bool found = false;
  double objective = opt::kInf;
  opt::VecX x;
  long points = 0;
};

// Exhaustive scan over the axes. Any epigraph variable is resolved by
// bisection at each lattice point; everything else must be covered by an
// axis or a closure. Deterministic: the first strict improvement wins.
GridResult grid_minimize(const opt::ConvexSubproblem& p, const GridSpec& spec);

// Vertex enumeration for purely linear instances (no smooth constraints):
// solves every square active set drawn from rows and box faces.
GridResult vertex_minimize(const opt::ConvexSubproblem& p, double feas_tol = 1e-9);

// Brute force over shares, free positions and powers of a tiny instance
// (K <= 2, N <= 2), checking feasibility with the closed-form audit.
struct ToyBest {
  double eta = opt::kInf;
  bound::Decision decision;
  long points = 0;
};
ToyBest toy_exhaustive_min_eta(const ScenarioConfig& cfg, int share_steps,
                               int pos_steps, int pow_steps);

} // namespace uavisac::oracle
