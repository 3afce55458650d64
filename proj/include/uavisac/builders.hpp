#pragma once

#include "uavisac/bound_model.hpp"
#include "uavisac/scenario.hpp"
#include "uavisac/subproblem.hpp"

#include <vector>

// Convex restrictions of the three coordinate blocks, each expanded around
// the current decision. Every constraint written here is conservative with
// respect to the closed-form bound model, so a feasible block solution maps
// back to a feasible decision.
namespace uavisac::cvx {

enum class Objective {
  min_worst_error,    // epigraph variable phi over the error surrogates
  max_min_volume,     // common throughput floor tau across devices
};

// Linearization data taken at the expansion decision, indexed [k][n-1] for
// slots n = 1..N.
struct SurrogateCoefficients {
  std::vector<std::vector<double>> varphi;  // echo ratio multiplier, device k on
  std::vector<double> varphi_silent;        // echo ratio multiplier, uplink quiet
  std::vector<std::vector<double>> rho;     // uplink ratio multiplier
  std::vector<std::vector<double>> mu;      // log split point of the rate cap
  std::vector<std::vector<double>> nu;      // interference ratio multiplier
  std::vector<std::vector<double>> kappa;   // received uplink power at fixed q
  std::vector<double> zeta;                 // echo+loopback power slope in p
};

SurrogateCoefficients surrogate_coefficients(const ScenarioConfig& cfg,
                                             const bound::Decision& at);

// Which (device, slot) pairs can transmit without breaking the echo floor
// at the frozen trajectory and power. [k][n-1], slots 1..N.
std::vector<std::vector<char>> schedule_mask(const ScenarioConfig& cfg,
                                             const bound::Decision& at);
// Echo floor with nobody transmitting; false means the slot fails even
// when silent (bad_slot receives the slot index).
bool silent_echo_ok(const ScenarioConfig& cfg, const bound::Decision& at,
                    int* bad_slot = nullptr);

// Cap used for the epigraph box; falls back to a multiple of the current
// objective when a model starts with no historical samples.
double phi_upper_bound(const ScenarioConfig& cfg, const bound::Decision& at);

struct BuiltSubproblem {
  opt::ConvexSubproblem problem;
  Objective objective = Objective::min_worst_error;

  // variable index maps, -1 where a quantity is pinned or eliminated
  std::vector<std::vector<int>> beta_var;  // [k][n-1]
  std::vector<int> qx_var, qy_var;         // [n], n = 0..N
  std::vector<std::vector<int>> e_var;     // [k][n-1]
  std::vector<int> u_var;                  // [n-1]
  std::vector<int> p_var;                  // [n-1]
  int phi_var = -1;
  int tau_var = -1;
};

// trust in (0, 1] shrinks the variable boxes around the expansion point;
// the drivers use it to retry a failed block solve on a smaller region.
BuiltSubproblem build_time_share_block(const ScenarioConfig& cfg,
                                       const bound::Decision& at,
                                       Objective obj, double trust = 1.0);
BuiltSubproblem build_trajectory_block(const ScenarioConfig& cfg,
                                       const bound::Decision& at,
                                       Objective obj, double trust = 1.0);
BuiltSubproblem build_power_block(const ScenarioConfig& cfg,
                                  const bound::Decision& at,
                                  Objective obj, double trust = 1.0);

// Writes the block's variables back into the decision; untouched blocks
// keep their current values. The epigraph/floor variable is not copied.
void apply_solution(const BuiltSubproblem& b, const opt::VecX& x, bound::Decision& d);

} // namespace uavisac::cvx
