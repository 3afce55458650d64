#pragma once

#include "uavisac/scenario.hpp"

#include <limits>
#include <string>
#include <vector>

// Closed-form conservative link model: an uplink SINR lower bound and an
// echo SINR lower bound that depend on the UAV position and transmit power
// only through distances. The optimizer works entirely on these bounds;
// exact_model supplies the ground truth for audits.
namespace uavisac::bound {

// One candidate operating point for the whole flight.
//  beta  : uplink time shares, indexed [k][n] for n = 0..N (slot 0 fixed 0)
//  traj  : UAV positions q_0..q_N (q_0 = q_N = depot)
//  power : sensing transmit power for slots 1..N (power[n-1] is slot n)
//  phi   : epigraph value, upper bound on every model's error surrogate
struct Decision {
  std::vector<std::vector<double>> beta;
  std::vector<Vec2> traj;
  std::vector<double> power;
  double phi = 0;
};

Decision zero_decision(const ScenarioConfig& cfg); // hover at depot, beta = 0, power = 0

// Squared distance floored at 1 m^2 so overflights cannot blow up the
// closed forms; exact_model deliberately does not floor.
double dist_sq(Vec2 q, Vec2 g, double altitude_m);

// Uplink SINR lower bound for device k at position q under sensing power p.
double comm_sinr_lb(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k);
// Achievable uplink rate bound in bit/s.
double rate_lb(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k);
// Echo SINR lower bound; transmitting = whether device k's uplink is on
// in the slot under consideration.
double radar_sinr_lb(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k, bool transmitting);

// Bits collected from device k over the flight: delta * sum_n beta R.
// use_exact switches to the exact-model rates.
double data_volume(const ScenarioConfig& cfg, const Decision& d, int k, bool use_exact = false);

// Learning error surrogate a_m (collected_samples + historical)^ -b_m.
// Returns +infinity when the base is zero with b_m > 0.
double error_surrogate(const ScenarioConfig& cfg, const Decision& d, int m, bool use_exact = false);

// Objective: worst error surrogate across models.
double eta(const ScenarioConfig& cfg, const Decision& d, bool use_exact = false);

// Feasibility audit of the full constraint set. Violations are reported in
// the units of each constraint family, normalized by the family scale, so
// the verdict applies a single relative tolerance.
struct ConstraintCheck {
  std::string name;
  double worst_violation = -std::numeric_limits<double>::infinity(); // normalized; <= 0 is feasible
  int worst_slot = -1;
  int worst_device = -1;
};

struct AuditReport {
  bool feasible = false;
  double tolerance = 0;
  std::vector<ConstraintCheck> checks;
  double eta_value = 0;
  std::vector<double> psi;           // per model
  std::vector<double> volume_bound;  // per device, bound-rate bits
  std::vector<double> volume_exact;  // per device, exact-rate bits
  std::vector<double> min_radar_sinr_per_slot; // slots 1..N
  double max_violation() const;
  const ConstraintCheck* find(const std::string& name) const;
};

// use_exact = false audits the bound-model constraint set the optimizer
// enforces; use_exact = true audits the physical (exact SINR) constraints.
AuditReport audit(const ScenarioConfig& cfg, const Decision& d, bool use_exact = false,
                  double tolerance = 1e-9);

} // namespace uavisac::bound
