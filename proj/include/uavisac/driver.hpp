#pragma once

#include "uavisac/bound_model.hpp"
#include "uavisac/builders.hpp"
#include "uavisac/scenario.hpp"
#include "uavisac/solver.hpp"

#include <stdexcept>
#include <string>
#include <vector>

// Block-coordinate descent over the three decision groups: uplink time
// shares, trajectory, transmit power. Each outer iteration solves the three
// convex restrictions in that order and accepts a block only when it keeps
// the decision feasible and does not worsen the objective, so the reported
// objective trace is monotone by construction.
namespace uavisac::drv {

enum class Algo {
  proposed,  // full three-block descent on the worst-error objective
  tmax,      // maximizes the smallest per-device data volume instead
  constp,    // transmit power pinned at the cap; power block skipped
};

const char* to_string(Algo a);
Algo algo_from_string(const std::string& s);  // throws std::invalid_argument

// Thrown by initialize() when no feasible starting decision exists.
struct InfeasibleScenario : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunSettings {
  int max_iters = 100;
  double tol = 0;  // 0 picks up cfg.bcd_tol
  opt::SolverSettings solver;
};

struct BlockOutcome {
  std::string block;
  opt::SolveStatus status = opt::SolveStatus::numerical_trouble;
  int newton_iters = 0;
  bool accepted = false;         // update applied to the decision
  bool failed = false;           // solver or audit broke down (stalls are not failures)
  bool retried = false;          // second attempt on a shrunken box
  double objective_after = 0;    // decision-level objective once applied
  double wall_ms = 0;
};

struct IterationRecord {
  int index = 0;             // 1-based outer iteration
  double objective = 0;      // worst error, or smallest volume for tmax
  double eta = 0;            // worst error surrogate at the iterate
  double max_violation = 0;  // bound-model audit, normalized
  std::vector<BlockOutcome> blocks;
};

struct RunReport {
  Algo algo = Algo::proposed;
  double gamma_th = 0;
  int num_slots = 0;

  // index 0 is the initial point, then one entry per outer iteration
  std::vector<double> objective_trace;
  std::vector<double> eta_trace;
  std::vector<IterationRecord> iterations;

  bound::Decision initial_decision;
  bound::Decision final_decision;
  bound::Decision rectified_decision;  // shares scaled so exact volumes obey the caps

  double eta_initial = 0;
  double eta_final = 0;            // bound model, final decision
  double eta_rectified_exact = 0;  // exact model, rectified decision
  double min_volume_final = 0;     // smallest bound-model volume, bits
  std::vector<double> rectify_scale;  // per device, 1 when untouched

  bound::AuditReport audit_bound;  // final decision against the bound constraints
  bound::AuditReport audit_exact;  // rectified decision against the exact constraints

  std::string termination;  // "tolerance", "max_iterations", or "block_failure"
  double wall_ms_total = 0;
};

struct InitialPoint {
  bound::Decision decision;
  double admission_power = 0;  // smallest power clearing the echo floor for
                               // every admissible device at the depot
  double silent_power = 0;     // smallest power clearing the floor in silence
};

// Closed-form start: hover at the depot, uniform power a little above the
// admission level, greedy shares on the worst model. Throws
// InfeasibleScenario when even that cannot satisfy the echo floor.
InitialPoint initialize(const ScenarioConfig& cfg);

// Scales each device's shares down so the exact-model volume respects the
// stored-data cap. scales (optional) receives the per-device factor.
bound::Decision rectify(const ScenarioConfig& cfg, const bound::Decision& d,
                        std::vector<double>* scales = nullptr);

// init (optional) replaces the computed starting decision; it must pass the
// bound-model audit. constp still pins power at the cap.
RunReport run(const ScenarioConfig& cfg, Algo algo, const RunSettings& settings = {},
              const bound::Decision* init = nullptr);

}  // namespace uavisac::drv
