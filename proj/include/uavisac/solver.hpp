#pragma once

#include "uavisac/subproblem.hpp"

#include <string>
#include <vector>

namespace uavisac::opt {

enum class SolveStatus { ok, infeasible, max_iterations, numerical_trouble };

const char* to_string(SolveStatus s);

struct SolverSettings {
  double t0 = 10.0;        // initial barrier weight
  double mu = 30.0;        // barrier weight growth per centering round
  double opt_tol = 1e-7;   // stop when m / t <= opt_tol
  double feas_tol = 1e-9;  // phase-1 acceptance threshold on the slack variable
  double newton_tol = 1e-9;  // stop centering when decrement^2 / 2 drops below
  int max_centers = 40;
  int max_newton = 60;
  int max_backtracks = 60;
  double armijo = 0.25;
  double step_shrink = 0.5;
};

struct SolverOutcome {
  SolveStatus status = SolveStatus::numerical_trouble;
  VecX x;
  double objective = kInf;       // cost' x at the returned point
  double gap = kInf;             // m / t at exit
  double kkt_residual = kInf;    // normalized stationarity residual
  double phase1_infeasibility = 0;
  bool phase1_used = false;
  int newton_iters = 0;
  int centers = 0;
  // merit values recorded along each centering round (non-increasing per round)
  std::vector<std::vector<double>> center_merits;
  std::string message;
};

// Log-barrier interior-point method. Runs a phase-1 feasibility stage when
// the supplied start is not strictly feasible, then follows the central
// path with Newton centering steps.
SolverOutcome solve(const ConvexSubproblem& p, const SolverSettings& s = {});

} // namespace uavisac::opt
