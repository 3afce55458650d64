#pragma once

#include "uavisac/driver.hpp"

#include <string>
#include <vector>

// Serialization of run results. The CSV files hold only quantities that are
// reproducible bit-for-bit across runs (no timings); wall-clock measurements
// go into report.json and sweep.csv.
namespace uavisac::io {

struct SweepRow {
  double value = 0;            // swept parameter value
  double eta_final = 0;        // bound-model worst error at exit
  double eta_rectified_exact = 0;
  double min_volume_bits = 0;  // smallest per-device volume, bound rates
  double min_echo_slack = 0;   // min over slots of sinr/threshold - 1
  int iterations = 0;
  std::string termination;
  bool feasible_start = true;  // initialize() succeeded
  double wall_ms = 0;
};

std::string decision_to_json(const bound::Decision& d);
bound::Decision decision_from_json(const std::string& text);

std::string report_to_json(const ScenarioConfig& cfg, const drv::RunReport& rep);

// Writes trajectory.csv, allocation.csv, power.csv, iterations.csv and
// report.json under dir (created if missing).
void write_run_outputs(const std::string& dir, const ScenarioConfig& cfg,
                       const drv::RunReport& rep);

void write_sweep_csv(const std::string& path, const std::string& param,
                     const std::vector<SweepRow>& rows);

}  // namespace uavisac::io
