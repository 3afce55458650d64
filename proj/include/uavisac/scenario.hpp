#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavisac {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm_sq(Vec2 a) { return a.x * a.x + a.y * a.y; }

// Thrown when the config file cannot be parsed at all (bad JSON, bad unit).
struct ConfigParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Thrown when parsed values violate a documented schema rule.
struct ConfigValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full scenario description in canonical internal units: meters, seconds,
// Hz, Watts, linear power ratios. Device/model indices are 0-based here;
// the config file uses 1-based ids in "groups".
struct ScenarioConfig {
  int num_devices = 0;   // K
  int num_models = 0;    // M
  int num_slots = 0;     // N (slots 1..N; slot 0 is the pre-departure state)
  double period_s = 0;   // T, with slot length T/N
  double altitude_m = 0; // fixed flight altitude H
  double v_max_mps = 0;
  double bandwidth_hz = 0;
  double noise_w = 0;    // total receive noise power per antenna, sigma^2
  double ref_gain = 0;   // channel power gain at 1 m, linear
  double rcs_m2 = 0;     // target radar cross-section
  double si_coeff = 0;   // residual self-interference coefficient, linear
  double wavelength_m = 0;
  int num_antennas = 0;  // per panel (transmit = receive count)

  Vec2 depot;  // takeoff/landing and server position
  Vec2 target; // sensing target position
  std::vector<Vec2> devices;

  std::vector<double> device_power_w; // per device uplink power
  double uav_power_cap_w = 0;
  double sensing_threshold = 0; // linear SINR floor for the echo

  std::vector<std::vector<int>> groups; // per model: 0-based device ids
  std::vector<int> group_of;            // per device: model id

  std::vector<double> sample_bits;        // D_m, bits per training sample
  std::vector<double> device_samples;     // I_k, samples held by device k
  std::vector<double> historical_samples; // A_m, samples already at server
  std::vector<double> err_coeff;          // a_m
  std::vector<double> err_exp;            // b_m

  double bcd_tol = 1e-3;

  double slot_seconds() const { return period_s / num_slots; }
  int model_of(int k) const { return group_of[static_cast<size_t>(k)]; }
};

// Aggregated channel constants used by the closed-form link model.
struct DerivedConstants {
  double lambda_si = 0;          // si_coeff * num_antennas
  double lambda_t = 0;           // ref_gain * rcs * num_antennas
  std::vector<double> lambda_k;  // ref_gain * device_power_w[k]
  double noise_w = 0;
};

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario_text(const std::string& text); // same schema, from memory
void validate(const ScenarioConfig& cfg);                    // throws ConfigValidationError
std::string serialize(const ScenarioConfig& cfg);            // canonical JSON, exact round-trip
DerivedConstants derive_constants(const ScenarioConfig& cfg);

// Least-squares fit of error = a * count^(-b) on log-log axes.
// Requires >= 2 distinct counts, counts > 0, errors in (0,1).
// b is clamped at 0 when the regression slope comes out positive.
struct SurrogateFit {
  double a = 0;
  double b = 0;
};
SurrogateFit fit_error_surrogate(const std::vector<std::pair<double, double>>& count_error_pairs);

} // namespace uavisac
