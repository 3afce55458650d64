#include "uavisac/exact_model.hpp"

#include <cmath>

namespace uavisac::exact {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<cd> mat_vec(const std::vector<std::vector<cd>>& m, const std::vector<cd>& v) {
  std::vector<cd> out(m.size(), cd(0, 0));
  for (size_t r = 0; r < m.size(); ++r) {
    cd acc(0, 0);
    for (size_t c = 0; c < v.size(); ++c) acc += m[r][c] * v[c];
    out[r] = acc;
  }
  return out;
}

double norm_sq(const std::vector<cd>& v) {
  double s = 0;
  for (const cd& e : v) s += std::norm(e);
  return s;
}
} // namespace

double distance(Vec2 q, Vec2 g, double altitude_m) {
  return std::sqrt(altitude_m * altitude_m + uavisac::norm_sq(q - g));
}

std::vector<cd> steering(Vec2 q, Vec2 g, double altitude_m, int num_antennas) {
  double d = distance(q, g, altitude_m);
  std::vector<cd> a(static_cast<size_t>(num_antennas));
  for (int i = 0; i < num_antennas; ++i)
    a[static_cast<size_t>(i)] = std::exp(cd(0, -kPi * i * altitude_m / d));
  return a;
}

std::vector<std::vector<cd>> self_interference_matrix(const ScenarioConfig& cfg) {
  int n = cfg.num_antennas;
  double amp = std::sqrt(cfg.si_coeff);
  std::vector<std::vector<cd>> h(static_cast<size_t>(n), std::vector<cd>(static_cast<size_t>(n)));
  for (int rx = 0; rx < n; ++rx) {
    for (int tx = 0; tx < n; ++tx) {
      double dist = 0.5 * cfg.wavelength_m * (n + rx - tx);
      double phase = 2.0 * kPi * dist / cfg.wavelength_m;
      h[static_cast<size_t>(rx)][static_cast<size_t>(tx)] = amp * std::exp(cd(0, phase));
    }
  }
  return h;
}

std::vector<cd> sensing_beam(const ScenarioConfig& cfg, Vec2 q, double p_uav_w) {
  std::vector<cd> x = steering(q, cfg.target, cfg.altitude_m, cfg.num_antennas);
  double s = std::sqrt(p_uav_w / cfg.num_antennas);
  for (cd& e : x) e *= s;
  return x;
}

namespace {

// round-trip matrix H_r = sqrt(ref_gain * rcs * d^-4) a a^H applied to x
std::vector<cd> echo_of(const ScenarioConfig& cfg, Vec2 q, const std::vector<cd>& x) {
  double d = distance(q, cfg.target, cfg.altitude_m);
  double g = std::sqrt(cfg.ref_gain * cfg.rcs_m2 / (d * d * d * d));
  std::vector<cd> a = steering(q, cfg.target, cfg.altitude_m, cfg.num_antennas);
  cd proj(0, 0); // a^H x
  for (size_t i = 0; i < a.size(); ++i) proj += std::conj(a[i]) * x[i];
  std::vector<cd> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = g * a[i] * proj;
  return out;
}

} // namespace

double echo_power(const ScenarioConfig& cfg, Vec2 q, double p_uav_w) {
  return norm_sq(echo_of(cfg, q, sensing_beam(cfg, q, p_uav_w)));
}

double loopback_power(const ScenarioConfig& cfg, Vec2 q, double p_uav_w) {
  return norm_sq(mat_vec(self_interference_matrix(cfg), sensing_beam(cfg, q, p_uav_w)));
}

double exact_comm_sinr(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k) {
  double dk = distance(q, cfg.devices[static_cast<size_t>(k)], cfg.altitude_m);
  double num = cfg.ref_gain * cfg.device_power_w[static_cast<size_t>(k)] * cfg.num_antennas / (dk * dk);

  std::vector<cd> x = sensing_beam(cfg, q, p_uav_w);
  std::vector<cd> echo = echo_of(cfg, q, x);
  std::vector<cd> loop = mat_vec(self_interference_matrix(cfg), x);
  for (size_t i = 0; i < echo.size(); ++i) echo[i] += loop[i];
  double den = norm_sq(echo) + cfg.num_antennas * cfg.noise_w;
  return num / den;
}

double exact_radar_sinr(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int active_device) {
  double num = echo_power(cfg, q, p_uav_w);
  double den = loopback_power(cfg, q, p_uav_w) + cfg.num_antennas * cfg.noise_w;
  if (active_device >= 0) {
    double dk = distance(q, cfg.devices[static_cast<size_t>(active_device)], cfg.altitude_m);
    den += cfg.ref_gain * cfg.device_power_w[static_cast<size_t>(active_device)] / (dk * dk);
  }
  return num / den;
}

} // namespace uavisac::exact
