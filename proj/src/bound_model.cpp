#include "uavisac/bound_model.hpp"

#include "uavisac/exact_model.hpp"

#include <algorithm>
#include <cmath>

namespace uavisac::bound {

namespace {
constexpr double kDenFloor = 1e-300;
inline double safe_div(double num, double den) { return num / std::max(den, kDenFloor); }
} // namespace

Decision zero_decision(const ScenarioConfig& cfg) {
  Decision d;
  size_t K = static_cast<size_t>(cfg.num_devices);
  size_t N = static_cast<size_t>(cfg.num_slots);
  d.beta.assign(K, std::vector<double>(N + 1, 0.0));
  d.traj.assign(N + 1, cfg.depot);
  d.power.assign(N, 0.0);
  d.phi = 0;
  return d;
}

double dist_sq(Vec2 q, Vec2 g, double altitude_m) {
  return std::max(1.0, altitude_m * altitude_m + norm_sq(q - g));
}

double comm_sinr_lb(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k) {
  DerivedConstants c = derive_constants(cfg);
  double d2k = dist_sq(q, cfg.devices[static_cast<size_t>(k)], cfg.altitude_m);
  double d2t = dist_sq(q, cfg.target, cfg.altitude_m);
  double amp = std::sqrt(c.lambda_t) / d2t + std::sqrt(c.lambda_si);
  double den = amp * amp * p_uav_w + cfg.noise_w;
  return safe_div(c.lambda_k[static_cast<size_t>(k)] / d2k, den);
}

double rate_lb(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k) {
  return cfg.bandwidth_hz * std::log2(1.0 + comm_sinr_lb(cfg, q, p_uav_w, k));
}

double radar_sinr_lb(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k, bool transmitting) {
  DerivedConstants c = derive_constants(cfg);
  double d2t = dist_sq(q, cfg.target, cfg.altitude_m);
  double num = c.lambda_t * p_uav_w / (d2t * d2t);
  double den = c.lambda_si * p_uav_w + cfg.noise_w;
  if (transmitting) {
    double d2k = dist_sq(q, cfg.devices[static_cast<size_t>(k)], cfg.altitude_m);
    den += c.lambda_k[static_cast<size_t>(k)] / d2k;
  }
  return safe_div(num, den);
}

double data_volume(const ScenarioConfig& cfg, const Decision& d, int k, bool use_exact) {
  double delta = cfg.slot_seconds();
  double total = 0;
  for (int n = 1; n <= cfg.num_slots; ++n) {
    double b = d.beta[static_cast<size_t>(k)][static_cast<size_t>(n)];
    if (b == 0.0) continue;
    Vec2 q = d.traj[static_cast<size_t>(n)];
    double p = d.power[static_cast<size_t>(n - 1)];
    double rate;
    if (use_exact) {
      double sinr = exact::exact_comm_sinr(cfg, q, p, k);
      rate = cfg.bandwidth_hz * std::log2(1.0 + sinr);
    } else {
      rate = rate_lb(cfg, q, p, k);
    }
    total += delta * b * rate;
  }
  return total;
}

double error_surrogate(const ScenarioConfig& cfg, const Decision& d, int m, bool use_exact) {
  size_t mi = static_cast<size_t>(m);
  double base = cfg.historical_samples[mi];
  for (int k : cfg.groups[mi]) base += data_volume(cfg, d, k, use_exact) / cfg.sample_bits[mi];
  double b = cfg.err_exp[mi];
  if (b == 0.0) return cfg.err_coeff[mi];
  if (base <= 0.0) return std::numeric_limits<double>::infinity();
  return cfg.err_coeff[mi] * std::pow(base, -b);
}

double eta(const ScenarioConfig& cfg, const Decision& d, bool use_exact) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < cfg.num_models; ++m)
    worst = std::max(worst, error_surrogate(cfg, d, m, use_exact));
  return worst;
}

double AuditReport::max_violation() const {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& c : checks) v = std::max(v, c.worst_violation);
  return v;
}

const ConstraintCheck* AuditReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

AuditReport audit(const ScenarioConfig& cfg, const Decision& d, bool use_exact, double tolerance) {
  AuditReport rep;
  rep.tolerance = tolerance;
  int K = cfg.num_devices;
  int N = cfg.num_slots;
  double delta = cfg.slot_seconds();

  auto& checks = rep.checks;
  auto record = [&](ConstraintCheck& c, double violation, int slot, int device) {
    if (violation > c.worst_violation) {
      c.worst_violation = violation;
      c.worst_slot = slot;
      c.worst_device = device;
    }
  };

  ConstraintCheck shape{"decision_shape", -1.0, -1, -1};
  bool shape_ok = d.beta.size() == static_cast<size_t>(K) &&
                  d.traj.size() == static_cast<size_t>(N + 1) &&
                  d.power.size() == static_cast<size_t>(N);
  if (shape_ok)
    for (const auto& row : d.beta) shape_ok = shape_ok && row.size() == static_cast<size_t>(N + 1);
  if (!shape_ok) {
    shape.worst_violation = 1.0;
    rep.checks.push_back(shape);
    rep.feasible = false;
    return rep;
  }
  checks.push_back(shape);

  // objective epigraph: every model's surrogate under phi
  ConstraintCheck epi{"objective_epigraph", -std::numeric_limits<double>::infinity(), -1, -1};
  rep.psi.resize(static_cast<size_t>(cfg.num_models));
  double phi_scale = std::max(std::abs(d.phi), 1e-12);
  for (int m = 0; m < cfg.num_models; ++m) {
    double psi = error_surrogate(cfg, d, m, use_exact);
    rep.psi[static_cast<size_t>(m)] = psi;
    record(epi, (psi - d.phi) / phi_scale, -1, m);
  }
  checks.push_back(epi);

  // time-share box and per-slot sum
  ConstraintCheck box{"time_share_box", -std::numeric_limits<double>::infinity(), -1, -1};
  ConstraintCheck sum{"time_share_sum", -std::numeric_limits<double>::infinity(), -1, -1};
  ConstraintCheck slot0{"time_share_slot0", -std::numeric_limits<double>::infinity(), -1, -1};
  for (int k = 0; k < K; ++k)
    record(slot0, std::abs(d.beta[static_cast<size_t>(k)][0]), 0, k);
  for (int n = 0; n <= N; ++n) {
    double s = 0;
    for (int k = 0; k < K; ++k) {
      double b = d.beta[static_cast<size_t>(k)][static_cast<size_t>(n)];
      record(box, -b, n, k);
      record(box, b - 1.0, n, k);
      s += b;
    }
    record(sum, s - 1.0, n, -1);
  }
  checks.push_back(box);
  checks.push_back(sum);
  checks.push_back(slot0);

  // sensing floor, slots 1..N, every device's on/off state
  ConstraintCheck radar{"radar_sinr", -std::numeric_limits<double>::infinity(), -1, -1};
  rep.min_radar_sinr_per_slot.assign(static_cast<size_t>(N), std::numeric_limits<double>::infinity());
  for (int n = 1; n <= N; ++n) {
    Vec2 q = d.traj[static_cast<size_t>(n)];
    double p = d.power[static_cast<size_t>(n - 1)];
    for (int k = 0; k < K; ++k) {
      bool on = d.beta[static_cast<size_t>(k)][static_cast<size_t>(n)] > 0.0;
      double sinr = use_exact ? exact::exact_radar_sinr(cfg, q, p, on ? k : -1)
                              : radar_sinr_lb(cfg, q, p, k, on);
      rep.min_radar_sinr_per_slot[static_cast<size_t>(n - 1)] =
          std::min(rep.min_radar_sinr_per_slot[static_cast<size_t>(n - 1)], sinr);
      record(radar, (cfg.sensing_threshold - sinr) / cfg.sensing_threshold, n, k);
    }
  }
  checks.push_back(radar);

  // data availability
  ConstraintCheck avail{"data_availability", -std::numeric_limits<double>::infinity(), -1, -1};
  rep.volume_bound.resize(static_cast<size_t>(K));
  rep.volume_exact.resize(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    rep.volume_bound[static_cast<size_t>(k)] = data_volume(cfg, d, k, false);
    rep.volume_exact[static_cast<size_t>(k)] = data_volume(cfg, d, k, true);
    double cap = cfg.device_samples[static_cast<size_t>(k)] *
                 cfg.sample_bits[static_cast<size_t>(cfg.model_of(k))];
    double vol = use_exact ? rep.volume_exact[static_cast<size_t>(k)]
                           : rep.volume_bound[static_cast<size_t>(k)];
    record(avail, (vol - cap) / std::max(cap, 1.0), -1, k);
  }
  checks.push_back(avail);

  // power cap
  ConstraintCheck pow_c{"power_cap", -std::numeric_limits<double>::infinity(), -1, -1};
  for (int n = 1; n <= N; ++n) {
    double p = d.power[static_cast<size_t>(n - 1)];
    record(pow_c, -p / cfg.uav_power_cap_w, n, -1);
    record(pow_c, (p - cfg.uav_power_cap_w) / cfg.uav_power_cap_w, n, -1);
  }
  checks.push_back(pow_c);

  // endpoints and mobility
  double vd = cfg.v_max_mps * delta;
  ConstraintCheck ends{"endpoint", -std::numeric_limits<double>::infinity(), -1, -1};
  record(ends, std::sqrt(norm_sq(d.traj[0] - cfg.depot)) / vd, 0, -1);
  record(ends, std::sqrt(norm_sq(d.traj[static_cast<size_t>(N)] - cfg.depot)) / vd, N, -1);
  checks.push_back(ends);

  ConstraintCheck mob{"mobility", -std::numeric_limits<double>::infinity(), -1, -1};
  for (int n = 1; n <= N; ++n) {
    double step = std::sqrt(norm_sq(d.traj[static_cast<size_t>(n)] - d.traj[static_cast<size_t>(n - 1)]));
    record(mob, (step - vd) / vd, n, -1);
  }
  checks.push_back(mob);

  rep.eta_value = eta(cfg, d, use_exact);
  rep.feasible = rep.max_violation() <= tolerance;
  return rep;
}

} // namespace uavisac::bound
