#include "uavisac/scenario.hpp"

#include "uavisac/units.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace uavisac {

using nlohmann::json;
using units::Dimension;

namespace {

double quantity(const json& j, const std::string& key, Dimension dim) {
  const json& v = j.at(key);
  try {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return units::parse_quantity(v.get<std::string>(), dim);
  } catch (const std::invalid_argument& e) {
    throw ConfigParseError("field '" + key + "': " + e.what());
  }
  throw ConfigParseError("field '" + key + "' must be a number or a quantity string");
}

Vec2 position(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2)
    throw ConfigParseError("field '" + key + "' must be a 2-element array");
  auto coord = [&](const json& c) {
    if (c.is_number()) return c.get<double>();
    if (c.is_string()) return units::parse_quantity(c.get<std::string>(), Dimension::length);
    throw ConfigParseError("field '" + key + "' coordinates must be numbers or length strings");
  };
  return {coord(v[0]), coord(v[1])};
}

std::vector<double> number_list(const json& j, const std::string& key, size_t want) {
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != want)
    throw ConfigParseError("field '" + key + "' must be an array of " + std::to_string(want));
  std::vector<double> out;
  out.reserve(want);
  for (const auto& e : v) out.push_back(e.get<double>());
  return out;
}

} // namespace

ScenarioConfig parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(std::string("config is not valid JSON: ") + e.what());
  }

  ScenarioConfig cfg;
  try {
    cfg.num_devices = j.at("num_devices").get<int>();
    cfg.num_models = j.at("num_models").get<int>();
    cfg.num_slots = j.at("num_slots").get<int>();
    cfg.period_s = quantity(j, "period", Dimension::time);
    cfg.altitude_m = quantity(j, "altitude", Dimension::length);
    cfg.v_max_mps = quantity(j, "v_max", Dimension::speed);
    cfg.bandwidth_hz = quantity(j, "bandwidth", Dimension::frequency);

    // Noise: either total receive noise power per antenna, or a spectral
    // density that is scaled by the configured bandwidth.
    if (j.contains("noise_power")) {
      cfg.noise_w = quantity(j, "noise_power", Dimension::power);
    } else if (j.contains("noise_psd_dbm_per_hz")) {
      cfg.noise_w = units::dbm_to_watts(j.at("noise_psd_dbm_per_hz").get<double>()) * cfg.bandwidth_hz;
    } else {
      throw ConfigParseError("one of 'noise_power' or 'noise_psd_dbm_per_hz' is required");
    }

    cfg.ref_gain = quantity(j, "ref_gain", Dimension::ratio);
    cfg.rcs_m2 = quantity(j, "rcs", Dimension::area);
    cfg.si_coeff = quantity(j, "si_coeff", Dimension::ratio);
    cfg.wavelength_m = quantity(j, "wavelength", Dimension::length);
    cfg.num_antennas = j.at("num_antennas").get<int>();

    cfg.depot = position(j.at("depot_pos"), "depot_pos");
    cfg.target = position(j.at("target_pos"), "target_pos");
    const json& dv = j.at("device_pos");
    if (!dv.is_array()) throw ConfigParseError("field 'device_pos' must be an array");
    for (size_t i = 0; i < dv.size(); ++i)
      cfg.devices.push_back(position(dv[i], "device_pos[" + std::to_string(i) + "]"));

    const json& dp = j.at("device_power");
    if (dp.is_array()) {
      for (const auto& e : dp)
        cfg.device_power_w.push_back(
            e.is_string() ? units::parse_quantity(e.get<std::string>(), Dimension::power)
                          : e.get<double>());
    } else {
      double p = quantity(j, "device_power", Dimension::power);
      cfg.device_power_w.assign(static_cast<size_t>(std::max(cfg.num_devices, 0)), p);
    }
    cfg.uav_power_cap_w = quantity(j, "uav_power_cap", Dimension::power);
    cfg.sensing_threshold = quantity(j, "sensing_threshold", Dimension::ratio);

    const json& gr = j.at("groups");
    if (!gr.is_array()) throw ConfigParseError("field 'groups' must be an array of arrays");
    for (const auto& g : gr) {
      std::vector<int> ids;
      for (const auto& e : g) ids.push_back(e.get<int>() - 1); // file is 1-based
      cfg.groups.push_back(std::move(ids));
    }

    size_t m = static_cast<size_t>(std::max(cfg.num_models, 0));
    size_t k = static_cast<size_t>(std::max(cfg.num_devices, 0));
    cfg.sample_bits = number_list(j, "sample_size_bits", m);
    cfg.device_samples = number_list(j, "device_samples", k);
    cfg.historical_samples = number_list(j, "historical_samples", m);
    cfg.err_coeff = number_list(j, "error_coeff", m);
    cfg.err_exp = number_list(j, "error_exp", m);
    cfg.bcd_tol = j.value("bcd_tol", 1e-3);
  } catch (const json::exception& e) {
    throw ConfigParseError(std::string("config schema error: ") + e.what());
  }

  // group_of inverse map (validated later)
  cfg.group_of.assign(static_cast<size_t>(std::max(cfg.num_devices, 0)), -1);
  for (size_t mi = 0; mi < cfg.groups.size(); ++mi)
    for (int id : cfg.groups[mi])
      if (id >= 0 && id < cfg.num_devices) cfg.group_of[static_cast<size_t>(id)] = static_cast<int>(mi);

  validate(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

void validate(const ScenarioConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ConfigValidationError(msg); };

  if (cfg.num_devices <= 0) fail("num_devices must be positive");
  if (cfg.num_models <= 0) fail("num_models must be positive");
  if (cfg.num_slots <= 0) fail("num_slots must be positive");
  if (!(cfg.period_s > 0)) fail("period must be positive");
  if (!(cfg.altitude_m > 0)) fail("altitude must be positive");
  if (!(cfg.v_max_mps > 0)) fail("v_max must be positive");
  if (!(cfg.bandwidth_hz > 0)) fail("bandwidth must be positive");
  if (!(cfg.noise_w > 0)) fail("noise power must be positive");
  if (!(cfg.ref_gain > 0)) fail("ref_gain must be positive");
  if (!(cfg.rcs_m2 > 0)) fail("rcs must be positive");
  if (!(cfg.si_coeff > 0)) fail("si_coeff must be positive");
  if (!(cfg.wavelength_m > 0)) fail("wavelength must be positive");
  if (cfg.num_antennas <= 0) fail("num_antennas must be positive");
  if (!(cfg.uav_power_cap_w > 0)) fail("uav_power_cap must be positive");
  if (!(cfg.sensing_threshold > 0)) fail("sensing_threshold must be positive");

  size_t K = static_cast<size_t>(cfg.num_devices);
  size_t M = static_cast<size_t>(cfg.num_models);
  if (cfg.devices.size() != K) fail("device_pos must list exactly num_devices positions");
  if (cfg.device_power_w.size() != K) fail("device_power must list exactly num_devices values");
  for (size_t k = 0; k < K; ++k)
    if (!(cfg.device_power_w[k] > 0)) fail("device_power[" + std::to_string(k + 1) + "] must be positive");

  if (cfg.groups.size() != M) fail("groups must list exactly num_models groups");
  std::set<int> seen;
  for (size_t mi = 0; mi < M; ++mi) {
    for (int id : cfg.groups[mi]) {
      if (id < 0 || id >= cfg.num_devices)
        fail("groups[" + std::to_string(mi + 1) + "] contains device id out of range");
      if (!seen.insert(id).second)
        fail("device " + std::to_string(id + 1) + " appears in more than one group");
    }
  }
  if (seen.size() != K) fail("groups must partition all devices (some device is unassigned)");

  for (size_t mi = 0; mi < M; ++mi) {
    if (!(cfg.sample_bits[mi] > 0)) fail("sample_size_bits must be positive");
    if (cfg.historical_samples[mi] < 0) fail("historical_samples must be nonnegative");
    if (!(cfg.err_coeff[mi] > 0)) fail("error_coeff must be positive");
    if (cfg.err_exp[mi] < 0) fail("error_exp must be nonnegative");
  }
  for (size_t k = 0; k < K; ++k)
    if (cfg.device_samples[k] < 0) fail("device_samples must be nonnegative");

  double delta = cfg.period_s / cfg.num_slots;
  if (!(delta > 0) || std::abs(delta * cfg.num_slots - cfg.period_s) > 1e-9 * cfg.period_s)
    fail("period must equal num_slots * slot length exactly");
  if (!(cfg.bcd_tol > 0)) fail("bcd_tol must be positive");
}

std::string serialize(const ScenarioConfig& cfg) {
  json j;
  j["num_devices"] = cfg.num_devices;
  j["num_models"] = cfg.num_models;
  j["num_slots"] = cfg.num_slots;
  j["period"] = cfg.period_s;
  j["altitude"] = cfg.altitude_m;
  j["v_max"] = cfg.v_max_mps;
  j["bandwidth"] = cfg.bandwidth_hz;
  j["noise_power"] = cfg.noise_w;
  j["ref_gain"] = cfg.ref_gain;
  j["rcs"] = cfg.rcs_m2;
  j["si_coeff"] = cfg.si_coeff;
  j["wavelength"] = cfg.wavelength_m;
  j["num_antennas"] = cfg.num_antennas;
  j["depot_pos"] = {cfg.depot.x, cfg.depot.y};
  j["target_pos"] = {cfg.target.x, cfg.target.y};
  json dv = json::array();
  for (const auto& d : cfg.devices) dv.push_back({d.x, d.y});
  j["device_pos"] = dv;
  j["device_power"] = cfg.device_power_w;
  j["uav_power_cap"] = cfg.uav_power_cap_w;
  j["sensing_threshold"] = cfg.sensing_threshold;
  json gr = json::array();
  for (const auto& g : cfg.groups) {
    json ids = json::array();
    for (int id : g) ids.push_back(id + 1);
    gr.push_back(ids);
  }
  j["groups"] = gr;
  j["sample_size_bits"] = cfg.sample_bits;
  j["device_samples"] = cfg.device_samples;
  j["historical_samples"] = cfg.historical_samples;
  j["error_coeff"] = cfg.err_coeff;
  j["error_exp"] = cfg.err_exp;
  j["bcd_tol"] = cfg.bcd_tol;
  return j.dump(2);
}

DerivedConstants derive_constants(const ScenarioConfig& cfg) {
  DerivedConstants d;
  d.lambda_si = cfg.si_coeff * cfg.num_antennas;
  d.lambda_t = cfg.ref_gain * cfg.rcs_m2 * cfg.num_antennas;
  d.lambda_k.reserve(cfg.device_power_w.size());
  for (double p : cfg.device_power_w) d.lambda_k.push_back(cfg.ref_gain * p);
  d.noise_w = cfg.noise_w;
  return d;
}

SurrogateFit fit_error_surrogate(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2)
    throw ConfigValidationError("surrogate fit needs at least two (count, error) pairs");
  std::vector<double> x, y;
  x.reserve(pairs.size());
  y.reserve(pairs.size());
  for (const auto& [count, error] : pairs) {
    if (!(count > 0)) throw ConfigValidationError("surrogate fit: counts must be positive");
    if (!(error > 0 && error < 1))
      throw ConfigValidationError("surrogate fit: errors must lie in (0,1)");
    x.push_back(std::log(count));
    y.push_back(std::log(error));
  }
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw ConfigValidationError("surrogate fit: counts must not all be equal");
  double slope = sxy / sxx;

  SurrogateFit fit;
  if (slope >= 0) {
    fit.b = 0.0;
    fit.a = std::exp(my);
  } else {
    fit.b = -slope;
    fit.a = std::exp(my + fit.b * mx);
  }
  return fit;
}

} // namespace uavisac
