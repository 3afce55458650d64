#include "uavisac/report_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace uavisac::io {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

json decision_json(const bound::Decision& d) {
  json j;
  j["beta"] = d.beta;
  json traj = json::array();
  for (const Vec2& q : d.traj) traj.push_back({q.x, q.y});
  j["traj"] = std::move(traj);
  j["power"] = d.power;
  j["phi"] = d.phi;
  return j;
}

json audit_json(const bound::AuditReport& a) {
  json j;
  j["feasible"] = a.feasible;
  j["tolerance"] = a.tolerance;
  j["max_violation"] = a.max_violation();
  j["eta"] = a.eta_value;
  j["psi"] = a.psi;
  j["volume_bound"] = a.volume_bound;
  j["volume_exact"] = a.volume_exact;
  j["min_radar_sinr_per_slot"] = a.min_radar_sinr_per_slot;
  json checks = json::array();
  for (const auto& c : a.checks) {
    checks.push_back({{"name", c.name},
                      {"worst_violation", c.worst_violation},
                      {"slot", c.worst_slot},
                      {"device", c.worst_device}});
  }
  j["checks"] = std::move(checks);
  return j;
}

}  // namespace

std::string decision_to_json(const bound::Decision& d) {
  return decision_json(d).dump(2) + "\n";
}

bound::Decision decision_from_json(const std::string& text) {
  json j = json::parse(text);
  bound::Decision d;
  d.beta = j.at("beta").get<std::vector<std::vector<double>>>();
  for (const auto& q : j.at("traj"))
    d.traj.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
  d.power = j.at("power").get<std::vector<double>>();
  d.phi = j.at("phi").get<double>();
  return d;
}

std::string report_to_json(const ScenarioConfig& cfg, const drv::RunReport& rep) {
  json j;
  j["algo"] = drv::to_string(rep.algo);
  j["gamma_th"] = rep.gamma_th;
  j["num_slots"] = rep.num_slots;
  j["termination"] = rep.termination;
  j["iterations"] = rep.iterations.size();
  j["objective_trace"] = rep.objective_trace;
  j["eta_trace"] = rep.eta_trace;
  j["eta_initial"] = rep.eta_initial;
  j["eta_final"] = rep.eta_final;
  j["eta_rectified_exact"] = rep.eta_rectified_exact;
  j["min_volume_final"] = rep.min_volume_final;
  j["rectify_scale"] = rep.rectify_scale;

  json prop = json::array();
  for (int k = 0; k < cfg.num_devices; ++k) {
    double cap = cfg.device_samples[size_t(k)] * cfg.sample_bits[size_t(cfg.model_of(k))];
    double vol = rep.audit_exact.volume_exact.empty()
                     ? 0
                     : rep.audit_exact.volume_exact[size_t(k)];
    prop.push_back(cap > 0 ? vol / cap : 0);
  }
  j["collected_proportion"] = std::move(prop);

  json iters = json::array();
  for (const auto& rec : rep.iterations) {
    json blocks = json::array();
    for (const auto& b : rec.blocks) {
      blocks.push_back({{"block", b.block},
                        {"status", opt::to_string(b.status)},
                        {"newton_iters", b.newton_iters},
                        {"accepted", b.accepted},
                        {"failed", b.failed},
                        {"retried", b.retried},
                        {"objective_after", b.objective_after},
                        {"wall_ms", b.wall_ms}});
    }
    iters.push_back({{"index", rec.index},
                     {"objective", rec.objective},
                     {"eta", rec.eta},
                     {"max_violation", rec.max_violation},
                     {"blocks", std::move(blocks)}});
  }
  j["iteration_details"] = std::move(iters);

  j["initial_decision"] = decision_json(rep.initial_decision);
  j["final_decision"] = decision_json(rep.final_decision);
  j["rectified_decision"] = decision_json(rep.rectified_decision);
  j["audit_bound"] = audit_json(rep.audit_bound);
  j["audit_exact"] = audit_json(rep.audit_exact);
  j["wall_ms_total"] = rep.wall_ms_total;
  j["config"] = json::parse(serialize(cfg));
  return j.dump(2) + "\n";
}

void write_run_outputs(const std::string& dir, const ScenarioConfig& cfg,
                       const drv::RunReport& rep) {
  std::filesystem::create_directories(dir);
  const auto& d = rep.final_decision;
  const int K = cfg.num_devices, N = cfg.num_slots;

  {
    auto out = open_out(dir + "/trajectory.csv");
    out << "n,x_m,y_m\n";
    for (int n = 0; n <= N; ++n)
      out << n << ',' << fmt(d.traj[size_t(n)].x) << ',' << fmt(d.traj[size_t(n)].y)
          << '\n';
  }
  {
    auto out = open_out(dir + "/allocation.csv");
    out << "n";
    for (int k = 1; k <= K; ++k) out << ",beta_" << k;
    out << ",idle\n";
    for (int n = 1; n <= N; ++n) {
      out << n;
      double used = 0;
      for (int k = 0; k < K; ++k) {
        double b = d.beta[size_t(k)][size_t(n)];
        used += b;
        out << ',' << fmt(b);
      }
      out << ',' << fmt(1.0 - used) << '\n';
    }
  }
  {
    auto out = open_out(dir + "/power.csv");
    out << "n,p_w\n";
    for (int n = 1; n <= N; ++n) out << n << ',' << fmt(d.power[size_t(n - 1)]) << '\n';
  }
  {
    auto out = open_out(dir + "/iterations.csv");
    out << "iter,objective,eta,max_violation,newton_time_shares,newton_trajectory,"
           "newton_power,accepted_time_shares,accepted_trajectory,accepted_power\n";
    for (const auto& rec : rep.iterations) {
      int newton[3] = {0, 0, 0};
      int accepted[3] = {0, 0, 0};
      for (const auto& b : rec.blocks) {
        int slot = b.block == "time_shares" ? 0 : b.block == "trajectory" ? 1 : 2;
        newton[slot] = b.newton_iters;
        accepted[slot] = b.accepted ? 1 : 0;
      }
      out << rec.index << ',' << fmt(rec.objective) << ',' << fmt(rec.eta) << ','
          << fmt(rec.max_violation);
      for (int s = 0; s < 3; ++s) out << ',' << newton[s];
      for (int s = 0; s < 3; ++s) out << ',' << accepted[s];
      out << '\n';
    }
  }
  {
    auto out = open_out(dir + "/report.json");
    out << report_to_json(cfg, rep);
  }
}

void write_sweep_csv(const std::string& path, const std::string& param,
                     const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  out << param
      << ",eta_final,eta_rectified_exact,min_volume_bits,min_echo_slack,"
         "iterations,termination,feasible_start,wall_ms\n";
  for (const auto& r : rows) {
    out << fmt(r.value) << ',' << fmt(r.eta_final) << ',' << fmt(r.eta_rectified_exact)
        << ',' << fmt(r.min_volume_bits) << ',' << fmt(r.min_echo_slack) << ','
        << r.iterations << ',' << r.termination << ',' << (r.feasible_start ? 1 : 0)
        << ',' << fmt(r.wall_ms) << '\n';
  }
}

}  // namespace uavisac::io
