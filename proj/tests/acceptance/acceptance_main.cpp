// Acceptance harness: exercises the full pipeline on the reference scenario
// and prints one PASS/FAIL line per criterion. Exit code = number of
// failures. argv[1] = scenario json, argv[2] = CLI binary (for the
// determinism check).

#include "uavisac/bound_model.hpp"
#include "uavisac/builders.hpp"
#include "uavisac/driver.hpp"
#include "uavisac/exact_model.hpp"
#include "uavisac/oracle.hpp"
#include "uavisac/scenario.hpp"
#include "uavisac/solver.hpp"
#include "uavisac/subproblem.hpp"
#include "uavisac/transforms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <sys/wait.h>

using namespace uavisac;

namespace {

int g_failures = 0;

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[768];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

void verdict(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %-20s %s\n", ok ? "PASS" : "FAIL", idx, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double wall_s() {
  using clk = std::chrono::steady_clock;
  static const clk::time_point t0 = clk::now();
  return std::chrono::duration<double>(clk::now() - t0).count();
}

double urand(std::mt19937& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double cap_bits(const ScenarioConfig& cfg, int k) {
  return cfg.device_samples[size_t(k)] * cfg.sample_bits[size_t(cfg.model_of(k))];
}

// ---------------------------------------------------------------------------
// shared run bookkeeping (feasibility criterion re-audits every run)

struct RunCase {
  std::string name;
  ScenarioConfig cfg;
  drv::RunReport rep;
};

std::vector<RunCase> g_runs;

const drv::RunReport& do_run(const std::string& name, const ScenarioConfig& cfg,
                             drv::Algo algo) {
  double t = wall_s();
  RunCase rc;
  rc.name = name;
  rc.cfg = cfg;
  rc.rep = drv::run(cfg, algo);
  std::fprintf(stderr, "  [run] %-18s algo=%s eta=%.9g iters=%zu term=%s (%.1fs)\n",
               name.c_str(), drv::to_string(algo), rc.rep.eta_final,
               rc.rep.iterations.size(), rc.rep.termination.c_str(), wall_s() - t);
  g_runs.push_back(std::move(rc));
  return g_runs.back().rep;
}

// ---------------------------------------------------------------------------
// criterion 1: monotone descent at the largest admissible sensing threshold

void c1_descent(const ScenarioConfig& cfg) {
  auto initializes = [&](double gth) {
    ScenarioConfig c = cfg;
    c.sensing_threshold = gth;
    try {
      drv::initialize(c);
      return true;
    } catch (const drv::InfeasibleScenario&) {
      return false;
    }
  };
  double gstar = 0;
  for (int k = 0; k < cfg.num_devices; ++k)
    gstar = std::max(gstar, bound::radar_sinr_lb(cfg, cfg.depot, cfg.uav_power_cap_w, k, true));

  double lo = cfg.sensing_threshold, hi = 2.0 * gstar;
  if (!initializes(lo) || initializes(hi)) {
    verdict(1, "monotone_descent", false,
            fmt("bracket broken: init(%.6g)=%d init(%.6g)=%d", lo, initializes(lo), hi,
                initializes(hi)));
    return;
  }
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (initializes(mid) ? lo : hi) = mid;
  }

  ScenarioConfig cmax = cfg;
  cmax.sensing_threshold = lo;
  const drv::RunReport& rep = do_run("gamma_max", cmax, drv::Algo::proposed);

  bool mono = true;
  double worst_step = 0;
  for (size_t i = 1; i < rep.eta_trace.size(); ++i) {
    double step = rep.eta_trace[i] - rep.eta_trace[i - 1];
    worst_step = std::max(worst_step, step);
    if (step > 1e-9) mono = false;
  }
  bool conv = rep.termination == "tolerance";
  bool iters_ok = rep.iterations.size() <= 100;
  bool time_ok = rep.wall_ms_total <= 600e3;
  bool recorded = rep.gamma_th == lo;
  bool ok = mono && conv && iters_ok && time_ok && recorded;
  verdict(1, "monotone_descent", ok,
          fmt("gamma_max=%.12g (closed form %.12g), worst step %.3g, term=%s, "
              "iters=%zu, %.1fs",
              lo, gstar, worst_step, rep.termination.c_str(), rep.iterations.size(),
              rep.wall_ms_total / 1e3));
}

// ---------------------------------------------------------------------------
// criterion 2: final objective ordering across the three algorithms

void c2_ordering(const ScenarioConfig& cfg) {
  double ep = do_run("proposed", cfg, drv::Algo::proposed).eta_final;
  double ec = do_run("constp", cfg, drv::Algo::constp).eta_final;
  double et = do_run("tmax", cfg, drv::Algo::tmax).eta_final;
  bool ok = ep <= ec + 1e-6 && ec <= et + 1e-6;
  verdict(2, "algo_ordering", ok,
          fmt("proposed=%.9g constp=%.9g tmax=%.9g", ep, ec, et));
}

// ---------------------------------------------------------------------------
// criterion 3: longer flights help, tighter echo floors hurt

void c3_trends(const ScenarioConfig& cfg) {
  double eta40 = 0;
  for (const auto& rc : g_runs)
    if (rc.name == "proposed") eta40 = rc.rep.eta_final;

  auto with_period = [&](double T) {
    ScenarioConfig c = cfg;
    double delta = cfg.slot_seconds();
    c.period_s = T;
    c.num_slots = int(std::lround(T / delta));
    return c;
  };
  double eta70 = do_run("T=70", with_period(70), drv::Algo::proposed).eta_final;
  double eta100 = do_run("T=100", with_period(100), drv::Algo::proposed).eta_final;
  bool t_ok = eta70 <= eta40 + 1e-9 && eta100 <= eta70 + 1e-9;

  double gstar = 0;
  for (int k = 0; k < cfg.num_devices; ++k)
    gstar = std::max(gstar, bound::radar_sinr_lb(cfg, cfg.depot, cfg.uav_power_cap_w, k, true));
  auto with_gth = [&](double g) {
    ScenarioConfig c = cfg;
    c.sensing_threshold = g;
    return c;
  };
  double e_lo = do_run("gth_low", with_gth(0.60 * gstar), drv::Algo::proposed).eta_final;
  double e_mid = eta40;  // scenario threshold is 0.75 * gstar
  double e_hi = do_run("gth_high", with_gth(0.90 * gstar), drv::Algo::proposed).eta_final;
  bool g_ok = e_lo <= e_mid + 1e-9 && e_mid <= e_hi + 1e-9;

  verdict(3, "trend_reproduction", t_ok && g_ok,
          fmt("T: %.9g / %.9g / %.9g; gth: %.9g / %.9g / %.9g", eta40, eta70, eta100,
              e_lo, e_mid, e_hi));
}

// ---------------------------------------------------------------------------
// criterion 4: the closed-form bounds never cross the quantities they bound

struct BoundStats {
  long violations = 0;
  double worst = -1e300;
};

void run_family(BoundStats& s, int draws, const std::function<double()>& excess) {
  for (int i = 0; i < draws; ++i) {
    double e = excess();
    s.worst = std::max(s.worst, e);
    if (e > 1e-12) ++s.violations;
  }
}

void c4_bounds(const ScenarioConfig& cfg) {
  const DerivedConstants dc = derive_constants(cfg);
  const double H = cfg.altitude_m;
  const double pcap = cfg.uav_power_cap_w;
  const double xlo = 1550, xhi = 2350, ylo = 2450, yhi = 3250;
  const int draws = 10000;

  auto pt = [&](std::mt19937& rng) -> Vec2 {
    return {urand(rng, xlo, xhi), urand(rng, ylo, yhi)};
  };
  auto pt_pair = [&](std::mt19937& rng, Vec2* a, Vec2* b) {
    do {
      *a = pt(rng);
      *b = pt(rng);
    } while (norm_sq(*a - *b) < 1e-4);
  };

  std::map<std::string, BoundStats> st;

  {
    std::mt19937 rng(9101);
    run_family(st["uplink"], draws, [&] {
      Vec2 q = pt(rng);
      double p = urand(rng, 1e-3 * pcap, pcap);
      int k = int(urand(rng, 0, 1) * cfg.num_devices) % cfg.num_devices;
      return bound::comm_sinr_lb(cfg, q, p, k) - exact::exact_comm_sinr(cfg, q, p, k);
    });
  }
  {
    std::mt19937 rng(9102);
    run_family(st["echo_busy"], draws, [&] {
      Vec2 q = pt(rng);
      double p = urand(rng, 1e-3 * pcap, pcap);
      int k = int(urand(rng, 0, 1) * cfg.num_devices) % cfg.num_devices;
      return bound::radar_sinr_lb(cfg, q, p, k, true) - exact::exact_radar_sinr(cfg, q, p, k);
    });
  }
  {
    std::mt19937 rng(9103);
    run_family(st["echo_silent"], draws, [&] {
      Vec2 q = pt(rng);
      double p = urand(rng, 1e-3 * pcap, pcap);
      return bound::radar_sinr_lb(cfg, q, p, 0, false) - exact::exact_radar_sinr(cfg, q, p, -1);
    });
  }
  {
    std::mt19937 rng(9104);
    run_family(st["inv_sq_range"], draws, [&] {
      Vec2 q, qp;
      pt_pair(rng, &q, &qp);
      Vec2 g = pt(rng);
      return cvx::inv_sq_dist_lb(q, g, H, qp) - 1.0 / bound::dist_sq(q, g, H);
    });
  }
  {
    std::mt19937 rng(9105);
    run_family(st["sq_range"], draws, [&] {
      Vec2 q, qp;
      pt_pair(rng, &q, &qp);
      Vec2 g = pt(rng);
      return cvx::sq_dist_lb(q, g, H, qp) - bound::dist_sq(q, g, H);
    });
  }
  {
    std::mt19937 rng(9106);
    run_family(st["inv_quad_range"], draws, [&] {
      Vec2 q, qp;
      pt_pair(rng, &q, &qp);
      Vec2 g = pt(rng);
      double d2 = bound::dist_sq(q, g, H);
      return cvx::inv_quad_dist_lb(q, g, H, qp) - 1.0 / (d2 * d2);
    });
  }
  {
    std::mt19937 rng(9107);
    run_family(st["ratio_lb"], draws, [&] {
      double g = std::exp(urand(rng, std::log(1e-4), std::log(1e4)));
      double x = std::exp(urand(rng, std::log(1e-6), std::log(1e6)));
      double f = g * x;
      double u;
      do {
        u = urand(rng, 0.25, 4.0);
      } while (std::fabs(u - 1.0) < 0.01);
      double alpha = u * cvx::ratio_lb_multiplier(f, g);
      return cvx::ratio_lb(f, g, alpha) - f / g;
    });
  }
  {
    std::mt19937 rng(9108);
    run_family(st["log_ratio_ub"], draws, [&] {
      double g = std::exp(urand(rng, std::log(1e-4), std::log(1e4)));
      double x = std::exp(urand(rng, std::log(1e-6), std::log(1e6)));
      double f = g * x;
      double ts = cvx::log_ratio_ub_theta(f, g);
      double theta;
      do {
        theta = urand(rng, 0.01, 0.99);
      } while (std::fabs(theta - ts) < 0.01);
      double u;
      do {
        u = urand(rng, 0.2, 1.8);
      } while (std::fabs(u - 1.0) < 0.01);
      double rho = u * cvx::log_ratio_ub_rho(f, g);
      auto ub = cvx::log_ratio_ub(f, g, theta, rho);
      if (!ub) return 1.0;  // guard must stay positive for rho < 2 rho*
      return std::log1p(f / g) - *ub;
    });
  }
  {
    std::mt19937 rng(9109);
    const double bits_scale = cfg.bandwidth_hz / std::log(2.0);
    run_family(st["power_tangent"], draws, [&] {
      Vec2 q = pt(rng);
      int k = int(urand(rng, 0, 1) * cfg.num_devices) % cfg.num_devices;
      double p0, p;
      do {
        p0 = urand(rng, 1e-3 * pcap, pcap);
        p = urand(rng, 0.0, pcap);
      } while (std::fabs(p - p0) < 1e-3 * pcap);
      double d2k = bound::dist_sq(q, cfg.devices[size_t(k)], H);
      double d2t = bound::dist_sq(q, cfg.target, H);
      double stq = std::sqrt(dc.lambda_t) / d2t + std::sqrt(dc.lambda_si);
      double zeta = stq * stq;
      double kap = dc.lambda_k[size_t(k)] / d2k;
      double den = zeta * p0 + dc.noise_w;
      double slope = bits_scale * zeta * (1.0 / (kap + den) - 1.0 / den);
      double tangent = bound::rate_lb(cfg, q, p0, k) + slope * (p - p0);
      return tangent - bound::rate_lb(cfg, q, p, k);
    });
  }

  bool ok = true;
  std::string detail;
  for (auto& [name, s] : st) {
    ok = ok && s.violations == 0;
    detail += fmt("%s:%ld(worst %.2g) ", name.c_str(), s.violations, s.worst);
  }
  verdict(4, "bound_validity", ok, detail);
}

// ---------------------------------------------------------------------------
// criterion 5: every surrogate reproduces the true quantity at its expansion

opt::VecX expansion_vector(const cvx::BuiltSubproblem& b, const ScenarioConfig& cfg,
                           const bound::Decision& at) {
  opt::VecX x = b.problem.x0;
  const int N = cfg.num_slots, K = cfg.num_devices;
  for (int k = 0; k < K; ++k)
    for (int n = 1; n <= N; ++n) {
      if (!b.beta_var.empty() && b.beta_var[size_t(k)][size_t(n - 1)] >= 0)
        x[b.beta_var[size_t(k)][size_t(n - 1)]] = at.beta[size_t(k)][size_t(n)];
      if (!b.e_var.empty() && b.e_var[size_t(k)][size_t(n - 1)] >= 0)
        x[b.e_var[size_t(k)][size_t(n - 1)]] =
            bound::dist_sq(at.traj[size_t(n)], cfg.devices[size_t(k)], cfg.altitude_m);
    }
  for (int n = 1; n <= N; ++n) {
    if (!b.qx_var.empty() && b.qx_var[size_t(n)] >= 0) {
      x[b.qx_var[size_t(n)]] = at.traj[size_t(n)].x;
      x[b.qy_var[size_t(n)]] = at.traj[size_t(n)].y;
    }
    if (!b.u_var.empty() && b.u_var[size_t(n - 1)] >= 0)
      x[b.u_var[size_t(n - 1)]] =
          bound::dist_sq(at.traj[size_t(n)], cfg.target, cfg.altitude_m);
    if (!b.p_var.empty() && b.p_var[size_t(n - 1)] >= 0)
      x[b.p_var[size_t(n - 1)]] = at.power[size_t(n - 1)];
  }
  if (b.phi_var >= 0) x[b.phi_var] = 0.0;
  return x;
}

std::map<std::string, std::vector<double>> surrogate_values(
    const cvx::BuiltSubproblem& b, const opt::VecX& x) {
  std::map<std::string, std::vector<double>> got;
  for (size_t i = 0; i < b.problem.linear.size(); ++i)
    got[b.problem.linear[i].label].push_back(b.problem.linear_value(int(i), x));
  for (const auto& f : b.problem.smooth) got[f->label].push_back(f->value(x));
  return got;
}

bool match_lists(const std::string& where, std::map<std::string, std::vector<double>> got,
                 std::map<std::string, std::vector<double>> want, std::string* msg) {
  if (got.size() != want.size()) {
    *msg = fmt("%s: %zu surrogate families vs %zu expected", where.c_str(), got.size(),
               want.size());
    return false;
  }
  for (auto& [label, gv] : got) {
    auto it = want.find(label);
    if (it == want.end()) {
      *msg = where + "/" + label + ": unexpected family";
      return false;
    }
    auto& wv = it->second;
    if (gv.size() != wv.size()) {
      *msg = fmt("%s/%s: %zu values vs %zu expected", where.c_str(), label.c_str(),
                 gv.size(), wv.size());
      return false;
    }
    std::sort(gv.begin(), gv.end());
    std::sort(wv.begin(), wv.end());
    for (size_t i = 0; i < gv.size(); ++i) {
      double tol = 1e-9 * std::max(1.0, std::fabs(wv[i]));
      if (std::fabs(gv[i] - wv[i]) > tol) {
        *msg = fmt("%s/%s[%zu]: surrogate %.15g vs true %.15g", where.c_str(),
                   label.c_str(), i, gv[i], wv[i]);
        return false;
      }
    }
  }
  return true;
}

void c5_tightness(const ScenarioConfig& cfg) {
  const bound::Decision at = drv::initialize(cfg).decision;
  const DerivedConstants dc = derive_constants(cfg);
  const int N = cfg.num_slots, K = cfg.num_devices, M = cfg.num_models;
  const double H = cfg.altitude_m, gth = cfg.sensing_threshold, n0 = dc.noise_w;
  const double phi_hi = cvx::phi_upper_bound(cfg, at);
  const double vd = cfg.v_max_mps * cfg.slot_seconds();

  std::vector<std::vector<char>> active(size_t(K), std::vector<char>(size_t(N), 0));
  std::vector<char> slot_active(size_t(N), 0);
  for (int k = 0; k < K; ++k)
    for (int n = 1; n <= N; ++n)
      if (at.beta[size_t(k)][size_t(n)] > 0) {
        active[size_t(k)][size_t(n - 1)] = 1;
        slot_active[size_t(n - 1)] = 1;
      }
  auto any_active = [&](int k) {
    for (int n = 1; n <= N; ++n)
      if (active[size_t(k)][size_t(n - 1)]) return true;
    return false;
  };
  auto psi_scaled = [&](int m) {
    return bound::error_surrogate(cfg, at, m) / phi_hi;
  };
  auto volume_row = [&](int k) {
    return bound::data_volume(cfg, at, k) / cap_bits(cfg, k) - 1.0;
  };

  std::string msg;
  bool ok = true;

  {  // time-share block
    auto b = cvx::build_time_share_block(cfg, at, cvx::Objective::min_worst_error);
    opt::VecX x = expansion_vector(b, cfg, at);
    std::map<std::string, std::vector<double>> want;
    for (int n = 1; n <= N; ++n) {
      bool live = false;
      double sum = 0;
      for (int k = 0; k < K; ++k)
        if (b.beta_var[size_t(k)][size_t(n - 1)] >= 0) {
          live = true;
          sum += at.beta[size_t(k)][size_t(n)];
        }
      if (live) want["share_sum"].push_back(sum - 1.0);
    }
    for (int k = 0; k < K; ++k) {
      bool live = false;
      for (int n = 1; n <= N; ++n) live = live || b.beta_var[size_t(k)][size_t(n - 1)] >= 0;
      if (live) want["data_cap"].push_back(volume_row(k));
    }
    for (int m = 0; m < M; ++m) want["objective_epigraph"].push_back(psi_scaled(m));
    ok = ok && match_lists("time_share", surrogate_values(b, x), want, &msg);
  }

  if (ok) {  // trajectory block
    auto b = cvx::build_trajectory_block(cfg, at, cvx::Objective::min_worst_error);
    opt::VecX x = expansion_vector(b, cfg, at);
    std::map<std::string, std::vector<double>> want;
    if (N >= 2)
      for (int n = 1; n <= N; ++n)
        want["mobility"].push_back(
            (norm_sq(at.traj[size_t(n)] - at.traj[size_t(n - 1)]) - vd * vd) / (vd * vd));
    for (int n = 1; n <= N; ++n)
      if (b.u_var[size_t(n - 1)] >= 0) want["view_cap"].push_back(0.0);
    for (int k = 0; k < K; ++k)
      for (int n = 1; n <= N; ++n)
        if (b.e_var[size_t(k)][size_t(n - 1)] >= 0) want["range_cap"].push_back(0.0);
    for (int n = 1; n <= N; ++n) {
      double p = at.power[size_t(n - 1)];
      if (slot_active[size_t(n - 1)]) {
        for (int k = 0; k < K; ++k)
          if (active[size_t(k)][size_t(n - 1)]) {
            double s = bound::radar_sinr_lb(cfg, at.traj[size_t(n)], p, k, true);
            want["echo_floor"].push_back((gth - s) / gth);
          }
      } else if (n <= N - 1) {
        double s = bound::radar_sinr_lb(cfg, at.traj[size_t(n)], p, 0, false);
        want["echo_floor"].push_back((gth - s) / gth);
      }
    }
    for (int k = 0; k < K; ++k)
      if (any_active(k)) want["data_cap"].push_back(volume_row(k));
    for (int m = 0; m < M; ++m) want["objective_epigraph"].push_back(psi_scaled(m));
    ok = match_lists("trajectory", surrogate_values(b, x), want, &msg);
  }

  if (ok) {  // power block
    auto b = cvx::build_power_block(cfg, at, cvx::Objective::min_worst_error);
    opt::VecX x = expansion_vector(b, cfg, at);
    std::map<std::string, std::vector<double>> want;
    for (int n = 1; n <= N; ++n) {
      double p = at.power[size_t(n - 1)];
      if (slot_active[size_t(n - 1)]) {
        for (int k = 0; k < K; ++k)
          if (active[size_t(k)][size_t(n - 1)]) {
            double kap = dc.lambda_k[size_t(k)] /
                         bound::dist_sq(at.traj[size_t(n)], cfg.devices[size_t(k)], H);
            double s = bound::radar_sinr_lb(cfg, at.traj[size_t(n)], p, k, true);
            want["echo_floor"].push_back((gth - s) * (dc.lambda_si * p + kap + n0) /
                                         (gth * (kap + n0)));
          }
      } else {
        double s = bound::radar_sinr_lb(cfg, at.traj[size_t(n)], p, 0, false);
        want["echo_floor"].push_back((gth - s) * (dc.lambda_si * p + n0) / (gth * n0));
      }
    }
    for (int k = 0; k < K; ++k)
      if (any_active(k)) want["data_cap"].push_back(volume_row(k));
    for (int m = 0; m < M; ++m) want["objective_epigraph"].push_back(psi_scaled(m));
    ok = match_lists("power", surrogate_values(b, x), want, &msg);
  }

  verdict(5, "expansion_tightness", ok, ok ? "all families match at 1e-9" : msg);
}

// ---------------------------------------------------------------------------
// criterion 6: interior-point optima vs exhaustive grids on tiny instances

ScenarioConfig tiny_cfg(const ScenarioConfig& base, int slots) {
  ScenarioConfig c = base;
  c.num_devices = 2;
  c.num_models = 2;
  c.num_slots = slots;
  c.period_s = slots * base.slot_seconds();
  c.devices = {base.devices[0], base.devices[2]};
  c.device_power_w = {base.device_power_w[0], base.device_power_w[2]};
  c.groups = {{0}, {1}};
  c.group_of = {0, 1};
  c.device_samples = {base.device_samples[0], base.device_samples[2]};
  validate(c);
  return c;
}

// locate the linear row that caps `var` so the grid can pin it there
int cap_row_for(const opt::ConvexSubproblem& p, int var, const char* label) {
  for (size_t i = 0; i < p.linear.size(); ++i) {
    if (p.linear[i].label != label) continue;
    for (const auto& t : p.linear[i].terms)
      if (t.var == var && t.coef > 0) return int(i);
  }
  return -1;
}

bool grid_vs_solver(const opt::ConvexSubproblem& p, const oracle::GridSpec& spec,
                    double slack_hi, std::string* msg) {
  opt::SolverOutcome sol = opt::solve(p);
  if (sol.status != opt::SolveStatus::ok) {
    *msg = fmt("solver status %s", opt::to_string(sol.status));
    return false;
  }
  oracle::GridResult gr = oracle::grid_minimize(p, spec);
  if (!gr.found) {
    *msg = "grid found no feasible point";
    return false;
  }
  // the barrier method stops with the objective up to its duality gap above
  // the optimum, so a feasible lattice point may undercut it by that much
  double under = std::max(2.0 * sol.gap, 1e-9);
  if (gr.objective < sol.objective - under) {
    *msg = fmt("grid beats solver: %.12g < %.12g", gr.objective, sol.objective);
    return false;
  }
  if (gr.objective > sol.objective + slack_hi) {
    *msg = fmt("solver not matched by grid: solver %.12g grid %.12g", sol.objective,
               gr.objective);
    return false;
  }
  *msg = fmt("solver %.9g grid %.9g (%ld pts)", sol.objective, gr.objective, gr.points);
  return true;
}

void c6_oracle(const ScenarioConfig& cfg) {
  bool ok = true;
  std::string detail;

  {  // time-share block, one slot, two devices
    ScenarioConfig c = tiny_cfg(cfg, 1);
    bound::Decision at = drv::initialize(c).decision;
    auto b = cvx::build_time_share_block(c, at, cvx::Objective::min_worst_error);
    oracle::GridSpec spec;
    for (int k = 0; k < c.num_devices; ++k) {
      int v = b.beta_var[size_t(k)][0];
      if (v >= 0) spec.axes.push_back({v, 0.0, 1.0, 1e-3});
    }
    std::string msg;
    bool sub = spec.axes.size() == 2 && grid_vs_solver(b.problem, spec, 1e-3, &msg);
    ok = ok && sub;
    detail += "shares: " + msg + "; ";
  }

  ScenarioConfig c2 = tiny_cfg(cfg, 2);
  bound::Decision at2 = drv::initialize(c2).decision;

  {  // trajectory block, one free position on a 0.5 m lattice
    auto b = cvx::build_trajectory_block(c2, at2, cvx::Objective::min_worst_error);
    oracle::GridSpec spec;
    const auto& p = b.problem;
    std::string msg;
    bool sub = true;
    for (int v : {b.qx_var[1], b.qy_var[1]}) {
      if (v < 0) {
        sub = false;
        break;
      }
      spec.axes.push_back({v, p.lo[v], p.hi[v], 0.5});
    }
    for (int k = 0; k < c2.num_devices && sub; ++k)
      for (int n = 0; n < c2.num_slots; ++n) {
        int v = b.e_var[size_t(k)][size_t(n)];
        if (v < 0) continue;
        int row = cap_row_for(p, v, "range_cap");
        if (row < 0) sub = false;
        spec.closures.push_back({v, row});
      }
    for (int n = 0; n < c2.num_slots && sub; ++n) {
      int v = b.u_var[size_t(n)];
      if (v < 0) continue;
      int row = cap_row_for(p, v, "view_cap");
      if (row < 0) sub = false;
      spec.closures.push_back({v, row});
    }
    sub = sub && grid_vs_solver(p, spec, 1e-4, &msg);
    ok = ok && sub;
    detail += "trajectory: " + msg + "; ";
  }

  {  // power block on a 1e-4 W lattice
    auto b = cvx::build_power_block(c2, at2, cvx::Objective::min_worst_error);
    oracle::GridSpec spec;
    for (int n = 0; n < c2.num_slots; ++n) {
      int v = b.p_var[size_t(n)];
      spec.axes.push_back({v, 0.0, cfg.uav_power_cap_w, 1e-4});
    }
    std::string msg;
    bool sub = grid_vs_solver(b.problem, spec, 1e-5, &msg);
    ok = ok && sub;
    detail += "power: " + msg;
  }

  verdict(6, "oracle_equivalence", ok, detail);
}

// ---------------------------------------------------------------------------
// criterion 7: analytic gradients vs central differences, per family

void c7_gradients(const ScenarioConfig& cfg) {
  const bound::Decision at = drv::initialize(cfg).decision;
  struct Fam {
    const opt::ConvexSubproblem* p;
    std::vector<const opt::SmoothFn*> fns;
  };
  std::map<std::string, Fam> fams;

  auto bt = cvx::build_time_share_block(cfg, at, cvx::Objective::min_worst_error);
  auto bq = cvx::build_trajectory_block(cfg, at, cvx::Objective::min_worst_error);
  auto bp = cvx::build_power_block(cfg, at, cvx::Objective::min_worst_error);
  for (const auto* b :
       {&bt, &bq, &bp}) {
    const char* tag = b == &bt ? "shares" : (b == &bq ? "trajectory" : "power");
    for (const auto& f : b->problem.smooth) {
      Fam& fam = fams[std::string(tag) + "/" + f->label];
      fam.p = &b->problem;
      fam.fns.push_back(f.get());
    }
  }

  bool ok = true;
  std::string detail;
  int seed = 5200;
  for (auto& [name, fam] : fams) {
    std::mt19937 rng(seed++);
    const opt::ConvexSubproblem& p = *fam.p;
    int valid = 0, attempts = 0;
    double worst = 0;
    while (valid < 10 && attempts < 500) {
      const opt::SmoothFn* f = fam.fns[size_t(attempts) % fam.fns.size()];
      ++attempts;
      opt::VecX x = p.x0;
      const auto& sup = f->support();
      for (int v : sup) {
        double span = std::isfinite(p.hi[v] - p.lo[v]) ? p.hi[v] - p.lo[v] : p.var_scale[v];
        double cand = x[v] + urand(rng, -1.0, 1.0) * 0.004 * span;
        if (std::isfinite(p.lo[v])) cand = std::max(cand, p.lo[v] + 1e-9 * span);
        if (std::isfinite(p.hi[v])) cand = std::min(cand, p.hi[v] - 1e-9 * span);
        x[v] = cand;
      }
      if (!std::isfinite(f->value(x))) continue;
      std::vector<double> an(sup.size());
      f->value_grad(x, an.data());
      std::vector<double> xs(sup.size());
      for (size_t i = 0; i < sup.size(); ++i) xs[i] = x[sup[i]];
      auto wrap = [&](const std::vector<double>& s) {
        opt::VecX xx = x;
        for (size_t i = 0; i < sup.size(); ++i) xx[sup[i]] = s[i];
        return f->value(xx);
      };
      std::vector<double> fd = oracle::finite_diff_grad(wrap, xs, 1e-5);
      bool finite = true;
      for (double v : fd) finite = finite && std::isfinite(v);
      if (!finite) continue;
      ++valid;
      for (size_t i = 0; i < sup.size(); ++i) {
        double den = std::max({1e-6, std::fabs(an[i]), std::fabs(fd[i])});
        worst = std::max(worst, std::fabs(an[i] - fd[i]) / den);
      }
    }
    if (valid < 10 || worst > 1e-5) {
      ok = false;
      detail += fmt("%s: %d pts, worst rel %.3g; ", name.c_str(), valid, worst);
    }
  }
  verdict(7, "gradient_checks", ok,
          ok ? fmt("%zu families x 10 points within 1e-5", fams.size()) : detail);
}

// ---------------------------------------------------------------------------
// criterion 8: every accepted iterate stayed feasible; rectified end state
// also satisfies the physical-model constraints

void c8_feasibility() {
  bool ok = true;
  std::string detail;
  long iterates = 0;
  for (const auto& rc : g_runs) {
    for (const auto& it : rc.rep.iterations) {
      ++iterates;
      if (it.max_violation > 1.0001e-9) {
        ok = false;
        detail += fmt("%s iter %d violation %.3g; ", rc.name.c_str(), it.index,
                      it.max_violation);
      }
    }
    bound::AuditReport fin = bound::audit(rc.cfg, rc.rep.final_decision, false);
    bound::AuditReport rect = bound::audit(rc.cfg, rc.rep.rectified_decision, true);
    if (!fin.feasible || !rect.feasible || !rc.rep.audit_bound.feasible ||
        !rc.rep.audit_exact.feasible) {
      ok = false;
      detail += fmt("%s: final=%d rectified_exact=%d; ", rc.name.c_str(), int(fin.feasible),
                    int(rect.feasible));
    }
  }
  verdict(8, "iterate_feasibility", ok,
          ok ? fmt("%ld iterates over %zu runs, all audits pass", iterates, g_runs.size())
             : detail);
}

// ---------------------------------------------------------------------------
// criterion 9: announced subproblem sizes

void c9_sizes(const ScenarioConfig& cfg) {
  const bound::Decision at = drv::initialize(cfg).decision;
  long K = cfg.num_devices, M = cfg.num_models, N = cfg.num_slots;
  long want_a = 3 * K * N + M + N + K + 1;
  long want_b = 3 * K * N + M + 3 * N + K + 1;
  long want_c = K * N + M + 2 * N + K + 1;
  long got_a =
      cvx::build_time_share_block(cfg, at, cvx::Objective::min_worst_error).problem.acct.nominal_size();
  long got_b =
      cvx::build_trajectory_block(cfg, at, cvx::Objective::min_worst_error).problem.acct.nominal_size();
  long got_c =
      cvx::build_power_block(cfg, at, cvx::Objective::min_worst_error).problem.acct.nominal_size();
  bool ok = got_a == want_a && got_b == want_b && got_c == want_c && want_a == 648 &&
            want_b == 728 && want_c == 288;
  verdict(9, "size_accounting", ok,
          fmt("shares %ld/%ld trajectory %ld/%ld power %ld/%ld", got_a, want_a, got_b,
              want_b, got_c, want_c));
}

// ---------------------------------------------------------------------------
// criterion 10: repeated CLI runs emit byte-identical tables

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void c10_determinism(const std::string& scenario_path, const std::string& cli) {
  namespace fs = std::filesystem;
  fs::path base = fs::current_path() / "acceptance_cli";
  std::error_code ec;
  fs::remove_all(base, ec);
  fs::create_directories(base / "a");
  fs::create_directories(base / "b");

  auto invoke = [&](const fs::path& out) {
    std::string cmd = "\"" + cli + "\" run --config \"" + scenario_path +
                      "\" --algo proposed --out \"" + out.string() +
                      "\" --max-iters 3 > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
  };
  int ra = invoke(base / "a");
  int rb = invoke(base / "b");
  if (ra != 0 || rb != 0) {
    verdict(10, "determinism", false, fmt("CLI exit codes %d / %d", ra, rb));
    return;
  }
  bool ok = true;
  std::string detail;
  for (const char* f : {"trajectory.csv", "allocation.csv", "power.csv", "iterations.csv"}) {
    std::string a = slurp(base / "a" / f), b = slurp(base / "b" / f);
    if (a.empty() || a != b) {
      ok = false;
      detail += fmt("%s differs (%zu vs %zu bytes); ", f, a.size(), b.size());
    }
  }
  verdict(10, "determinism", ok, ok ? "4 tables byte-identical across runs" : detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <scenario.json> <cli-binary>\n", argv[0]);
    return 99;
  }
  ScenarioConfig cfg = load_scenario(argv[1]);

  c1_descent(cfg);
  c2_ordering(cfg);
  c3_trends(cfg);
  c4_bounds(cfg);
  c5_tightness(cfg);
  c6_oracle(cfg);
  c7_gradients(cfg);
  c8_feasibility();
  c9_sizes(cfg);
  c10_determinism(argv[1], argv[2]);

  std::printf("%d of 10 criteria failed (%.1fs total)\n", g_failures, wall_s());
  return g_failures;
}
