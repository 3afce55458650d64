#include "uavisac/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>

namespace uavisac::drv {

const char* to_string(Algo a) {
  switch (a) {
    case Algo::proposed: return "proposed";
    case Algo::tmax: return "tmax";
    case Algo::constp: return "constp";
  }
  return "?";
}

Algo algo_from_string(const std::string& s) {
  if (s == "proposed") return Algo::proposed;
  if (s == "tmax") return Algo::tmax;
  if (s == "constp") return Algo::constp;
  throw std::invalid_argument("unknown algorithm: " + s);
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double device_cap_bits(const ScenarioConfig& cfg, int k) {
  return cfg.device_samples[size_t(k)] * cfg.sample_bits[size_t(cfg.model_of(k))];
}

double min_volume(const ScenarioConfig& cfg, const bound::Decision& d) {
  double worst = opt::kInf;
  for (int k = 0; k < cfg.num_devices; ++k)
    worst = std::min(worst, bound::data_volume(cfg, d, k, false));
  return worst;
}

double decision_objective(const ScenarioConfig& cfg, const bound::Decision& d, Algo algo) {
  return algo == Algo::tmax ? min_volume(cfg, d) : bound::eta(cfg, d);
}

} // namespace

InitialPoint initialize(const ScenarioConfig& cfg) {
  const DerivedConstants dc = derive_constants(cfg);
  const double gth = cfg.sensing_threshold;
  const double pcap = cfg.uav_power_cap_w;
  const double d2t = bound::dist_sq(cfg.depot, cfg.target, cfg.altitude_m);

  // Echo SINR at the depot is (lambda_t / d2t^2) p over interference + noise,
  // increasing in p, so the floor gives a closed-form minimum power per case.
  const double den = dc.lambda_t / (d2t * d2t) - gth * dc.lambda_si;
  if (den <= 0)
    throw InfeasibleScenario(
        "echo floor unreachable from the depot: loopback dominates at any power");
  const double p_zero = gth * dc.noise_w / den;
  if (p_zero > pcap)
    throw InfeasibleScenario(
        "echo floor needs more than the power cap even with every uplink silent");

  std::vector<char> admissible(size_t(cfg.num_devices), 0);
  double adm = p_zero;
  bool any = false;
  for (int k = 0; k < cfg.num_devices; ++k) {
    double d2k = bound::dist_sq(cfg.depot, cfg.devices[size_t(k)], cfg.altitude_m);
    double need = gth * (dc.lambda_k[size_t(k)] / d2k + dc.noise_w) / den;
    if (need <= pcap) {
      admissible[size_t(k)] = 1;
      adm = std::max(adm, need);
      any = true;
    }
  }
  if (!any)
    throw InfeasibleScenario(
        "no device clears the echo floor while transmitting, even at the power cap");

  InitialPoint ip;
  ip.admission_power = adm;
  ip.silent_power = p_zero;
  ip.decision = bound::zero_decision(cfg);
  bound::Decision& d = ip.decision;

  const double p0 = std::min(pcap, 1.02 * adm);
  for (double& p : d.power) p = p0;

  // Greedy share pass: hand each slot to the model currently worst off,
  // served by its fastest admissible device that still has data left.
  const int K = cfg.num_devices, M = cfg.num_models, N = cfg.num_slots;
  const double delta = cfg.slot_seconds();
  std::vector<double> rate(size_t(K), 0), collected(size_t(K), 0);
  for (int k = 0; k < K; ++k)
    rate[size_t(k)] = bound::rate_lb(cfg, cfg.depot, p0, k);

  for (int n = 1; n <= N; ++n) {
    std::vector<int> order(static_cast<size_t>(M));
    for (int m = 0; m < M; ++m) order[size_t(m)] = m;
    auto model_err = [&](int m) {
      double samples = cfg.historical_samples[size_t(m)];
      for (int k : cfg.groups[size_t(m)])
        samples += collected[size_t(k)] / cfg.sample_bits[size_t(m)];
      if (samples <= 0) return cfg.err_exp[size_t(m)] > 0 ? opt::kInf : cfg.err_coeff[size_t(m)];
      return cfg.err_coeff[size_t(m)] * std::pow(samples, -cfg.err_exp[size_t(m)]);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return model_err(a) > model_err(b); });
    int chosen = -1;
    for (int m : order) {
      for (int k : cfg.groups[size_t(m)]) {
        if (!admissible[size_t(k)]) continue;
        if (collected[size_t(k)] >= 0.9 * device_cap_bits(cfg, k)) continue;
        if (chosen < 0 || rate[size_t(k)] > rate[size_t(chosen)]) chosen = k;
      }
      if (chosen >= 0) break;
    }
    if (chosen < 0) break;
    d.beta[size_t(chosen)][size_t(n)] = 0.9;
    collected[size_t(chosen)] += delta * 0.9 * rate[size_t(chosen)];
  }
  for (int k = 0; k < K; ++k) {
    double lim = 0.9 * device_cap_bits(cfg, k);
    if (collected[size_t(k)] > lim && collected[size_t(k)] > 0) {
      double s = lim / collected[size_t(k)];
      for (int n = 1; n <= N; ++n) d.beta[size_t(k)][size_t(n)] *= s;
    }
  }
  d.phi = bound::eta(cfg, d);
  return ip;
}

bound::Decision rectify(const ScenarioConfig& cfg, const bound::Decision& d,
                        std::vector<double>* scales) {
  bound::Decision out = d;
  std::vector<double> sc(size_t(cfg.num_devices), 1.0);
  for (int k = 0; k < cfg.num_devices; ++k) {
    double cap = device_cap_bits(cfg, k);
    double vol = bound::data_volume(cfg, out, k, true);
    if (vol > cap && vol > 0) {
      double s = cap / vol * (1 - 1e-12);
      for (int n = 1; n <= cfg.num_slots; ++n) out.beta[size_t(k)][size_t(n)] *= s;
      sc[size_t(k)] = s;
    }
  }
  out.phi = bound::eta(cfg, out);
  if (scales) *scales = sc;
  return out;
}

RunReport run(const ScenarioConfig& cfg, Algo algo, const RunSettings& settings,
              const bound::Decision* init) {
  const auto t_start = Clock::now();
  RunReport rep;
  rep.algo = algo;
  rep.gamma_th = cfg.sensing_threshold;
  rep.num_slots = cfg.num_slots;
  const double tol = settings.tol > 0 ? settings.tol : cfg.bcd_tol;

  bound::Decision d;
  if (init) {
    d = *init;
    auto check = bound::audit(cfg, d, false);
    if (!check.feasible)
      throw InfeasibleScenario("supplied starting decision fails the feasibility audit");
  } else {
    d = initialize(cfg).decision;
  }
  if (algo == Algo::constp) {
    // Raising power only helps the echo floor, so the start stays feasible.
    for (double& p : d.power) p = cfg.uav_power_cap_w;
    d.phi = bound::eta(cfg, d);
  }
  rep.initial_decision = d;
  rep.eta_initial = bound::eta(cfg, d);
  double obj = decision_objective(cfg, d, algo);
  rep.objective_trace.push_back(obj);
  rep.eta_trace.push_back(rep.eta_initial);

  const cvx::Objective kind = algo == Algo::tmax ? cvx::Objective::max_min_volume
                                                 : cvx::Objective::min_worst_error;

  using Builder = cvx::BuiltSubproblem (*)(const ScenarioConfig&, const bound::Decision&,
                                           cvx::Objective, double);
  auto run_block = [&](const char* name, Builder build) {
    BlockOutcome out;
    out.block = name;
    const auto t0 = Clock::now();
    const double before = decision_objective(cfg, d, algo);
    for (int attempt = 0; attempt < 2 && !out.accepted; ++attempt) {
      out.retried = attempt > 0;
      out.failed = false;
      cvx::BuiltSubproblem b = build(cfg, d, kind, attempt == 0 ? 1.0 : 0.5);
      opt::SolverOutcome so = opt::solve(b.problem, settings.solver);
      out.status = so.status;
      out.newton_iters += so.newton_iters;
      if (so.status != opt::SolveStatus::ok &&
          so.status != opt::SolveStatus::max_iterations) {
        out.failed = true;
        continue;
      }
      bound::Decision cand = d;
      cvx::apply_solution(b, so.x, cand);
      cand.phi = bound::eta(cfg, cand);
      if (!bound::audit(cfg, cand, false).feasible) {
        out.failed = true;
        continue;
      }
      double after = decision_objective(cfg, cand, algo);
      double slack = 1e-10 * std::max(1.0, std::fabs(before));
      bool keeps_direction = algo == Algo::tmax ? after >= before - slack
                                                : after <= before + slack;
      if (!keeps_direction) continue;  // stall: keep the previous block value
      d = std::move(cand);
      out.accepted = true;
    }
    out.objective_after = decision_objective(cfg, d, algo);
    out.wall_ms = ms_since(t0);
    return out;
  };

  rep.termination = "max_iterations";
  for (int it = 1; it <= settings.max_iters; ++it) {
    IterationRecord rec;
    rec.index = it;
    rec.blocks.push_back(run_block("time_shares", &cvx::build_time_share_block));
    rec.blocks.push_back(run_block("trajectory", &cvx::build_trajectory_block));
    if (algo != Algo::constp)
      rec.blocks.push_back(run_block("power", &cvx::build_power_block));
    bool any_failed = false;
    for (const auto& b : rec.blocks) any_failed = any_failed || b.failed;
    double next = decision_objective(cfg, d, algo);
    rec.objective = next;
    rec.eta = bound::eta(cfg, d);
    rec.max_violation = bound::audit(cfg, d, false).max_violation();
    rep.objective_trace.push_back(next);
    rep.eta_trace.push_back(rec.eta);
    rep.iterations.push_back(std::move(rec));
    double delta = std::fabs(next - obj);
    bool done = algo == Algo::tmax ? delta < tol * std::max(1.0, std::fabs(obj))
                                   : delta < tol;
    obj = next;
    if (done) {
      rep.termination = "tolerance";
      break;
    }
    if (any_failed) {
      // keep the best feasible iterate rather than pushing a broken block
      rep.termination = "block_failure";
      break;
    }
  }

  rep.final_decision = d;
  rep.eta_final = bound::eta(cfg, d);
  rep.min_volume_final = min_volume(cfg, d);
  rep.audit_bound = bound::audit(cfg, d, false);
  rep.rectified_decision = rectify(cfg, d, &rep.rectify_scale);
  rep.eta_rectified_exact = bound::eta(cfg, rep.rectified_decision, true);
  rep.audit_exact = bound::audit(cfg, rep.rectified_decision, true);
  rep.wall_ms_total = ms_since(t_start);
  return rep;
}

} // namespace uavisac::drv
