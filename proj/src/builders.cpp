#include "uavisac/builders.hpp"

#include "uavisac/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace uavisac::cvx {

namespace {

using bound::Decision;
using opt::ConvexSubproblem;
using opt::LinearRow;
using opt::SmoothFn;
using opt::VecX;

constexpr double kMaskSlack = 1.0 - 1e-12;
constexpr double kShareSnap = 1e-10;

struct Common {
  const ScenarioConfig& cfg;
  DerivedConstants dc;
  int K, N, M;
  double delta, n0, gth, vd, bits_scale;
  std::vector<double> cap;  // per-device data ceiling in bits

  explicit Common(const ScenarioConfig& c) : cfg(c), dc(derive_constants(c)) {
    K = c.num_devices;
    N = c.num_slots;
    M = c.num_models;
    delta = c.slot_seconds();
    n0 = c.noise_w;
    gth = c.sensing_threshold;
    vd = c.v_max_mps * delta;
    bits_scale = c.bandwidth_hz / std::log(2.0);
    cap.resize(size_t(K));
    for (int k = 0; k < K; ++k)
      cap[size_t(k)] = c.device_samples[size_t(k)] * c.sample_bits[size_t(c.model_of(k))];
  }
};

double planar_sq(Vec2 a, Vec2 b) { return norm_sq(a - b); }

// trust < 1 pulls finite box sides toward the expansion center
void shrink_box(ConvexSubproblem& P, const VecX& center, double trust, int skip_var) {
  if (trust >= 1.0) return;
  for (int i = 0; i < P.num_vars; ++i) {
    if (i == skip_var) continue;
    if (P.lo[i] <= -opt::kInf || P.hi[i] >= opt::kInf) continue;
    double half = 0.5 * (P.hi[i] - P.lo[i]) * trust;
    double c = std::clamp(center[i], P.lo[i], P.hi[i]);
    P.lo[i] = std::max(P.lo[i], c - half);
    P.hi[i] = std::min(P.hi[i], c + half);
  }
}

double goal_start(const Common& cm, const Decision& at, Objective obj,
                  double phi_hi, double tau_lo, double tau_hi) {
  if (obj == Objective::min_worst_error) {
    double eta0 = bound::eta(cm.cfg, at);
    if (!std::isfinite(eta0)) return 0.5 * phi_hi;
    return std::min(phi_hi * (1 - 1e-9), eta0 * (1 + 1e-3) + 1e-9);
  }
  double min_a = opt::kInf;
  for (int k = 0; k < cm.K; ++k)
    min_a = std::min(min_a, bound::data_volume(cm.cfg, at, k));
  if (!(min_a > 0)) return 0.5 * tau_lo;
  return std::min(0.95 * min_a, tau_hi * (1 - 1e-9));
}

} // namespace

SurrogateCoefficients surrogate_coefficients(const ScenarioConfig& cfg,
                                             const Decision& at) {
  Common cm(cfg);
  SurrogateCoefficients sc;
  sc.varphi.assign(size_t(cm.K), std::vector<double>(size_t(cm.N), 0.0));
  sc.rho = sc.mu = sc.nu = sc.kappa = sc.varphi;
  sc.varphi_silent.assign(size_t(cm.N), 0.0);
  sc.zeta.assign(size_t(cm.N), 0.0);
  const double sl_t = std::sqrt(cm.dc.lambda_t);
  const double sl_si = std::sqrt(cm.dc.lambda_si);
  for (int n = 1; n <= cm.N; ++n) {
    Vec2 q = at.traj[size_t(n)];
    double p = at.power[size_t(n - 1)];
    double d2t = bound::dist_sq(q, cfg.target, cfg.altitude_m);
    double st = sl_t / d2t + sl_si;
    sc.zeta[size_t(n - 1)] = st * st;
    double echo = cm.dc.lambda_t * std::max(p, 0.0) / (d2t * d2t);
    double psi = sc.zeta[size_t(n - 1)] * p + cm.n0;
    sc.varphi_silent[size_t(n - 1)] =
        ratio_lb_multiplier(echo, cm.dc.lambda_si * p + cm.n0);
    for (int k = 0; k < cm.K; ++k) {
      double d2k = bound::dist_sq(q, cfg.devices[size_t(k)], cfg.altitude_m);
      double f = cm.dc.lambda_k[size_t(k)] / d2k;
      sc.kappa[size_t(k)][size_t(n - 1)] = f;
      sc.varphi[size_t(k)][size_t(n - 1)] =
          ratio_lb_multiplier(echo, f + cm.dc.lambda_si * p + cm.n0);
      sc.rho[size_t(k)][size_t(n - 1)] = ratio_lb_multiplier(f, psi);
      sc.mu[size_t(k)][size_t(n - 1)] = log_ratio_ub_theta(f, psi);
      sc.nu[size_t(k)][size_t(n - 1)] = log_ratio_ub_rho(f, psi);
    }
  }
  return sc;
}

std::vector<std::vector<char>> schedule_mask(const ScenarioConfig& cfg,
                                             const Decision& at) {
  Common cm(cfg);
  std::vector<std::vector<char>> mask(size_t(cm.K), std::vector<char>(size_t(cm.N), 0));
  for (int n = 1; n <= cm.N; ++n)
    for (int k = 0; k < cm.K; ++k) {
      double sinr = bound::radar_sinr_lb(cfg, at.traj[size_t(n)],
                                         at.power[size_t(n - 1)], k, true);
      mask[size_t(k)][size_t(n - 1)] = sinr >= cm.gth * kMaskSlack ? 1 : 0;
    }
  return mask;
}

bool silent_echo_ok(const ScenarioConfig& cfg, const Decision& at, int* bad_slot) {
  Common cm(cfg);
  for (int n = 1; n <= cm.N; ++n) {
    double sinr = bound::radar_sinr_lb(cfg, at.traj[size_t(n)],
                                       at.power[size_t(n - 1)], 0, false);
    if (sinr < cm.gth * kMaskSlack) {
      if (bad_slot) *bad_slot = n;
      return false;
    }
  }
  return true;
}

double phi_upper_bound(const ScenarioConfig& cfg, const Decision& at) {
  double worst = 0;
  bool finite = true;
  for (int m = 0; m < cfg.num_models; ++m) {
    double a = cfg.err_coeff[size_t(m)], b = cfg.err_exp[size_t(m)];
    double hist = cfg.historical_samples[size_t(m)];
    if (b == 0) {
      worst = std::max(worst, a);
    } else if (hist > 0) {
      worst = std::max(worst, a * std::pow(hist, -b));
    } else {
      finite = false;
    }
  }
  if (finite) return 1.01 * worst;
  double eta0 = bound::eta(cfg, at);
  return std::isfinite(eta0) ? std::max(1.0, 10 * eta0) : 1e6;
}

BuiltSubproblem build_time_share_block(const ScenarioConfig& cfg, const Decision& at,
                                       Objective obj, double trust) {
  Common cm(cfg);
  BuiltSubproblem B;
  B.objective = obj;
  ConvexSubproblem& P = B.problem;
  P.name = "time_share_block";

  auto mask = schedule_mask(cfg, at);
  std::vector<std::vector<double>> R(size_t(cm.K), std::vector<double>(size_t(cm.N), 0.0));
  for (int k = 0; k < cm.K; ++k)
    for (int n = 1; n <= cm.N; ++n)
      R[size_t(k)][size_t(n - 1)] =
          bound::rate_lb(cfg, at.traj[size_t(n)], at.power[size_t(n - 1)], k);

  B.beta_var.assign(size_t(cm.K), std::vector<int>(size_t(cm.N), -1));
  int nv = 0;
  long masked = 0;
  for (int k = 0; k < cm.K; ++k)
    for (int n = 1; n <= cm.N; ++n) {
      if (mask[size_t(k)][size_t(n - 1)] && cm.cap[size_t(k)] > 0)
        B.beta_var[size_t(k)][size_t(n - 1)] = nv++;
      else
        ++masked;
    }
  const int goal = nv++;
  const double phi_hi = phi_upper_bound(cfg, at);
  const double tau_hi_cap = *std::min_element(cm.cap.begin(), cm.cap.end());
  const double tau_scale = std::max(*std::max_element(cm.cap.begin(), cm.cap.end()), 1.0);
  const double tau_lo = -0.01 * tau_scale, tau_hi = 1.001 * tau_hi_cap;

  P.num_vars = nv;
  P.lo = VecX::Zero(nv);
  P.hi = VecX::Ones(nv);
  P.x0 = VecX::Zero(nv);
  P.var_scale = VecX::Ones(nv);
  P.cost = VecX::Zero(nv);
  P.epigraph_var = goal;
  for (int k = 0; k < cm.K; ++k)
    for (int n = 1; n <= cm.N; ++n) {
      int v = B.beta_var[size_t(k)][size_t(n - 1)];
      if (v >= 0) P.x0[v] = std::clamp(at.beta[size_t(k)][size_t(n)], 0.0, 1.0);
    }
  if (obj == Objective::min_worst_error) {
    B.phi_var = goal;
    P.lo[goal] = 0;
    P.hi[goal] = phi_hi;
    P.var_scale[goal] = std::max(phi_hi, 1e-6);
    P.cost[goal] = 1.0;
  } else {
    B.tau_var = goal;
    P.lo[goal] = tau_lo;
    P.hi[goal] = tau_hi;
    P.var_scale[goal] = tau_scale;
    P.cost[goal] = -1.0 / tau_scale;
  }
  P.x0[goal] = goal_start(cm, at, obj, phi_hi, tau_lo, tau_hi);

  for (int n = 1; n <= cm.N; ++n) {
    LinearRow row;
    row.label = "share_sum";
    for (int k = 0; k < cm.K; ++k) {
      int v = B.beta_var[size_t(k)][size_t(n - 1)];
      if (v >= 0) row.terms.push_back({v, 1.0});
    }
    row.rhs = 1.0;
    if (!row.terms.empty()) P.linear.push_back(std::move(row));
  }
  for (int k = 0; k < cm.K; ++k) {
    LinearRow row;
    row.label = "data_cap";
    double ck = cm.cap[size_t(k)];
    for (int n = 1; n <= cm.N; ++n) {
      int v = B.beta_var[size_t(k)][size_t(n - 1)];
      if (v >= 0) row.terms.push_back({v, cm.delta * R[size_t(k)][size_t(n - 1)] / ck});
    }
    row.rhs = 1.0;
    if (!row.terms.empty()) P.linear.push_back(std::move(row));
  }

  if (obj == Objective::min_worst_error) {
    for (int m = 0; m < cm.M; ++m) {
      auto f = std::make_unique<SmoothFn>();
      f->label = "objective_epigraph";
      f->powerlaw = true;
      f->pl_a = cfg.err_coeff[size_t(m)];
      f->pl_b = cfg.err_exp[size_t(m)];
      f->inner_const = cfg.historical_samples[size_t(m)];
      for (int k : cfg.groups[size_t(m)])
        for (int n = 1; n <= cm.N; ++n) {
          int v = B.beta_var[size_t(k)][size_t(n - 1)];
          if (v >= 0)
            f->inner_lin.push_back(
                {v, cm.delta * R[size_t(k)][size_t(n - 1)] / cfg.sample_bits[size_t(m)]});
        }
      f->outer_lin.push_back({goal, -1.0});
      f->out_scale = 1.0 / std::max(phi_hi, 1e-12);
      f->finalize();
      P.smooth.push_back(std::move(f));
    }
  } else {
    for (int k = 0; k < cm.K; ++k) {
      LinearRow row;
      row.label = "floor_cap";
      double ck = cm.cap[size_t(k)];
      row.terms.push_back({goal, 1.0 / ck});
      for (int n = 1; n <= cm.N; ++n) {
        int v = B.beta_var[size_t(k)][size_t(n - 1)];
        if (v >= 0) row.terms.push_back({v, -cm.delta * R[size_t(k)][size_t(n - 1)] / ck});
      }
      row.rhs = 0.0;
      P.linear.push_back(std::move(row));
    }
  }

  P.acct.nominal_vars = long(cm.K) * cm.N + 1;
  P.acct.eliminated_vars = masked;
  P.acct.counted_constraints = 2L * cm.K * cm.N + cm.N +
                               (obj == Objective::min_worst_error ? cm.M : cm.K) + cm.K;
  P.acct.auxiliary_constraints = 0;

  shrink_box(P, P.x0, trust, goal);
  return B;
}

BuiltSubproblem build_trajectory_block(const ScenarioConfig& cfg, const Decision& at,
                                       Objective obj, double trust) {
  Common cm(cfg);
  SurrogateCoefficients sc = surrogate_coefficients(cfg, at);
  BuiltSubproblem B;
  B.objective = obj;
  ConvexSubproblem& P = B.problem;
  P.name = "trajectory_block";
  const Vec2 depot = cfg.depot;
  const double H = cfg.altitude_m;
  const double sl_t = std::sqrt(cm.dc.lambda_t);
  const double sl_si = std::sqrt(cm.dc.lambda_si);

  std::vector<std::vector<char>> active(size_t(cm.K), std::vector<char>(size_t(cm.N), 0));
  std::vector<char> slot_active(size_t(cm.N), 0);
  for (int k = 0; k < cm.K; ++k)
    for (int n = 1; n <= cm.N; ++n)
      if (at.beta[size_t(k)][size_t(n)] > 0) {
        active[size_t(k)][size_t(n - 1)] = 1;
        slot_active[size_t(n - 1)] = 1;
      }

  B.qx_var.assign(size_t(cm.N) + 1, -1);
  B.qy_var.assign(size_t(cm.N) + 1, -1);
  B.e_var.assign(size_t(cm.K), std::vector<int>(size_t(cm.N), -1));
  B.u_var.assign(size_t(cm.N), -1);
  int nv = 0;
  for (int n = 1; n <= cm.N - 1; ++n) {
    B.qx_var[size_t(n)] = nv++;
    B.qy_var[size_t(n)] = nv++;
  }
  long dropped_e = 0, dropped_u = 0;
  for (int k = 0; k < cm.K; ++k)
    for (int n = 1; n <= cm.N; ++n) {
      if (active[size_t(k)][size_t(n - 1)])
        B.e_var[size_t(k)][size_t(n - 1)] = nv++;
      else
        ++dropped_e;
    }
  for (int n = 1; n <= cm.N; ++n) {
    if (slot_active[size_t(n - 1)])
      B.u_var[size_t(n - 1)] = nv++;
    else
      ++dropped_u;
  }
  const int goal = nv++;

  const double phi_hi = phi_upper_bound(cfg, at);
  const double tau_hi_cap = *std::min_element(cm.cap.begin(), cm.cap.end());
  const double tau_scale = std::max(*std::max_element(cm.cap.begin(), cm.cap.end()), 1.0);
  const double tau_lo = -0.01 * tau_scale, tau_hi = 1.001 * tau_hi_cap;

  P.num_vars = nv;
  P.lo = VecX::Constant(nv, -opt::kInf);
  P.hi = VecX::Constant(nv, opt::kInf);
  P.x0 = VecX::Zero(nv);
  P.var_scale = VecX::Ones(nv);
  P.cost = VecX::Zero(nv);
  P.epigraph_var = goal;

  const double pad = 0.05 * cm.vd;
  for (int n = 1; n <= cm.N - 1; ++n) {
    double reach = cm.vd * std::min(n, cm.N - n) + pad;
    int vx = B.qx_var[size_t(n)], vy = B.qy_var[size_t(n)];
    P.lo[vx] = depot.x - reach;
    P.hi[vx] = depot.x + reach;
    P.lo[vy] = depot.y - reach;
    P.hi[vy] = depot.y + reach;
    P.var_scale[vx] = P.var_scale[vy] = std::max(cm.vd, 1.0);
    Vec2 warm = depot + (1 - 1e-6) * (at.traj[size_t(n)] - depot);
    P.x0[vx] = warm.x;
    P.x0[vy] = warm.y;
  }
  auto warm_pos = [&](int n) -> Vec2 {
    if (n <= 0 || n >= cm.N) return depot;
    return {P.x0[B.qx_var[size_t(n)]], P.x0[B.qy_var[size_t(n)]]};
  };
  for (int k = 0; k < cm.K; ++k)
    for (int n = 1; n <= cm.N; ++n) {
      int v = B.e_var[size_t(k)][size_t(n - 1)];
      if (v < 0) continue;
      double d2p = bound::dist_sq(at.traj[size_t(n)], cfg.devices[size_t(k)], H);
      double capv = sq_dist_lb(warm_pos(n), cfg.devices[size_t(k)], H, at.traj[size_t(n)]);
      P.lo[v] = 1e-6 * d2p;
      P.x0[v] = std::max(0.999 * capv, 2e-6 * d2p);
      P.var_scale[v] = d2p;
    }
  for (int n = 1; n <= cm.N; ++n) {
    int v = B.u_var[size_t(n - 1)];
    if (v < 0) continue;
    double d2p = bound::dist_sq(at.traj[size_t(n)], cfg.target, H);
    double capv = sq_dist_lb(warm_pos(n), cfg.target, H, at.traj[size_t(n)]);
    P.lo[v] = 1e-6 * d2p;
    P.x0[v] = std::max(0.999 * capv, 2e-6 * d2p);
    P.var_scale[v] = d2p;
  }
  if (obj == Objective::min_worst_error) {
    B.phi_var = goal;
    P.lo[goal] = 0;
    P.hi[goal] = phi_hi;
    P.var_scale[goal] = std::max(phi_hi, 1e-6);
    P.cost[goal] = 1.0;
  } else {
    B.tau_var = goal;
    P.lo[goal] = tau_lo;
    P.hi[goal] = tau_hi;
    P.var_scale[goal] = tau_scale;
    P.cost[goal] = -1.0 / tau_scale;
  }
  P.x0[goal] = goal_start(cm, at, obj, phi_hi, tau_lo, tau_hi);

  // helper: add the position terms of a slot to a smooth function, either
  // as real variables or folded into constants when the slot is pinned
  auto slot_vars = [&](int n, int extra) {
    std::vector<int> vars;
    if (n >= 1 && n <= cm.N - 1) {
      vars.push_back(B.qx_var[size_t(n)]);
      vars.push_back(B.qy_var[size_t(n)]);
    }
    vars.push_back(extra);
    return vars;
  };

  // mobility, one row per hop
  for (int n = 1; n <= cm.N; ++n) {
    bool a_free = n - 1 >= 1 && n - 1 <= cm.N - 1;
    bool b_free = n >= 1 && n <= cm.N - 1;
    auto f = std::make_unique<SmoothFn>();
    f->label = "mobility";
    f->inner_const = -(cm.vd * cm.vd);
    f->out_scale = 1.0 / (cm.vd * cm.vd);
    if (a_free && b_free) {
      f->coef.push_back(1.0);
      f->subs.push_back(std::make_unique<opt::SqDiffFn>(
          std::vector<int>{B.qx_var[size_t(n)], B.qy_var[size_t(n)],
                           B.qx_var[size_t(n - 1)], B.qy_var[size_t(n - 1)]},
          1.0));
    } else if (b_free) {  // previous end pinned at the depot
      f->coef.push_back(1.0);
      f->subs.push_back(std::make_unique<opt::SqToPointFn>(
          std::vector<int>{B.qx_var[size_t(n)], B.qy_var[size_t(n)]}, 1.0, depot.x,
          depot.y));
    } else if (a_free) {
      f->coef.push_back(1.0);
      f->subs.push_back(std::make_unique<opt::SqToPointFn>(
          std::vector<int>{B.qx_var[size_t(n - 1)], B.qy_var[size_t(n - 1)]}, 1.0,
          depot.x, depot.y));
    } else {
      continue;  // both ends pinned: hop length zero
    }
    f->finalize();
    P.smooth.push_back(std::move(f));
  }

  long n_view = 0, n_silent = 0;
  // auxiliary caps: u below the linearized target range, e below the
  // linearized device range
  for (int n = 1; n <= cm.N; ++n) {
    int uv = B.u_var[size_t(n - 1)];
    if (uv < 0) continue;
    Vec2 qp = at.traj[size_t(n)];
    double d2p = bound::dist_sq(qp, cfg.target, H);
    LinearRow row;
    row.label = "view_cap";
    double rhs = d2p;
    row.terms.push_back({uv, 1.0 / d2p});
    if (n <= cm.N - 1) {
      Vec2 a = qp - cfg.target;
      row.terms.push_back({B.qx_var[size_t(n)], -2 * a.x / d2p});
      row.terms.push_back({B.qy_var[size_t(n)], -2 * a.y / d2p});
      rhs -= 2 * dot(a, qp);
    } else {
      rhs = sq_dist_lb(depot, cfg.target, H, qp);
    }
    row.rhs = rhs / d2p;
    P.linear.push_back(std::move(row));
    ++n_view;
  }
  for (int k = 0; k < cm.K; ++k)
    for (int n = 1; n <= cm.N; ++n) {
      int ev = B.e_var[size_t(k)][size_t(n - 1)];
      if (ev < 0) continue;
      Vec2 qp = at.traj[size_t(n)];
      Vec2 g = cfg.devices[size_t(k)];
      double d2p = bound::dist_sq(qp, g, H);
      LinearRow row;
      row.label = "range_cap";
      double rhs = d2p;
      row.terms.push_back({ev, 1.0 / d2p});
      if (n <= cm.N - 1) {
        Vec2 a = qp - g;
        row.terms.push_back({B.qx_var[size_t(n)], -2 * a.x / d2p});
        row.terms.push_back({B.qy_var[size_t(n)], -2 * a.y / d2p});
        rhs -= 2 * dot(a, qp);
      } else {
        rhs = sq_dist_lb(depot, g, H, qp);
      }
      row.rhs = rhs / d2p;
      P.linear.push_back(std::move(row));
    }

  // echo floor rows: one per transmitting pair, plus a quiet row for slots
  // with no uplink scheduled
  for (int n = 1; n <= cm.N; ++n) {
    Vec2 qp = at.traj[size_t(n)];
    double p = at.power[size_t(n - 1)];
    double d2pt = bound::dist_sq(qp, cfg.target, H);
    double amp = std::sqrt(cm.dc.lambda_t * std::max(p, 0.0));
    double A_l = amp * (2.0 / d2pt - H * H / (d2pt * d2pt));
    double B_l = amp / (d2pt * d2pt);
    bool q_free = n <= cm.N - 1;
    double fold = q_free ? 0.0 : planar_sq(depot, cfg.target);
    auto make_echo_row = [&](double vphi, int ev, double lam_k) {
      auto f = std::make_unique<SmoothFn>();
      f->label = "echo_floor";
      f->out_scale = 1.0 / cm.gth;
      f->inner_const = cm.gth - 2 * vphi * A_l +
                       vphi * vphi * (cm.dc.lambda_si * p + cm.n0);
      if (q_free) {
        f->coef.push_back(1.0);
        f->subs.push_back(std::make_unique<opt::SqToPointFn>(
            std::vector<int>{B.qx_var[size_t(n)], B.qy_var[size_t(n)]},
            2 * vphi * B_l, cfg.target.x, cfg.target.y));
      } else {
        f->inner_const += 2 * vphi * B_l * fold;
      }
      if (ev >= 0) {
        f->coef.push_back(1.0);
        f->subs.push_back(
            std::make_unique<opt::RecipFn>(ev, vphi * vphi * lam_k));
      }
      return f;
    };
    if (slot_active[size_t(n - 1)]) {
      for (int k = 0; k < cm.K; ++k) {
        if (!active[size_t(k)][size_t(n - 1)]) continue;
        auto f = make_echo_row(sc.varphi[size_t(k)][size_t(n - 1)],
                               B.e_var[size_t(k)][size_t(n - 1)],
                               cm.dc.lambda_k[size_t(k)]);
        f->finalize();
        P.smooth.push_back(std::move(f));
      }
    } else {
      auto f = make_echo_row(sc.varphi_silent[size_t(n - 1)], -1, 0.0);
      ++n_silent;
      // a pinned quiet slot leaves no variables; the row is a constant
      // covered by the expansion point's own feasibility
      if (f->subs.empty()) continue;
      f->finalize();
      P.smooth.push_back(std::move(f));
    }
  }

  // per-slot bound coefficients for the rate pieces
  std::vector<double> Aw(size_t(cm.N), 0.0), Bw(size_t(cm.N), 0.0);
  for (int n = 1; n <= cm.N; ++n) {
    Vec2 qp = at.traj[size_t(n)];
    double p = at.power[size_t(n - 1)];
    double d2pt = bound::dist_sq(qp, cfg.target, H);
    double cross = 2 * sl_t * sl_si;
    Aw[size_t(n - 1)] =
        p * (cm.dc.lambda_t * (3.0 / (d2pt * d2pt) - 2 * H * H / (d2pt * d2pt * d2pt)) +
             cross * (2.0 / d2pt - H * H / (d2pt * d2pt)) + cm.dc.lambda_si) +
        cm.n0;
    Bw[size_t(n - 1)] =
        p * (2 * cm.dc.lambda_t / (d2pt * d2pt * d2pt) + cross / (d2pt * d2pt));
  }

  auto make_rate_lb = [&](int k, int n) {
    Vec2 qp = at.traj[size_t(n)];
    Vec2 g = cfg.devices[size_t(k)];
    double p = at.power[size_t(n - 1)];
    double d2pk = bound::dist_sq(qp, g, H);
    opt::RateLbSlotFn::Params pr;
    pr.bits_scale = cm.bits_scale;
    pr.rho = sc.rho[size_t(k)][size_t(n - 1)];
    pr.A = cm.dc.lambda_k[size_t(k)] * (2.0 / d2pk - H * H / (d2pk * d2pk));
    pr.B = cm.dc.lambda_k[size_t(k)] / (d2pk * d2pk);
    pr.gx = g.x;
    pr.gy = g.y;
    pr.c2 = cm.dc.lambda_t * p;
    pr.c1 = 2 * sl_t * sl_si * p;
    pr.psi_const = cm.dc.lambda_si * p + cm.n0;
    pr.fixed_sq = planar_sq(depot, g);
    return std::make_unique<opt::RateLbSlotFn>(
        slot_vars(n, B.u_var[size_t(n - 1)]), pr);
  };
  auto make_rate_ub = [&](int k, int n) {
    opt::RateUbSlotFn::Params pr;
    pr.bits_scale = cm.bits_scale;
    pr.mu = sc.mu[size_t(k)][size_t(n - 1)];
    pr.nu = sc.nu[size_t(k)][size_t(n - 1)];
    pr.A = Aw[size_t(n - 1)];
    pr.B = Bw[size_t(n - 1)];
    pr.gx = cfg.target.x;
    pr.gy = cfg.target.y;
    pr.ck = cm.dc.lambda_k[size_t(k)];
    pr.fixed_sq = planar_sq(depot, cfg.target);
    return std::make_unique<opt::RateUbSlotFn>(
        slot_vars(n, B.e_var[size_t(k)][size_t(n - 1)]), pr);
  };

  // data ceilings with the convex rate upper bound
  for (int k = 0; k < cm.K; ++k) {
    bool any = false;
    for (int n = 1; n <= cm.N; ++n) any = any || active[size_t(k)][size_t(n - 1)];
    if (!any) continue;
    auto f = std::make_unique<SmoothFn>();
    f->label = "data_cap";
    f->inner_const = -cm.cap[size_t(k)];
    f->out_scale = 1.0 / cm.cap[size_t(k)];
    for (int n = 1; n <= cm.N; ++n) {
      if (!active[size_t(k)][size_t(n - 1)]) continue;
      f->coef.push_back(cm.delta * at.beta[size_t(k)][size_t(n)]);
      f->subs.push_back(make_rate_ub(k, n));
    }
    f->finalize();
    P.smooth.push_back(std::move(f));
  }

  if (obj == Objective::min_worst_error) {
    for (int m = 0; m < cm.M; ++m) {
      auto f = std::make_unique<SmoothFn>();
      f->label = "objective_epigraph";
      f->powerlaw = true;
      f->pl_a = cfg.err_coeff[size_t(m)];
      f->pl_b = cfg.err_exp[size_t(m)];
      f->inner_const = cfg.historical_samples[size_t(m)];
      for (int k : cfg.groups[size_t(m)])
        for (int n = 1; n <= cm.N; ++n) {
          if (!active[size_t(k)][size_t(n - 1)]) continue;
          f->coef.push_back(cm.delta * at.beta[size_t(k)][size_t(n)] /
                            cfg.sample_bits[size_t(m)]);
          f->subs.push_back(make_rate_lb(k, n));
        }
      f->outer_lin.push_back({goal, -1.0});
      f->out_scale = 1.0 / std::max(phi_hi, 1e-12);
      f->finalize();
      P.smooth.push_back(std::move(f));
    }
  } else {
    for (int k = 0; k < cm.K; ++k) {
      bool any = false;
      for (int n = 1; n <= cm.N; ++n) any = any || active[size_t(k)][size_t(n - 1)];
      if (!any) {
        LinearRow row;
        row.label = "floor_cap";
        row.terms.push_back({goal, 1.0 / cm.cap[size_t(k)]});
        row.rhs = 0.0;
        P.linear.push_back(std::move(row));
        continue;
      }
      auto f = std::make_unique<SmoothFn>();
      f->label = "floor_cap";
      f->out_scale = 1.0 / cm.cap[size_t(k)];
      f->outer_lin.push_back({goal, 1.0});
      for (int n = 1; n <= cm.N; ++n) {
        if (!active[size_t(k)][size_t(n - 1)]) continue;
        f->coef.push_back(-cm.delta * at.beta[size_t(k)][size_t(n)]);
        f->subs.push_back(make_rate_lb(k, n));
      }
      f->finalize();
      P.smooth.push_back(std::move(f));
    }
  }

  P.acct.nominal_vars = 2L * cm.N + long(cm.K) * cm.N + cm.N + 1;
  P.acct.eliminated_vars = 2 + dropped_e + dropped_u;
  P.acct.counted_constraints = 2L * cm.K * cm.N +
                               (obj == Objective::min_worst_error ? cm.M : cm.K) + cm.K;
  P.acct.auxiliary_constraints = cm.N + n_view + n_silent;

  // expansion center for the trust box: the unshifted previous iterate
  VecX center = P.x0;
  for (int n = 1; n <= cm.N - 1; ++n) {
    center[B.qx_var[size_t(n)]] = at.traj[size_t(n)].x;
    center[B.qy_var[size_t(n)]] = at.traj[size_t(n)].y;
  }
  shrink_box(P, center, trust, goal);
  return B;
}

BuiltSubproblem build_power_block(const ScenarioConfig& cfg, const Decision& at,
                                  Objective obj, double trust) {
  Common cm(cfg);
  SurrogateCoefficients sc = surrogate_coefficients(cfg, at);
  BuiltSubproblem B;
  B.objective = obj;
  ConvexSubproblem& P = B.problem;
  P.name = "power_block";
  const double pcap = cfg.uav_power_cap_w;

  std::vector<std::vector<char>> active(size_t(cm.K), std::vector<char>(size_t(cm.N), 0));
  std::vector<char> slot_active(size_t(cm.N), 0);
  for (int k = 0; k < cm.K; ++k)
    for (int n = 1; n <= cm.N; ++n)
      if (at.beta[size_t(k)][size_t(n)] > 0) {
        active[size_t(k)][size_t(n - 1)] = 1;
        slot_active[size_t(n - 1)] = 1;
      }

  B.p_var.assign(size_t(cm.N), -1);
  int nv = 0;
  for (int n = 1; n <= cm.N; ++n) B.p_var[size_t(n - 1)] = nv++;
  const int goal = nv++;

  const double phi_hi = phi_upper_bound(cfg, at);
  const double tau_hi_cap = *std::min_element(cm.cap.begin(), cm.cap.end());
  const double tau_scale = std::max(*std::max_element(cm.cap.begin(), cm.cap.end()), 1.0);
  const double tau_lo = -0.01 * tau_scale, tau_hi = 1.001 * tau_hi_cap;

  P.num_vars = nv;
  P.lo = VecX::Zero(nv);
  P.hi = VecX::Constant(nv, pcap);
  P.x0 = VecX::Zero(nv);
  P.var_scale = VecX::Constant(nv, std::max(pcap, 1e-6));
  P.cost = VecX::Zero(nv);
  P.epigraph_var = goal;
  for (int n = 1; n <= cm.N; ++n)
    P.x0[B.p_var[size_t(n - 1)]] = std::clamp(at.power[size_t(n - 1)], 0.0, pcap);
  if (obj == Objective::min_worst_error) {
    B.phi_var = goal;
    P.lo[goal] = 0;
    P.hi[goal] = phi_hi;
    P.var_scale[goal] = std::max(phi_hi, 1e-6);
    P.cost[goal] = 1.0;
  } else {
    B.tau_var = goal;
    P.lo[goal] = tau_lo;
    P.hi[goal] = tau_hi;
    P.var_scale[goal] = tau_scale;
    P.cost[goal] = -1.0 / tau_scale;
  }
  P.x0[goal] = goal_start(cm, at, obj, phi_hi, tau_lo, tau_hi);

  // echo floor: linear in the slot power once the trajectory is frozen
  long n_silent = 0;
  for (int n = 1; n <= cm.N; ++n) {
    double d2pt = bound::dist_sq(at.traj[size_t(n)], cfg.target, cfg.altitude_m);
    double echo_gain = cm.dc.lambda_t / (d2pt * d2pt);
    int pv = B.p_var[size_t(n - 1)];
    if (slot_active[size_t(n - 1)]) {
      for (int k = 0; k < cm.K; ++k) {
        if (!active[size_t(k)][size_t(n - 1)]) continue;
        double rhsu = cm.gth * (sc.kappa[size_t(k)][size_t(n - 1)] + cm.n0);
        LinearRow row;
        row.label = "echo_floor";
        row.terms.push_back({pv, (cm.gth * cm.dc.lambda_si - echo_gain) / rhsu});
        row.rhs = -1.0;
        P.linear.push_back(std::move(row));
      }
    } else {
      double rhsu = cm.gth * cm.n0;
      LinearRow row;
      row.label = "echo_floor";
      row.terms.push_back({pv, (cm.gth * cm.dc.lambda_si - echo_gain) / rhsu});
      row.rhs = -1.0;
      P.linear.push_back(std::move(row));
      ++n_silent;
    }
  }

  // data ceilings keep the exact (convex) rate dependence on power
  for (int k = 0; k < cm.K; ++k) {
    bool any = false;
    for (int n = 1; n <= cm.N; ++n) any = any || active[size_t(k)][size_t(n - 1)];
    if (!any) continue;
    auto f = std::make_unique<SmoothFn>();
    f->label = "data_cap";
    f->inner_const = -cm.cap[size_t(k)];
    f->out_scale = 1.0 / cm.cap[size_t(k)];
    for (int n = 1; n <= cm.N; ++n) {
      if (!active[size_t(k)][size_t(n - 1)]) continue;
      f->coef.push_back(cm.delta * at.beta[size_t(k)][size_t(n)]);
      f->subs.push_back(std::make_unique<opt::RateExactPowerFn>(
          B.p_var[size_t(n - 1)], cm.bits_scale,
          sc.kappa[size_t(k)][size_t(n - 1)], sc.zeta[size_t(n - 1)], cm.n0));
    }
    f->finalize();
    P.smooth.push_back(std::move(f));
  }

  // tangent expansion of the rate in power: an affine under-estimator
  auto tangent = [&](int k, int n, double* r0, double* slope) {
    double kap = sc.kappa[size_t(k)][size_t(n - 1)];
    double zet = sc.zeta[size_t(n - 1)];
    double p0 = at.power[size_t(n - 1)];
    double den = zet * p0 + cm.n0;
    *r0 = cm.bits_scale * (std::log(kap + den) - std::log(den));
    *slope = cm.bits_scale * zet * (1.0 / (kap + den) - 1.0 / den);
  };

  if (obj == Objective::min_worst_error) {
    for (int m = 0; m < cm.M; ++m) {
      auto f = std::make_unique<SmoothFn>();
      f->label = "objective_epigraph";
      f->powerlaw = true;
      f->pl_a = cfg.err_coeff[size_t(m)];
      f->pl_b = cfg.err_exp[size_t(m)];
      f->inner_const = cfg.historical_samples[size_t(m)];
      for (int k : cfg.groups[size_t(m)])
        for (int n = 1; n <= cm.N; ++n) {
          if (!active[size_t(k)][size_t(n - 1)]) continue;
          double r0, slope;
          tangent(k, n, &r0, &slope);
          double w = cm.delta * at.beta[size_t(k)][size_t(n)] / cfg.sample_bits[size_t(m)];
          f->inner_lin.push_back({B.p_var[size_t(n - 1)], w * slope});
          f->inner_const += w * (r0 - slope * at.power[size_t(n - 1)]);
        }
      f->outer_lin.push_back({goal, -1.0});
      f->out_scale = 1.0 / std::max(phi_hi, 1e-12);
      f->finalize();
      P.smooth.push_back(std::move(f));
    }
  } else {
    for (int k = 0; k < cm.K; ++k) {
      LinearRow row;
      row.label = "floor_cap";
      double ck = cm.cap[size_t(k)];
      row.terms.push_back({goal, 1.0 / ck});
      double rhs = 0;
      for (int n = 1; n <= cm.N; ++n) {
        if (!active[size_t(k)][size_t(n - 1)]) continue;
        double r0, slope;
        tangent(k, n, &r0, &slope);
        double w = cm.delta * at.beta[size_t(k)][size_t(n)];
        row.terms.push_back({B.p_var[size_t(n - 1)], -w * slope / ck});
        rhs += w * (r0 - slope * at.power[size_t(n - 1)]);
      }
      row.rhs = rhs / ck;
      P.linear.push_back(std::move(row));
    }
  }

  P.acct.nominal_vars = long(cm.N) + 1;
  P.acct.eliminated_vars = 0;
  P.acct.counted_constraints = long(cm.K) * cm.N + cm.N +
                               (obj == Objective::min_worst_error ? cm.M : cm.K) + cm.K;
  P.acct.auxiliary_constraints = n_silent;

  VecX center = P.x0;
  shrink_box(P, center, trust, goal);
  return B;
}

void apply_solution(const BuiltSubproblem& b, const VecX& x, Decision& d) {
  if (!b.beta_var.empty()) {
    int K = int(b.beta_var.size());
    int N = int(b.beta_var[0].size());
    for (int k = 0; k < K; ++k) {
      d.beta[size_t(k)][0] = 0;
      for (int n = 1; n <= N; ++n) {
        int v = b.beta_var[size_t(k)][size_t(n - 1)];
        double val = v >= 0 ? x[v] : 0.0;
        d.beta[size_t(k)][size_t(n)] = val < kShareSnap ? 0.0 : val;
      }
    }
  }
  if (!b.qx_var.empty()) {
    int N = int(b.qx_var.size()) - 1;
    for (int n = 1; n <= N - 1; ++n) {
      int vx = b.qx_var[size_t(n)], vy = b.qy_var[size_t(n)];
      if (vx >= 0) d.traj[size_t(n)] = {x[vx], x[vy]};
    }
    d.traj[size_t(N)] = d.traj[0];
  }
  if (!b.p_var.empty()) {
    int N = int(b.p_var.size());
    for (int n = 1; n <= N; ++n) d.power[size_t(n - 1)] = x[b.p_var[size_t(n - 1)]];
  }
}

} // namespace uavisac::cvx
