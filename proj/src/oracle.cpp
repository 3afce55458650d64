#include "uavisac/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace uavisac::oracle {

namespace {

double floor_one(double v) { return v < 1.0 ? 1.0 : v; }

struct Consts {
  double lam_t, lam_si;
  std::vector<double> lam_k;
  explicit Consts(const ScenarioConfig& cfg) {
    lam_t = cfg.ref_gain * cfg.rcs_m2 * cfg.num_antennas;
    lam_si = cfg.si_coeff * cfg.num_antennas;
    for (double pw : cfg.device_power_w) lam_k.push_back(cfg.ref_gain * pw);
  }
};

} // namespace

double dist_sq(Vec2 q, Vec2 g, double altitude_m) {
  double planar = std::hypot(q.x - g.x, q.y - g.y);
  return floor_one(planar * planar + altitude_m * altitude_m);
}

double comm_sinr(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k) {
  Consts c(cfg);
  double d2k = dist_sq(q, cfg.devices[size_t(k)], cfg.altitude_m);
  double d2t = dist_sq(q, cfg.target, cfg.altitude_m);
  double amp = std::sqrt(c.lam_t) / d2t + std::sqrt(c.lam_si);
  double den = amp * amp * p_uav_w + cfg.noise_w;
  return (c.lam_k[size_t(k)] / d2k) / den;
}

double radar_sinr(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k,
                  bool transmitting) {
  Consts c(cfg);
  double d2t = dist_sq(q, cfg.target, cfg.altitude_m);
  double num = c.lam_t * p_uav_w / (d2t * d2t);
  double den = c.lam_si * p_uav_w + cfg.noise_w;
  if (transmitting) {
    double d2k = dist_sq(q, cfg.devices[size_t(k)], cfg.altitude_m);
    den += c.lam_k[size_t(k)] / d2k;
  }
  return num / den;
}

double rate(const ScenarioConfig& cfg, Vec2 q, double p_uav_w, int k) {
  return cfg.bandwidth_hz * std::log2(1.0 + comm_sinr(cfg, q, p_uav_w, k));
}

double collected_bits(const ScenarioConfig& cfg, const bound::Decision& d, int k) {
  double delta = cfg.period_s / cfg.num_slots;
  double bits = 0;
  for (int n = 1; n <= cfg.num_slots; ++n) {
    double share = d.beta[size_t(k)][size_t(n)];
    if (share == 0) continue;
    bits += delta * share * rate(cfg, d.traj[size_t(n)], d.power[size_t(n - 1)], k);
  }
  return bits;
}

double worst_error(const ScenarioConfig& cfg, const bound::Decision& d) {
  double worst = 0;
  for (int m = 0; m < cfg.num_models; ++m) {
    double samples = cfg.historical_samples[size_t(m)];
    for (int k : cfg.groups[size_t(m)])
      samples += collected_bits(cfg, d, k) / cfg.sample_bits[size_t(m)];
    double b = cfg.err_exp[size_t(m)];
    double err;
    if (b == 0)
      err = cfg.err_coeff[size_t(m)];
    else if (samples > 0)
      err = cfg.err_coeff[size_t(m)] * std::pow(samples, -b);
    else
      err = opt::kInf;
    worst = std::max(worst, err);
  }
  return worst;
}

std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h_rel) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double h = h_rel * std::max(1.0, std::fabs(x[i]));
    double save = x[i];
    x[i] = save + h;
    double fp = f(x);
    x[i] = save - h;
    double fm = f(x);
    x[i] = save;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

namespace {

// Resolves the epigraph variable by bisection; true when a feasible value
// exists (stored in x).
bool bisect_goal(const opt::ConvexSubproblem& p, opt::VecX& x, double tol) {
  const int v = p.epigraph_var;
  const bool minimize = p.cost[v] > 0;
  auto feasible = [&](double g) {
    x[v] = g;
    return p.max_violation(x) <= tol;
  };
  double lo = p.lo[v], hi = p.hi[v];
  if (minimize) {
    if (!feasible(hi)) return false;
    if (feasible(lo)) {
      x[v] = lo;
      return true;
    }
    double a = lo, b = hi;
    for (int i = 0; i < 60; ++i) {
      double m = 0.5 * (a + b);
      (feasible(m) ? b : a) = m;
    }
    x[v] = b;
    return true;
  }
  if (!feasible(lo)) return false;
  if (feasible(hi)) {
    x[v] = hi;
    return true;
  }
  double a = lo, b = hi;
  for (int i = 0; i < 60; ++i) {
    double m = 0.5 * (a + b);
    (feasible(m) ? a : b) = m;
  }
  x[v] = a;
  return true;
}

} // namespace

GridResult grid_minimize(const opt::ConvexSubproblem& p, const GridSpec& spec) {
  std::vector<long> counts;
  long total = 1;
  for (const auto& ax : spec.axes) {
    long cnt = long(std::floor((ax.hi - ax.lo) / ax.step + 1e-9)) + 1;
    if (cnt < 1) cnt = 1;
    counts.push_back(cnt);
    if (total > spec.max_points / cnt + 1) total = spec.max_points + 1;
    else total *= cnt;
  }
  if (total > spec.max_points)
    throw std::length_error("grid_minimize: lattice exceeds the point budget");

  GridResult best;
  best.points = total;
  opt::VecX x = p.x0;
  for (long it = 0; it < total; ++it) {
    long rem = it;
    for (size_t a = 0; a < spec.axes.size(); ++a) {
      long i = rem % counts[a];
      rem /= counts[a];
      x[spec.axes[a].var] = std::min(spec.axes[a].lo + double(i) * spec.axes[a].step,
                                     spec.axes[a].hi);
    }
    bool bad = false;
    for (const auto& [v, row] : spec.closures) {
      const auto& r = p.linear[size_t(row)];
      double own = 0, rest = 0;
      for (const auto& t : r.terms) {
        if (t.var == v)
          own = t.coef;
        else
          rest += t.coef * x[t.var];
      }
      if (own == 0) {
        bad = true;
        break;
      }
      x[v] = (r.rhs - rest) / own;
    }
    if (bad) continue;
    if (p.epigraph_var >= 0 && p.cost[p.epigraph_var] != 0) {
      if (!bisect_goal(p, x, spec.feas_tol)) continue;
    } else if (p.max_violation(x) > spec.feas_tol) {
      continue;
    }
    double obj = p.cost.dot(x);
    if (!best.found || obj < best.objective) {
      best.found = true;
      best.objective = obj;
      best.x = x;
    }
  }
  return best;
}

GridResult vertex_minimize(const opt::ConvexSubproblem& p, double feas_tol) {
  if (!p.smooth.empty())
    throw std::logic_error("vertex_minimize handles purely linear instances");
  const int n = p.num_vars;
  struct Face {
    opt::VecX a;
    double b;
  };
  std::vector<Face> faces;
  for (const auto& row : p.linear) {
    Face f{opt::VecX::Zero(n), row.rhs};
    for (const auto& t : row.terms) f.a[t.var] += t.coef;
    faces.push_back(std::move(f));
  }
  for (int i = 0; i < n; ++i) {
    if (p.lo[i] > -opt::kInf) {
      Face f{opt::VecX::Zero(n), -p.lo[i]};
      f.a[i] = -1;
      faces.push_back(std::move(f));
    }
    if (p.hi[i] < opt::kInf) {
      Face f{opt::VecX::Zero(n), p.hi[i]};
      f.a[i] = 1;
      faces.push_back(std::move(f));
    }
  }
  GridResult best;
  std::vector<int> pick(static_cast<size_t>(n));
  opt::MatX A(n, n);
  opt::VecX b(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      for (int r = 0; r < n; ++r) {
        A.row(r) = faces[size_t(pick[size_t(r)])].a.transpose();
        b[r] = faces[size_t(pick[size_t(r)])].b;
      }
      Eigen::FullPivLU<opt::MatX> lu(A);
      if (!lu.isInvertible()) return;
      opt::VecX x = lu.solve(b);
      ++best.points;
      for (const auto& f : faces)
        if (f.a.dot(x) > f.b + feas_tol * std::max(1.0, std::fabs(f.b))) return;
      double obj = p.cost.dot(x);
      if (!best.found || obj < best.objective) {
        best.found = true;
        best.objective = obj;
        best.x = x;
      }
      return;
    }
    for (int i = start; i <= int(faces.size()) - (n - depth); ++i) {
      pick[size_t(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  if (int(faces.size()) >= n) rec(0, 0);
  return best;
}

ToyBest toy_exhaustive_min_eta(const ScenarioConfig& cfg, int share_steps,
                               int pos_steps, int pow_steps) {
  if (cfg.num_devices > 2 || cfg.num_slots > 2)
    throw std::logic_error("toy_exhaustive_min_eta expects K <= 2 and N <= 2");
  const int K = cfg.num_devices, N = cfg.num_slots;
  const double vd = cfg.v_max_mps * cfg.period_s / cfg.num_slots;

  struct Dial {
    enum Kind { qx, qy, pw, share } kind;
    int n, k;
    std::vector<double> values;
  };
  std::vector<Dial> dials;
  auto linspace = [](double lo, double hi, int steps) {
    std::vector<double> v;
    if (steps <= 1) {
      v.push_back(lo);
      return v;
    }
    for (int i = 0; i < steps; ++i)
      v.push_back(lo + (hi - lo) * double(i) / double(steps - 1));
    return v;
  };
  for (int n = 1; n <= N - 1; ++n) {
    dials.push_back({Dial::qx, n, 0, linspace(cfg.depot.x - vd, cfg.depot.x + vd, pos_steps)});
    dials.push_back({Dial::qy, n, 0, linspace(cfg.depot.y - vd, cfg.depot.y + vd, pos_steps)});
  }
  for (int n = 1; n <= N; ++n)
    dials.push_back({Dial::pw, n, 0, linspace(0.0, cfg.uav_power_cap_w, pow_steps)});
  for (int n = 1; n <= N; ++n)
    for (int k = 0; k < K; ++k)
      dials.push_back({Dial::share, n, k, linspace(0.0, 1.0, share_steps)});

  long total = 1;
  for (const auto& d : dials) {
    if (total > 50'000'000 / long(d.values.size()) + 1)
      throw std::length_error("toy_exhaustive_min_eta: lattice too large");
    total *= long(d.values.size());
  }

  ToyBest best;
  bound::Decision d = bound::zero_decision(cfg);
  for (long it = 0; it < total; ++it) {
    long rem = it;
    for (const auto& dial : dials) {
      double v = dial.values[size_t(rem % long(dial.values.size()))];
      rem /= long(dial.values.size());
      switch (dial.kind) {
        case Dial::qx: d.traj[size_t(dial.n)].x = v; break;
        case Dial::qy: d.traj[size_t(dial.n)].y = v; break;
        case Dial::pw: d.power[size_t(dial.n - 1)] = v; break;
        case Dial::share: d.beta[size_t(dial.k)][size_t(dial.n)] = v; break;
      }
    }
    bool share_ok = true;
    for (int n = 1; n <= N && share_ok; ++n) {
      double s = 0;
      for (int k = 0; k < K; ++k) s += d.beta[size_t(k)][size_t(n)];
      share_ok = s <= 1.0 + 1e-12;
    }
    if (!share_ok) continue;
    d.phi = bound::eta(cfg, d);
    ++best.points;
    auto audit = bound::audit(cfg, d, false, 1e-9);
    if (!audit.feasible) continue;
    double obj = worst_error(cfg, d);
    if (obj < best.eta) {
      best.eta = obj;
      best.decision = d;
    }
  }
  return best;
}

} // namespace uavisac::oracle
