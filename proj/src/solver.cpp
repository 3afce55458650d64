#include "uavisac/solver.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace uavisac::opt {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::ok: return "ok";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::numerical_trouble: return "numerical_trouble";
  }
  return "unknown";
}

namespace {

struct Barrier {
  const ConvexSubproblem& P;
  bool phase1;       // extra slack variable appended when true
  double s_lo = 0, s_hi = 0;
  int nx, n;
  int m = 0;         // barrier term count
  mutable std::vector<double> gbuf;

  Barrier(const ConvexSubproblem& p, bool ph1) : P(p), phase1(ph1) {
    nx = p.num_vars;
    n = nx + (phase1 ? 1 : 0);
    size_t maxsup = 1;
    for (const auto& f : p.smooth) maxsup = std::max(maxsup, f->support().size());
    gbuf.resize(maxsup);
    m = int(p.smooth.size() + p.linear.size());
    for (int i = 0; i < nx; ++i) {
      if (p.lo[i] > -kInf) ++m;
      if (p.hi[i] < kInf) ++m;
    }
    if (phase1) m += 2;  // slack variable box
  }

  double slack_of(const VecX& z) const { return z[n - 1]; }

  // smallest slack margin needed so every barrier log is defined
  double merit(const VecX& z, double t, const VecX& cost) const {
    double v;
    if (phase1) {
      v = t * z[n - 1];
    } else {
      v = 0;
      for (int i = 0; i < nx; ++i) v += cost[i] * z[i];
      v *= t;
    }
    const double shift = phase1 ? z[n - 1] : 0.0;
    for (const auto& f : P.smooth) {
      double g = f->value(z.head(nx));
      if (!std::isfinite(g)) return kInf;
      double s = shift - g;
      if (s <= 0) return kInf;
      v -= std::log(s);
    }
    for (size_t r = 0; r < P.linear.size(); ++r) {
      double s = shift - P.linear_value(int(r), z.head(nx));
      if (s <= 0) return kInf;
      v -= std::log(s);
    }
    for (int i = 0; i < nx; ++i) {
      if (P.lo[i] > -kInf) {
        double s = z[i] - P.lo[i];
        if (s <= 0) return kInf;
        v -= std::log(s);
      }
      if (P.hi[i] < kInf) {
        double s = P.hi[i] - z[i];
        if (s <= 0) return kInf;
        v -= std::log(s);
      }
    }
    if (phase1) {
      double a = z[n - 1] - s_lo, b = s_hi - z[n - 1];
      if (a <= 0 || b <= 0) return kInf;
      v -= std::log(a) + std::log(b);
    }
    return v;
  }

  // gradient and Hessian of the barrier merit; returns false off the domain
  bool assemble(const VecX& z, double t, const VecX& cost, VecX& g, MatX& H) const {
    g.setZero(n);
    H.setZero(n, n);
    if (phase1) {
      g[n - 1] = t;
    } else {
      for (int i = 0; i < nx; ++i) g[i] = t * cost[i];
    }
    const double shift = phase1 ? z[n - 1] : 0.0;
    const VecX x = z.head(nx);

    MatX Hx = MatX::Zero(nx, nx);
    VecX hx_cross = VecX::Zero(nx);  // phase-1 cross terms d2/dx ds
    double hss = 0;

    for (const auto& f : P.smooth) {
      double* gr = gbuf.data();
      double gv = f->value_grad(x, gr);
      if (!std::isfinite(gv)) return false;
      double s = shift - gv;
      if (s <= 0) return false;
      const auto& sup = f->support();
      double inv = 1.0 / s, inv2 = inv * inv;
      for (size_t a = 0; a < sup.size(); ++a) {
        g[sup[a]] += gr[a] * inv;
        for (size_t b = 0; b < sup.size(); ++b)
          Hx(sup[a], sup[b]) += gr[a] * gr[b] * inv2;
      }
      f->add_hessian(x, inv, Hx);
      if (phase1) {
        g[n - 1] -= inv;
        for (size_t a = 0; a < sup.size(); ++a) hx_cross[sup[a]] -= gr[a] * inv2;
        hss += inv2;
      }
    }
    for (size_t r = 0; r < P.linear.size(); ++r) {
      double s = shift - P.linear_value(int(r), x);
      if (s <= 0) return false;
      double inv = 1.0 / s, inv2 = inv * inv;
      const auto& terms = P.linear[r].terms;
      for (const auto& ta : terms) {
        g[ta.var] += ta.coef * inv;
        for (const auto& tb : terms)
          Hx(ta.var, tb.var) += ta.coef * tb.coef * inv2;
      }
      if (phase1) {
        g[n - 1] -= inv;
        for (const auto& ta : terms) hx_cross[ta.var] -= ta.coef * inv2;
        hss += inv2;
      }
    }
    for (int i = 0; i < nx; ++i) {
      if (P.lo[i] > -kInf) {
        double s = z[i] - P.lo[i];
        if (s <= 0) return false;
        g[i] -= 1.0 / s;
        Hx(i, i) += 1.0 / (s * s);
      }
      if (P.hi[i] < kInf) {
        double s = P.hi[i] - z[i];
        if (s <= 0) return false;
        g[i] += 1.0 / s;
        Hx(i, i) += 1.0 / (s * s);
      }
    }
    H.topLeftCorner(nx, nx) = Hx;
    if (phase1) {
      double a = z[n - 1] - s_lo, b = s_hi - z[n - 1];
      if (a <= 0 || b <= 0) return false;
      g[n - 1] += 1.0 / b - 1.0 / a;
      hss += 1.0 / (a * a) + 1.0 / (b * b);
      H.block(0, n - 1, nx, 1) = hx_cross;
      H.block(n - 1, 0, 1, nx) = hx_cross.transpose();
      H(n - 1, n - 1) = hss;
    }
    return true;
  }

  // violation of smooth + linear constraints only (box handled by projection)
  double start_violation(const VecX& x) const {
    double worst = -kInf;
    for (const auto& f : P.smooth) {
      double v = f->value(x);
      if (!std::isfinite(v)) return kInf;
      worst = std::max(worst, v);
    }
    for (size_t r = 0; r < P.linear.size(); ++r)
      worst = std::max(worst, P.linear_value(int(r), x));
    return worst;
  }
};

// largest step along dx keeping the box (and phase-1 slack box) strictly open
double box_step_cap(const Barrier& B, const VecX& z, const VecX& dx) {
  double cap = kInf;
  for (int i = 0; i < B.nx; ++i) {
    if (dx[i] > 0 && B.P.hi[i] < kInf) cap = std::min(cap, (B.P.hi[i] - z[i]) / dx[i]);
    if (dx[i] < 0 && B.P.lo[i] > -kInf) cap = std::min(cap, (B.P.lo[i] - z[i]) / dx[i]);
  }
  if (B.phase1) {
    int i = B.n - 1;
    if (dx[i] > 0) cap = std::min(cap, (B.s_hi - z[i]) / dx[i]);
    if (dx[i] < 0) cap = std::min(cap, (B.s_lo - z[i]) / dx[i]);
  }
  return cap;
}

struct CenterResult {
  bool numerical_ok = true;
  bool early_exit = false;  // phase-1 slack dropped below target
  int steps = 0;
  const char* reason = "";
};

// Newton centering at fixed t. Appends merit samples into `merits`.
CenterResult center(const Barrier& B, VecX& z, double t, const VecX& cost,
                    const VecX& scale, const SolverSettings& S,
                    double phase1_target, std::vector<double>& merits) {
  CenterResult res;
  VecX g(B.n), dy, dx;
  MatX H(B.n, B.n), Hs(B.n, B.n);
  merits.push_back(B.merit(z, t, cost));
  for (int it = 0; it < S.max_newton; ++it) {
    if (!B.assemble(z, t, cost, g, H)) {
      res.numerical_ok = false;
      res.reason = "barrier gradient undefined at the current point";
      return res;
    }
    // precondition with the variable scales
    VecX d = scale;
    MatX D = d.asDiagonal();
    Hs = D * H * D;
    VecX gs = d.cwiseProduct(g);

    double lev = 0;
    bool have_dir = false;
    double base = Hs.diagonal().cwiseAbs().maxCoeff();
    if (!(base > 0) || !std::isfinite(base)) base = 1.0;
    for (int tries = 0; tries < 10; ++tries) {
      MatX Ht = Hs;
      if (lev > 0) Ht.diagonal().array() += lev;
      Eigen::LDLT<MatX> ldlt(Ht);
      if (ldlt.info() == Eigen::Success) {
        dy = ldlt.solve(-gs);
        if (dy.allFinite() && gs.dot(dy) < 0) {
          have_dir = true;
          break;
        }
      }
      lev = (lev == 0) ? base * 1e-10 : lev * 100;
    }
    if (!have_dir) {
      res.numerical_ok = false;
      res.reason = "no Newton descent direction";
      return res;
    }
    dx = d.cwiseProduct(dy);
    double dec2 = -g.dot(dx);  // squared Newton decrement (up to Levenberg bias)
    if (0.5 * dec2 <= S.newton_tol) return res;

    double alpha = std::min(1.0, 0.995 * box_step_cap(B, z, dx));
    double f0 = merits.back();
    double slope = g.dot(dx);
    bool moved = false;
    for (int bt = 0; bt < S.max_backtracks; ++bt) {
      VecX zt = z + alpha * dx;
      double ft = B.merit(zt, t, cost);
      if (ft <= f0 + S.armijo * alpha * slope) {
        z = zt;
        merits.push_back(ft);
        moved = true;
        break;
      }
      alpha *= S.step_shrink;
    }
    ++res.steps;
    if (!moved) {
      // stalled: treat as centered when reasonably close, else flag
      res.numerical_ok = (0.5 * dec2 <= 1e-5);
      if (!res.numerical_ok) res.reason = "line search stalled far from center";
      return res;
    }
    if (B.phase1 && z[B.n - 1] < -phase1_target) {
      res.early_exit = true;
      return res;
    }
  }
  return res;
}

VecX project_strict(const ConvexSubproblem& P, const VecX& x0) {
  VecX x = x0;
  for (int i = 0; i < P.num_vars; ++i) {
    double lo = P.lo[i], hi = P.hi[i];
    if (lo > -kInf && hi < kInf) {
      double w = hi - lo;
      double eps = std::max(1e-12 * std::max(1.0, std::fabs(lo) + std::fabs(hi)), 1e-9 * w);
      x[i] = std::clamp(x[i], lo + eps, hi - eps);
    } else if (lo > -kInf) {
      double eps = 1e-9 * std::max(1.0, std::fabs(lo));
      x[i] = std::max(x[i], lo + eps);
    } else if (hi < kInf) {
      double eps = 1e-9 * std::max(1.0, std::fabs(hi));
      x[i] = std::min(x[i], hi - eps);
    }
  }
  return x;
}

} // namespace

SolverOutcome solve(const ConvexSubproblem& P, const SolverSettings& S) {
  SolverOutcome out;
  const int nx = P.num_vars;
  VecX scale = P.var_scale.size() == nx ? P.var_scale : VecX::Ones(nx);
  for (int i = 0; i < nx; ++i)
    if (!(scale[i] > 0) || !std::isfinite(scale[i])) scale[i] = 1;

  VecX x = project_strict(P, P.x0);
  const double margin = std::max(10 * S.feas_tol, 1e-6);

  {
    Barrier probe(P, false);
    double viol = probe.start_violation(x);
    // -inf just means there are no rows at all; only +inf / NaN signal a
    // start outside some constraint's domain
    if (!(viol < kInf)) {
      // fall back to the box midpoint before giving up
      VecX mid(nx);
      for (int i = 0; i < nx; ++i) {
        double lo = P.lo[i] > -kInf ? P.lo[i] : x[i] - std::max(1.0, scale[i]);
        double hi = P.hi[i] < kInf ? P.hi[i] : x[i] + std::max(1.0, scale[i]);
        mid[i] = 0.5 * (lo + hi);
      }
      mid = project_strict(P, mid);
      if (probe.start_violation(mid) < kInf) {
        x = mid;
        viol = probe.start_violation(x);
      } else {
        out.message = "start point outside the domain of a smooth constraint";
        out.x = x;
        return out;
      }
    }
    if (viol >= -margin) {
      // phase 1: minimize the max-violation slack
      Barrier B1(P, true);
      double s0 = viol + 0.1 * std::max(1.0, std::fabs(viol));
      B1.s_lo = -(10 * margin + 2);
      B1.s_hi = s0 + 10 * std::max(1.0, std::fabs(s0));
      VecX z(nx + 1);
      z.head(nx) = x;
      z[nx] = s0;
      VecX scale1(nx + 1);
      scale1.head(nx) = scale;
      scale1[nx] = 1;
      VecX cost1 = VecX::Zero(nx);  // unused in phase 1
      double t = S.t0;
      out.phase1_used = true;
      for (int c = 0; c < S.max_centers; ++c) {
        out.center_merits.emplace_back();
        CenterResult r = center(B1, z, t, cost1, scale1, S, margin, out.center_merits.back());
        out.newton_iters += r.steps;
        ++out.centers;
        if (r.early_exit) break;
        if (!r.numerical_ok) break;
        if (double(B1.m) / t <= std::min(S.opt_tol * 1e3, 0.1 * margin)) break;
        t *= S.mu;
      }
      out.phase1_infeasibility = z[nx];
      x = project_strict(P, z.head(nx));
      double after = probe.start_violation(x);
      if (!(after < 0) || z[nx] > S.feas_tol) {
        if (after > S.feas_tol || z[nx] > S.feas_tol) {
          out.status = SolveStatus::infeasible;
          out.x = x;
          out.objective = P.cost.dot(x);
          out.message = "phase 1 could not reach a strictly feasible point";
          return out;
        }
      }
    }
  }

  // phase 2: follow the central path
  Barrier B(P, false);
  double t = S.t0;
  bool reached = false, trouble = false;
  for (int c = 0; c < S.max_centers; ++c) {
    out.center_merits.emplace_back();
    CenterResult r = center(B, x, t, P.cost, scale, S, margin, out.center_merits.back());
    out.newton_iters += r.steps;
    ++out.centers;
    if (!r.numerical_ok) {
      trouble = true;
      out.message = r.reason;
      break;
    }
    out.gap = double(B.m) / t;
    if (out.gap <= S.opt_tol) {
      reached = true;
      break;
    }
    t *= S.mu;
  }

  out.x = x;
  out.objective = P.cost.dot(x);
  out.gap = double(B.m) / t;
  {
    VecX g(B.n);
    MatX H(B.n, B.n);
    if (B.assemble(x, t, P.cost, g, H)) {
      double cn = std::max(1.0, P.cost.lpNorm<Eigen::Infinity>());
      out.kkt_residual = (g / t).lpNorm<Eigen::Infinity>() / cn;
    }
  }
  if (reached)
    out.status = SolveStatus::ok;
  else if (trouble)
    out.status = SolveStatus::numerical_trouble;
  else
    out.status = SolveStatus::max_iterations;
  return out;
}

} // namespace uavisac::opt
