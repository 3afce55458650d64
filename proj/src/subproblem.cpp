#include "uavisac/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uavisac::opt {

namespace {

int pos_in(const std::vector<int>& sorted, int v) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
  return int(it - sorted.begin());
}

bool all_finite(const double* g, size_t n) {
  for (size_t i = 0; i < n; ++i)
    if (!std::isfinite(g[i])) return false;
  return true;
}

} // namespace

void SmoothFn::finalize() {
  if (coef.size() != subs.size())
    throw std::logic_error("SmoothFn: coef/subs size mismatch");
  support_.clear();
  for (const auto& s : subs)
    support_.insert(support_.end(), s->vars().begin(), s->vars().end());
  for (const auto& t : inner_lin) support_.push_back(t.var);
  for (const auto& t : outer_lin) support_.push_back(t.var);
  std::sort(support_.begin(), support_.end());
  support_.erase(std::unique(support_.begin(), support_.end()), support_.end());

  sub_pos_.clear();
  for (const auto& s : subs) {
    std::vector<int> pos;
    pos.reserve(s->vars().size());
    for (int v : s->vars()) pos.push_back(pos_in(support_, v));
    sub_pos_.push_back(std::move(pos));
  }
  ilin_pos_.clear();
  for (const auto& t : inner_lin) ilin_pos_.push_back(pos_in(support_, t.var));
  olin_pos_.clear();
  for (const auto& t : outer_lin) olin_pos_.push_back(pos_in(support_, t.var));
}

double SmoothFn::inner_value(const VecX& x) const {
  double s = inner_const;
  double gather[8];
  for (size_t j = 0; j < subs.size(); ++j) {
    const auto& vars = subs[j]->vars();
    for (size_t i = 0; i < vars.size(); ++i) gather[i] = x[vars[i]];
    double v = subs[j]->value(gather);
    if (!std::isfinite(v)) return kInf;
    s += coef[j] * v;
  }
  for (const auto& t : inner_lin) s += t.coef * x[t.var];
  return s;
}

double SmoothFn::value(const VecX& x) const {
  double s = inner_value(x);
  if (!std::isfinite(s)) return kInf;
  double outer;
  if (powerlaw) {
    if (pl_b == 0) {
      outer = pl_a;
    } else {
      if (s <= 0) return kInf;
      outer = pl_a * std::pow(s, -pl_b);
    }
  } else {
    outer = s;
  }
  double total = outer + outer_const;
  for (const auto& t : outer_lin) total += t.coef * x[t.var];
  return out_scale * total;
}

double SmoothFn::value_grad(const VecX& x, double* grad) const {
  const size_t n = support_.size();
  std::fill(grad, grad + n, 0.0);

  double s = inner_const;
  double gather[8], gsub[8];
  std::vector<double> ds(n, 0.0);
  for (size_t j = 0; j < subs.size(); ++j) {
    const auto& vars = subs[j]->vars();
    for (size_t i = 0; i < vars.size(); ++i) gather[i] = x[vars[i]];
    double v = subs[j]->value(gather);
    if (!std::isfinite(v)) return kInf;
    s += coef[j] * v;
    subs[j]->grad(gather, gsub);
    for (size_t i = 0; i < vars.size(); ++i)
      ds[sub_pos_[j][i]] += coef[j] * gsub[i];
  }
  for (size_t i = 0; i < inner_lin.size(); ++i) {
    s += inner_lin[i].coef * x[inner_lin[i].var];
    ds[ilin_pos_[i]] += inner_lin[i].coef;
  }

  double outer, douter;
  if (powerlaw) {
    if (pl_b == 0) {
      outer = pl_a;
      douter = 0;
    } else {
      if (s <= 0) return kInf;
      outer = pl_a * std::pow(s, -pl_b);
      douter = -pl_b * outer / s;
    }
  } else {
    outer = s;
    douter = 1;
  }

  for (size_t i = 0; i < n; ++i) grad[i] = douter * ds[i];
  double total = outer + outer_const;
  for (size_t i = 0; i < outer_lin.size(); ++i) {
    total += outer_lin[i].coef * x[outer_lin[i].var];
    grad[olin_pos_[i]] += outer_lin[i].coef;
  }
  for (size_t i = 0; i < n; ++i) grad[i] *= out_scale;
  return out_scale * total;
}

void SmoothFn::add_hessian(const VecX& x, double w, MatX& H) const {
  const size_t n = support_.size();

  double s = inner_const;
  double gather[8], gsub[8];
  std::vector<double> ds(n, 0.0);
  std::vector<std::vector<double>> sub_vals(subs.size());
  for (size_t j = 0; j < subs.size(); ++j) {
    const auto& vars = subs[j]->vars();
    for (size_t i = 0; i < vars.size(); ++i) gather[i] = x[vars[i]];
    s += coef[j] * subs[j]->value(gather);
    subs[j]->grad(gather, gsub);
    for (size_t i = 0; i < vars.size(); ++i)
      ds[sub_pos_[j][i]] += coef[j] * gsub[i];
  }
  for (size_t i = 0; i < inner_lin.size(); ++i) {
    s += inner_lin[i].coef * x[inner_lin[i].var];
    ds[ilin_pos_[i]] += inner_lin[i].coef;
  }

  double douter, d2outer;
  if (powerlaw) {
    if (pl_b == 0) {
      douter = 0;
      d2outer = 0;
    } else {
      double outer = pl_a * std::pow(s, -pl_b);
      douter = -pl_b * outer / s;
      d2outer = pl_b * (pl_b + 1) * outer / (s * s);
    }
  } else {
    douter = 1;
    d2outer = 0;
  }

  if (d2outer != 0) {
    for (size_t r = 0; r < n; ++r)
      for (size_t c = 0; c < n; ++c)
        H(support_[r], support_[c]) += w * out_scale * d2outer * ds[r] * ds[c];
  }
  if (douter == 0) return;

  double hbuf[16];
  for (size_t j = 0; j < subs.size(); ++j) {
    const auto& vars = subs[j]->vars();
    const size_t m = vars.size();
    const double wj = w * out_scale * douter * coef[j];
    if (wj == 0) continue;
    for (size_t i = 0; i < m; ++i) gather[i] = x[vars[i]];
    if (!subs[j]->hess(gather, hbuf)) {
      // central differences of the sub-gradient, with one-sided fallback
      // when a probe leaves the domain
      double gp[8], gm[8], g0[8];
      subs[j]->grad(gather, g0);
      double cols[8][8];
      for (size_t c = 0; c < m; ++c) {
        double h = 6e-6 * std::max(1.0, std::fabs(gather[c]));
        double save = gather[c];
        gather[c] = save + h;
        subs[j]->grad(gather, gp);
        gather[c] = save - h;
        subs[j]->grad(gather, gm);
        gather[c] = save;
        if (all_finite(gp, m) && all_finite(gm, m)) {
          for (size_t r = 0; r < m; ++r) cols[c][r] = (gp[r] - gm[r]) / (2 * h);
        } else if (all_finite(gp, m)) {
          for (size_t r = 0; r < m; ++r) cols[c][r] = (gp[r] - g0[r]) / h;
        } else if (all_finite(gm, m)) {
          for (size_t r = 0; r < m; ++r) cols[c][r] = (g0[r] - gm[r]) / h;
        } else {
          for (size_t r = 0; r < m; ++r) cols[c][r] = 0;
        }
      }
      for (size_t r = 0; r < m; ++r)
        for (size_t c = 0; c < m; ++c)
          hbuf[r * m + c] = 0.5 * (cols[c][r] + cols[r][c]);
    }
    for (size_t r = 0; r < m; ++r)
      for (size_t c = 0; c < m; ++c)
        H(support_[sub_pos_[j][r]], support_[sub_pos_[j][c]]) += wj * hbuf[r * m + c];
  }
}

double ConvexSubproblem::linear_value(int row, const VecX& x) const {
  const auto& r = linear[size_t(row)];
  double v = -r.rhs;
  for (const auto& t : r.terms) v += t.coef * x[t.var];
  return v;
}

double ConvexSubproblem::max_violation(const VecX& x) const {
  double worst = 0;
  for (int i = 0; i < num_vars; ++i) {
    double sc = std::max(1.0, var_scale.size() ? var_scale[i] : 1.0);
    if (lo[i] > -kInf) worst = std::max(worst, (lo[i] - x[i]) / sc);
    if (hi[i] < kInf) worst = std::max(worst, (x[i] - hi[i]) / sc);
  }
  for (size_t r = 0; r < linear.size(); ++r)
    worst = std::max(worst, linear_value(int(r), x));
  for (const auto& f : smooth) {
    double v = f->value(x);
    if (!std::isfinite(v)) return kInf;
    worst = std::max(worst, v);
  }
  return worst;
}

// --- sub-functions ----------------------------------------------------------

double SqDiffFn::value(const double* x) const {
  double dx = x[0] - x[2], dy = x[1] - x[3];
  return c_ * (dx * dx + dy * dy);
}
void SqDiffFn::grad(const double* x, double* g) const {
  double dx = x[0] - x[2], dy = x[1] - x[3];
  g[0] = 2 * c_ * dx;
  g[1] = 2 * c_ * dy;
  g[2] = -2 * c_ * dx;
  g[3] = -2 * c_ * dy;
}
bool SqDiffFn::hess(const double*, double* h) const {
  const double d = 2 * c_;
  const double H[16] = {d, 0, -d, 0, 0, d, 0, -d, -d, 0, d, 0, 0, -d, 0, d};
  std::copy(H, H + 16, h);
  return true;
}

double SqToPointFn::value(const double* x) const {
  double dx = x[0] - gx_, dy = x[1] - gy_;
  return c_ * (dx * dx + dy * dy);
}
void SqToPointFn::grad(const double* x, double* g) const {
  g[0] = 2 * c_ * (x[0] - gx_);
  g[1] = 2 * c_ * (x[1] - gy_);
}
bool SqToPointFn::hess(const double*, double* h) const {
  h[0] = 2 * c_;
  h[1] = 0;
  h[2] = 0;
  h[3] = 2 * c_;
  return true;
}

double RecipFn::value(const double* x) const {
  if (x[0] <= 0) return kInf;
  return c_ / x[0];
}
void RecipFn::grad(const double* x, double* g) const { g[0] = -c_ / (x[0] * x[0]); }
bool RecipFn::hess(const double* x, double* h) const {
  h[0] = 2 * c_ / (x[0] * x[0] * x[0]);
  return true;
}

double InvPolyFn::value(const double* x) const {
  if (x[0] <= 0) return kInf;
  return c2_ / (x[0] * x[0]) + c1_ / x[0];
}
void InvPolyFn::grad(const double* x, double* g) const {
  double u = x[0];
  g[0] = -2 * c2_ / (u * u * u) - c1_ / (u * u);
}
bool InvPolyFn::hess(const double* x, double* h) const {
  double u = x[0];
  h[0] = 6 * c2_ / (u * u * u * u) + 2 * c1_ / (u * u * u);
  return true;
}

double NegSqrtRadialFn::value(const double* x) const {
  double dx = x[0] - gx_, dy = x[1] - gy_;
  double s = A_ - B_ * (dx * dx + dy * dy);
  if (s <= 0) return kInf;
  return -c_ * std::sqrt(s);
}
void NegSqrtRadialFn::grad(const double* x, double* g) const {
  double dx = x[0] - gx_, dy = x[1] - gy_;
  double s = A_ - B_ * (dx * dx + dy * dy);
  double rs = std::sqrt(s);
  g[0] = c_ * B_ * dx / rs;
  g[1] = c_ * B_ * dy / rs;
}
bool NegSqrtRadialFn::hess(const double* x, double* h) const {
  double dx = x[0] - gx_, dy = x[1] - gy_;
  double s = A_ - B_ * (dx * dx + dy * dy);
  double rs = std::sqrt(s), s32 = s * rs;
  double cb = c_ * B_;
  h[0] = cb * (1 / rs + B_ * dx * dx / s32);
  h[1] = cb * B_ * dx * dy / s32;
  h[2] = h[1];
  h[3] = cb * (1 / rs + B_ * dy * dy / s32);
  return true;
}

double RateLbSlotFn::value(const double* x) const {
  double sq, u;
  if (pinned_) {
    sq = p_.fixed_sq;
    u = x[0];
  } else {
    double dx = x[0] - p_.gx, dy = x[1] - p_.gy;
    sq = dx * dx + dy * dy;
    u = x[2];
  }
  if (u <= 0) return kInf;
  double r = p_.A - p_.B * sq;
  if (r <= 0) return kInf;
  double gamma = 2 * p_.rho * std::sqrt(r)
               - p_.rho * p_.rho * (p_.c2 / (u * u) + p_.c1 / u + p_.psi_const);
  if (gamma <= -1) return kInf;
  return p_.bits_scale * std::log1p(gamma);
}
void RateLbSlotFn::grad(const double* x, double* g) const {
  double dx = 0, dy = 0, sq, u;
  if (pinned_) {
    sq = p_.fixed_sq;
    u = x[0];
  } else {
    dx = x[0] - p_.gx;
    dy = x[1] - p_.gy;
    sq = dx * dx + dy * dy;
    u = x[2];
  }
  double r = p_.A - p_.B * sq;
  double rs = std::sqrt(r);
  double gamma = 2 * p_.rho * rs
               - p_.rho * p_.rho * (p_.c2 / (u * u) + p_.c1 / u + p_.psi_const);
  double f = p_.bits_scale / (1 + gamma);
  double gu = f * (p_.rho * p_.rho * (2 * p_.c2 / (u * u * u) + p_.c1 / (u * u)));
  if (pinned_) {
    g[0] = gu;
  } else {
    g[0] = f * (-2 * p_.rho * p_.B * dx / rs);
    g[1] = f * (-2 * p_.rho * p_.B * dy / rs);
    g[2] = gu;
  }
}

double RateUbSlotFn::value(const double* x) const {
  double sq, e;
  if (pinned_) {
    sq = p_.fixed_sq;
    e = x[0];
  } else {
    double dx = x[0] - p_.gx, dy = x[1] - p_.gy;
    sq = dx * dx + dy * dy;
    e = x[2];
  }
  if (e <= 0) return kInf;
  double psi = p_.A - p_.B * sq;
  if (psi <= 0) return kInf;
  double omega = 2 * p_.nu * std::sqrt(psi) - p_.nu * p_.nu * p_.ck / e;
  if (omega <= 0) return kInf;
  double hterm = p_.mu + std::log1p(-p_.mu);
  return p_.bits_scale * ((1 - p_.mu) / omega - hterm);
}
void RateUbSlotFn::grad(const double* x, double* g) const {
  double dx = 0, dy = 0, sq, e;
  if (pinned_) {
    sq = p_.fixed_sq;
    e = x[0];
  } else {
    dx = x[0] - p_.gx;
    dy = x[1] - p_.gy;
    sq = dx * dx + dy * dy;
    e = x[2];
  }
  double psi = p_.A - p_.B * sq;
  double rps = std::sqrt(psi);
  double omega = 2 * p_.nu * rps - p_.nu * p_.nu * p_.ck / e;
  double f = -p_.bits_scale * (1 - p_.mu) / (omega * omega);
  double ge = f * (p_.nu * p_.nu * p_.ck / (e * e));
  if (pinned_) {
    g[0] = ge;
  } else {
    g[0] = f * (-2 * p_.nu * p_.B * dx / rps);
    g[1] = f * (-2 * p_.nu * p_.B * dy / rps);
    g[2] = ge;
  }
}

double RateExactPowerFn::value(const double* x) const {
  double den = zeta_ * x[0] + n0_;
  if (den <= 0 || kappa_ + den <= 0) return kInf;
  return bs_ * (std::log(kappa_ + den) - std::log(den));
}
void RateExactPowerFn::grad(const double* x, double* g) const {
  double den = zeta_ * x[0] + n0_;
  g[0] = bs_ * zeta_ * (1 / (kappa_ + den) - 1 / den);
}
bool RateExactPowerFn::hess(const double* x, double* h) const {
  double den = zeta_ * x[0] + n0_;
  h[0] = bs_ * zeta_ * zeta_ * (1 / (den * den) - 1 / ((kappa_ + den) * (kappa_ + den)));
  return true;
}

} // namespace uavisac::opt
