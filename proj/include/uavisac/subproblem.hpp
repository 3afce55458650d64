#pragma once

#include <Eigen/Dense>

#include <limits>
#include <memory>
#include <string>
#include <vector>

// Inequality-constrained convex program in the shape the interior-point
// solver consumes:
//
//   minimize    cost' x
//   subject to  lo <= x <= hi
//               a_r' x <= b_r                  (linear rows)
//               g_i(x) <= 0                    (smooth convex functions)
//
// Builders normalize every row/function by its natural scale so feasibility
// tolerances are relative. Smooth functions may return +infinity outside
// their domain; the solver treats that as an unacceptable step.
namespace uavisac::opt {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Small-support piece of a composite constraint. Values/gradients are taken
// at the gathered coordinates listed in vars (at most a handful).
class SubFn {
 public:
  explicit SubFn(std::vector<int> vars) : vars_(std::move(vars)) {}
  virtual ~SubFn() = default;
  const std::vector<int>& vars() const { return vars_; }
  virtual double value(const double* x) const = 0;
  virtual void grad(const double* x, double* g) const = 0;
  // Optional analytic Hessian (row-major vars x vars). Return false to let
  // the caller finite-difference grad() instead.
  virtual bool hess(const double* x, double* h) const {
    (void)x;
    (void)h;
    return false;
  }

 private:
  std::vector<int> vars_;
};

// g(x) = out_scale * [ outer( inner_const + sum_j coef_j sub_j(x)
//                             + sum_i ilin_i x_i )
//                      + sum_i olin_i x_i + olin_const ]
// outer is either the identity or the power law a * s^(-b) (domain s > 0).
class SmoothFn {
 public:
  struct LinTerm {
    int var;
    double coef;
  };

  std::string label;
  double out_scale = 1.0;
  bool powerlaw = false;
  double pl_a = 0, pl_b = 0;
  double inner_const = 0;
  std::vector<double> coef;
  std::vector<std::unique_ptr<SubFn>> subs;
  std::vector<LinTerm> inner_lin;
  std::vector<LinTerm> outer_lin;
  double outer_const = 0;

  void finalize(); // computes the support set; call once after filling fields

  const std::vector<int>& support() const { return support_; }
  double value(const VecX& x) const;
  // Fills grad over support() order; returns the value.
  double value_grad(const VecX& x, double* grad) const;
  // Adds w * Hessian into dense H (uses analytic sub-Hessians when
  // available, finite differences of sub-gradients otherwise).
  void add_hessian(const VecX& x, double w, MatX& H) const;

 private:
  double inner_value(const VecX& x) const;
  std::vector<int> support_;
  std::vector<std::vector<int>> sub_pos_;  // per sub: positions of its vars in support_
  std::vector<int> ilin_pos_, olin_pos_;
};

struct LinearRow {
  std::vector<SmoothFn::LinTerm> terms;
  double rhs = 0;
  std::string label;
};

// Bookkeeping that mirrors the nominal complexity accounting: variables the
// formulation announces (including ones eliminated at build time) plus the
// constraint families the accounting counts. Structural rows (mobility,
// positivity guards, auxiliary caps) are tracked but not counted.
struct SizeAccounting {
  long nominal_vars = 0;
  long eliminated_vars = 0;        // pinned endpoints, masked shares
  long counted_constraints = 0;
  long auxiliary_constraints = 0;
  long nominal_size() const { return nominal_vars + counted_constraints; }
};

struct ConvexSubproblem {
  std::string name;
  int num_vars = 0;
  VecX lo, hi;        // box bounds (entries may be +-inf)
  VecX x0;            // warm start supplied by the builder (in-domain)
  VecX var_scale;     // natural magnitudes for solver preconditioning
  VecX cost;          // linear objective
  int epigraph_var = -1;
  std::vector<LinearRow> linear;
  std::vector<std::unique_ptr<SmoothFn>> smooth;
  SizeAccounting acct;

  double linear_value(int row, const VecX& x) const;  // a'x - b (<= 0 feasible)
  // Largest normalized violation over rows, smooth functions and box
  // bounds; +infinity if any smooth function is out of domain.
  double max_violation(const VecX& x) const;
};

// --- concrete sub-functions used by the builders ---------------------------

// c * ||q_a - q_b||^2 over vars (ax, ay, bx, by)
class SqDiffFn : public SubFn {
 public:
  SqDiffFn(std::vector<int> vars, double c) : SubFn(std::move(vars)), c_(c) {}
  double value(const double* x) const override;
  void grad(const double* x, double* g) const override;
  bool hess(const double* x, double* h) const override;

 private:
  double c_;
};

// c * ||q - g||^2 over vars (qx, qy)
class SqToPointFn : public SubFn {
 public:
  SqToPointFn(std::vector<int> vars, double c, double gx, double gy)
      : SubFn(std::move(vars)), c_(c), gx_(gx), gy_(gy) {}
  double value(const double* x) const override;
  void grad(const double* x, double* g) const override;
  bool hess(const double* x, double* h) const override;

 private:
  double c_, gx_, gy_;
};

// c / x over a single positive variable
class RecipFn : public SubFn {
 public:
  RecipFn(int var, double c) : SubFn({var}), c_(c) {}
  double value(const double* x) const override;
  void grad(const double* x, double* g) const override;
  bool hess(const double* x, double* h) const override;

 private:
  double c_;
};

// c2 / x^2 + c1 / x over a single positive variable
class InvPolyFn : public SubFn {
 public:
  InvPolyFn(int var, double c2, double c1) : SubFn({var}), c2_(c2), c1_(c1) {}
  double value(const double* x) const override;
  void grad(const double* x, double* g) const override;
  bool hess(const double* x, double* h) const override;

 private:
  double c2_, c1_;
};

// -c * sqrt(A - B ||q - g||^2) over vars (qx, qy); domain A - B||.||^2 > 0
class NegSqrtRadialFn : public SubFn {
 public:
  NegSqrtRadialFn(std::vector<int> vars, double c, double A, double B, double gx, double gy)
      : SubFn(std::move(vars)), c_(c), A_(A), B_(B), gx_(gx), gy_(gy) {}
  double value(const double* x) const override;
  void grad(const double* x, double* g) const override;
  bool hess(const double* x, double* h) const override;

 private:
  double c_, A_, B_, gx_, gy_;
};

// Per-slot concave rate lower bound over vars (qx, qy, u):
//   R = bits_scale * ln(1 + 2 rho sqrt(A - B||q-g||^2)
//                        - rho^2 (c2/u^2 + c1/u + psi_const))
// With a pinned slot position the vars shrink to (u) and fixed_sq carries
// the frozen ||q-g||^2.
class RateLbSlotFn : public SubFn {
 public:
  struct Params {
    double bits_scale;  // bandwidth / ln 2
    double rho;
    double A, B, gx, gy;  // signal bound coefficients (device position)
    double c2, c1, psi_const;
    double fixed_sq = 0;  // used when the position is pinned
  };
  RateLbSlotFn(std::vector<int> vars, Params p)
      : SubFn(std::move(vars)), p_(p), pinned_(this->vars().size() == 1) {}
  double value(const double* x) const override;
  void grad(const double* x, double* g) const override;

 private:
  Params p_;
  bool pinned_;
};

// Per-slot convex rate upper bound over vars (qx, qy, e):
//   R = bits_scale * ((1 - mu)/omega - (mu + ln(1-mu)))
//   omega = 2 nu sqrt(A - B||q-g||^2) - nu^2 ck / e
// Vars shrink to (e) when the slot position is pinned.
class RateUbSlotFn : public SubFn {
 public:
  struct Params {
    double bits_scale;
    double mu, nu;
    double A, B, gx, gy;  // interference-floor bound coefficients (target position)
    double ck;            // lambda_k
    double fixed_sq = 0;
  };
  RateUbSlotFn(std::vector<int> vars, Params p)
      : SubFn(std::move(vars)), p_(p), pinned_(this->vars().size() == 1) {}
  double value(const double* x) const override;
  void grad(const double* x, double* g) const override;

 private:
  Params p_;
  bool pinned_;
};

// Exact per-slot rate as a function of transmit power (convex, 1 var):
//   R = bits_scale * (ln(kappa + zeta p + n0) - ln(zeta p + n0))
class RateExactPowerFn : public SubFn {
 public:
  RateExactPowerFn(int var, double bits_scale, double kappa, double zeta, double n0)
      : SubFn({var}), bs_(bits_scale), kappa_(kappa), zeta_(zeta), n0_(n0) {}
  double value(const double* x) const override;
  void grad(const double* x, double* g) const override;
  bool hess(const double* x, double* h) const override;

 private:
  double bs_, kappa_, zeta_, n0_;
};

} // namespace uavisac::opt
