#pragma once

// Level intervals of the radial profile h_alpha(r) = r^alpha exp(-phi(r)) and
// the generalized level-set function
//   ell(t) = integral over {rho1 > t} of rho0(x) dx
//          = sigma_{d-1} / (d - alpha) * (r_hi^{d-alpha} - r_lo^{d-alpha}).
// Levels are always handled as log t.

#include <functional>
#include <string>
#include <vector>

#include "pss/targets.hpp"

namespace pss {

struct LogLevel {
  double value;
};

struct LevelInterval {
  double r_lo;
  double r_hi;
};

/// Radius maximizing h_alpha, i.e. the root of r phi'(r) = alpha (alpha > 0)
/// or the minimizer of phi (alpha = 0). Returns 0 when h_alpha is
/// non-increasing on all of (0, kappa). Throws NoRootError when the bracket
/// cannot be expanded.
double mode_radius(const RadialTarget& target, const RadialFactorization& fac);

/// sup log h_alpha: the value at the mode, or the limit at the origin.
double sup_log_h(const RadialTarget& target, const RadialFactorization& fac);

/// {r : log h_alpha(r) > log_t}. Throws EmptyLevelError when log_t >= sup_log_h.
LevelInterval level_interval(const RadialTarget& target, const RadialFactorization& fac,
                             LogLevel log_t);

/// Overload reusing a precomputed mode radius and supremum.
LevelInterval level_interval(const RadialTarget& target, const RadialFactorization& fac,
                             LogLevel log_t, double mode, double sup);

/// log ell(t); -inf on empty levels.
double ell_log_eval(const RadialTarget& target, const RadialFactorization& fac, LogLevel log_t);
double ell_eval(const RadialTarget& target, const RadialFactorization& fac, LogLevel log_t);

/// log of sigma/(d-alpha) * (r_hi^{d-alpha} - r_lo^{d-alpha}).
double log_level_measure(const LevelInterval& iv, const RadialFactorization& fac);

/// Abstract non-increasing level-set function, evaluated in log form.
class LevelSetFunction {
 public:
  using LogEval = std::function<double(double)>;

  /// `log_ell` maps log t to log ell(t) (-inf where ell vanishes);
  /// `support_sup` is log sup{t : ell(t) > 0}; `log_limit` is log of
  /// lim_{t -> 0} ell(t), possibly +inf.
  LevelSetFunction(LogEval log_ell, double support_sup, double log_limit,
                   std::string label = "custom");

  double log_value(LogLevel t) const;
  double value(LogLevel t) const;
  double support_sup() const { return support_sup_; }
  double log_limit() const { return log_limit_; }
  const std::string& label() const { return label_; }

 private:
  LogEval log_ell_;
  double support_sup_;
  double log_limit_;
  std::string label_;
};

LevelSetFunction make_level_set_function(const RadialTarget& target,
                                         const RadialFactorization& fac);

/// Lower end of the log-t axis below which the normalized mass of
/// pi~(dt) ~ ell(t) dt is at most `mass_tol`.
struct MassCutoff {
  double log_t_min;
  double truncated_mass;
};
MassCutoff lower_mass_cutoff(const LevelSetFunction& ell, double mass_tol);

// -- Lambda_k membership ---------------------------------------------------

struct ProbeGrid {
  double log_t_lo;
  double log_t_hi;
  int n = 200;
};

/// Probe grid covering the bulk of pi~ (mass cutoff 1e-8) and stopping just
/// below the support supremum.
ProbeGrid default_probe_grid(const LevelSetFunction& ell, int n = 200);

struct Violation {
  double log_t;
  std::string check;
  double magnitude;
};

struct MembershipReport {
  int k = 1;
  bool passed = true;
  std::vector<Violation> violations;
};

/// Checks (i) ell -> 0 at the support end and ell > 0 below it, (ii) strict
/// decrease, (iii) concavity of s -> ell(exp(-s))^{1/k}.
MembershipReport lambda_k_check(const LevelSetFunction& ell, int k, const ProbeGrid& probe);

/// Radius of the canonical k-dimensional comparator density at potential
/// level s: (k ell(e^{-s}) / sigma_{k-1})^{1/k}.
double canonical_inverse_phi(const LevelSetFunction& ell, int k, double s);

/// Forward canonical potential phi(r) = -log ell^{-1}(sigma_{k-1} r^k / k),
/// inverted numerically by bisection in log t.
double canonical_phi(const LevelSetFunction& ell, int k, double r);

}  // namespace pss
