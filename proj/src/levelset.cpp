#include "pss/levelset.hpp"

#include <algorithm>
#include <cmath>

#include "pss/errors.hpp"

namespace pss {
namespace {

constexpr int kBisectionCap = 200;
constexpr int kBracketCap = 200;

// Next bracket candidate moving outwards from r, staying inside (0, kappa).
double step_out(double r, double kappa) {
  return std::isfinite(kappa) ? std::min(2.0 * r, 0.5 * (r + kappa)) : 2.0 * r;
}

// Bisection on a bracket [lo, hi] where pred(lo) != pred(hi). Returns the
// final bracket so the caller can pick the side it needs.
template <class Pred>
std::pair<double, double> bisect(double lo, double hi, Pred inside_at_hi) {
  for (int i = 0; i < kBisectionCap; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (inside_at_hi(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= 1e-15 * hi) break;
  }
  return {lo, hi};
}

}  // namespace

double mode_radius(const RadialTarget& target, const RadialFactorization& fac) {
  const double a = fac.alpha();
  auto slope = [&](double r) { return a / r - target.dphi(r); };  // d/dr log h
  const double r0 = std::isfinite(target.kappa) ? std::min(1e-8, 1e-8 * target.kappa) : 1e-8;
  if (!(slope(r0) > 0.0)) return 0.0;

  double lo = r0;
  double hi = r0;
  int it = 0;
  for (; it < kBracketCap; ++it) {
    hi = step_out(hi, target.kappa);
    if (!(slope(hi) > 0.0)) break;
    lo = hi;
  }
  if (it == kBracketCap) {
    throw NoRootError("mode_radius: profile still increasing after bracket expansion");
  }
  // slope > 0 at lo, <= 0 at hi
  auto [l, h] = bisect(lo, hi, [&](double r) { return !(slope(r) > 0.0); });
  return 0.5 * (l + h);
}

double sup_log_h(const RadialTarget& target, const RadialFactorization& fac) {
  const double mode = mode_radius(target, fac);
  if (mode > 0.0) return log_h(target, fac, mode);
  const double origin = std::isfinite(target.kappa) ? 1e-12 * target.kappa : 1e-12;
  return log_h(target, fac, origin);
}

LevelInterval level_interval(const RadialTarget& target, const RadialFactorization& fac,
                             LogLevel log_t) {
  const double mode = mode_radius(target, fac);
  const double sup = mode > 0.0 ? log_h(target, fac, mode) : sup_log_h(target, fac);
  return level_interval(target, fac, log_t, mode, sup);
}

LevelInterval level_interval(const RadialTarget& target, const RadialFactorization& fac,
                             LogLevel log_t, double mode, double sup) {
  if (!std::isfinite(log_t.value) || !(log_t.value < sup)) {
    throw EmptyLevelError("level_interval: level at or above the profile supremum");
  }
  auto inside = [&](double r) { return log_h(target, fac, r) > log_t.value; };

  // Lower branch on (0, mode]. Both returned ends are chosen on the inside of
  // the level so every radius in [r_lo, r_hi] belongs to the super level set.
  double r_lo = 0.0;
  if (mode > 0.0 && !inside(std::ldexp(mode, -60))) {
    double lo = 0.5 * mode;
    while (inside(lo)) lo *= 0.5;
    r_lo = bisect(lo, std::min(2.0 * lo, mode), inside).second;
  }

  // Upper branch on [mode, kappa).
  double lo = mode;
  double hi = mode > 0.0 ? step_out(mode, target.kappa) : std::min(1.0, 0.5 * target.kappa);
  int it = 0;
  while (inside(hi)) {
    lo = hi;
    hi = step_out(hi, target.kappa);
    if (++it > 4 * kBracketCap) {
      throw NoRootError("level_interval: upper bracket expansion failed");
    }
  }
  const double r_hi = bisect(lo, hi, [&](double r) { return !inside(r); }).first;
  return {r_lo, std::max(r_hi, r_lo)};
}

double log_level_measure(const LevelInterval& iv, const RadialFactorization& fac) {
  if (!(iv.r_hi > iv.r_lo)) return -kInf;
  const double m = fac.radial_exponent();
  double out = log_surface_area(fac.dim()) - std::log(m) + m * std::log(iv.r_hi);
  if (iv.r_lo > 0.0) {
    out += std::log1p(-std::exp(m * (std::log(iv.r_lo) - std::log(iv.r_hi))));
  }
  return out;
}

double ell_log_eval(const RadialTarget& target, const RadialFactorization& fac, LogLevel log_t) {
  const double mode = mode_radius(target, fac);
  const double sup = mode > 0.0 ? log_h(target, fac, mode) : sup_log_h(target, fac);
  if (!(log_t.value < sup)) return -kInf;
  return log_level_measure(level_interval(target, fac, log_t, mode, sup), fac);
}

double ell_eval(const RadialTarget& target, const RadialFactorization& fac, LogLevel log_t) {
  return std::exp(ell_log_eval(target, fac, log_t));
}

LevelSetFunction::LevelSetFunction(LogEval log_ell, double support_sup, double log_limit,
                                   std::string label)
    : log_ell_(std::move(log_ell)),
      support_sup_(support_sup),
      log_limit_(log_limit),
      label_(std::move(label)) {
  if (!log_ell_) throw DomainError("level-set function needs an evaluator");
  if (std::isnan(support_sup_)) throw DomainError("level-set support must be a number");
}

double LevelSetFunction::log_value(LogLevel t) const {
  if (t.value >= support_sup_) return -kInf;
  return log_ell_(t.value);
}

double LevelSetFunction::value(LogLevel t) const { return std::exp(log_value(t)); }

LevelSetFunction make_level_set_function(const RadialTarget& target,
                                         const RadialFactorization& fac) {
  const double mode = mode_radius(target, fac);
  const double sup = mode > 0.0 ? log_h(target, fac, mode) : sup_log_h(target, fac);
  const double m = fac.radial_exponent();
  const double log_limit = std::isfinite(target.kappa)
                               ? log_surface_area(fac.dim()) - std::log(m) + m * std::log(target.kappa)
                               : kInf;
  auto eval = [target, fac, mode, sup](double log_t) {
    if (!(log_t < sup)) return -kInf;
    return log_level_measure(level_interval(target, fac, LogLevel{log_t}, mode, sup), fac);
  };
  return LevelSetFunction(std::move(eval), sup, log_limit,
                          target.name + "/alpha=" + std::to_string(fac.alpha()));
}

MassCutoff lower_mass_cutoff(const LevelSetFunction& ell, double mass_tol) {
  if (!(mass_tol > 0.0 && mass_tol < 1.0)) throw DomainError("mass tolerance must be in (0,1)");
  // March down the log-t axis on log f(u) = log ell(e^u) + u, the density of
  // pi~ in u = log t, until it is 50 log-units below its running maximum.
  constexpr double kStep = 0.01;
  constexpr int kMaxSteps = 5'000'000;
  const double top = ell.support_sup();
  std::vector<double> lf;
  double best = -kInf;
  std::size_t best_at = 0;
  for (int k = 0;; ++k) {
    if (k >= kMaxSteps) throw NumericError("lower_mass_cutoff: tail does not decay");
    const double u = top - (k + 0.5) * kStep;
    const double v = ell.log_value(LogLevel{u}) + u;
    if (std::isnan(v)) throw NumericError("lower_mass_cutoff: level-set function returned NaN");
    lf.push_back(v);
    if (v > best) {
      best = v;
      best_at = lf.size() - 1;
    }
    if (std::isfinite(best) && lf.size() > best_at + 10 && v < best - 50.0) break;
    if (!std::isfinite(best) && k > 1000) {
      throw DomainError("lower_mass_cutoff: level-set function vanishes below its support end");
    }
  }
  const std::size_t n = lf.size();
  std::vector<double> tail(n);  // unnormalized mass below point k
  tail[n - 1] = std::exp(lf[n - 1] - best) * 1.0;
  for (std::size_t k = n - 1; k-- > 0;) {
    tail[k] = tail[k + 1] + 0.5 * kStep * (std::exp(lf[k] - best) + std::exp(lf[k + 1] - best));
  }
  const double total = tail[0] + 0.5 * kStep * std::exp(lf[0] - best);
  auto u_at = [&](std::size_t k) { return top - (k + 0.5) * kStep; };
  auto tail_at = [&](double u) {
    const double pos = (top - u) / kStep - 0.5;
    if (pos <= 0.0) return tail[0] / total;
    if (pos >= n - 1.0) return tail[n - 1] / total;
    const auto k = static_cast<std::size_t>(pos);
    const double w = pos - k;
    return ((1.0 - w) * tail[k] + w * tail[k + 1]) / total;
  };
  double lo = u_at(n - 1);
  double hi = u_at(0);
  if (tail_at(hi) <= mass_tol) return {hi, tail_at(hi)};
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (tail_at(mid) > mass_tol ? hi : lo) = mid;
  }
  return {lo, tail_at(lo)};
}

ProbeGrid default_probe_grid(const LevelSetFunction& ell, int n) {
  const double lo = lower_mass_cutoff(ell, 1e-8).log_t_min;
  const double sup = ell.support_sup();
  return {lo, sup - 1e-6 * (sup - lo), n};
}

MembershipReport lambda_k_check(const LevelSetFunction& ell, int k, const ProbeGrid& probe) {
  if (k < 1) throw DomainError("lambda_k_check: k must be a positive integer");
  if (probe.n < 100) throw DomainError("lambda_k_check: probe grid needs at least 100 points");
  if (!(probe.log_t_lo < probe.log_t_hi) || !(probe.log_t_hi < ell.support_sup())) {
    throw DomainError("lambda_k_check: probe grid outside the open support");
  }
  MembershipReport report;
  report.k = k;
  auto flag = [&report](double at, const char* what, double magnitude) {
    report.passed = false;
    report.violations.push_back({at, what, magnitude});
  };

  const int n = probe.n;
  std::vector<double> u(n), lv(n);
  double top = -kInf;
  for (int i = 0; i < n; ++i) {
    u[i] = probe.log_t_lo + (probe.log_t_hi - probe.log_t_lo) * i / (n - 1);
    lv[i] = ell.log_value(LogLevel{u[i]});
    if (!(lv[i] > -kInf)) throw DomainError("lambda_k_check: probe point outside the support");
    top = std::max(top, lv[i]);
  }

  // (i) vanishing at the support end, positive limit at t -> 0
  const double sup = ell.support_sup();
  if (ell.log_value(LogLevel{sup}) > -kInf) flag(sup, "limit_at_support_end", 1.0);
  const double near = sup - 1e-10 * std::max(1.0, std::abs(sup));
  const double ratio = std::exp(ell.log_value(LogLevel{near}) - top);
  if (ratio > 1e-3) flag(near, "limit_at_support_end", ratio);
  if (!(ell.log_limit() > -kInf)) flag(probe.log_t_lo, "limit_at_zero", 0.0);

  // (ii) strictly decreasing in t
  const double slack = std::log1p(1e-10);
  for (int i = 0; i + 1 < n; ++i) {
    const double drop = lv[i] - lv[i + 1];
    if (!(drop > slack)) flag(u[i + 1], "strict_decrease", slack - drop);
  }

  // (iii) s -> ell(e^{-s})^{1/k} concave; normalized so the maximum is 1
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = std::exp((lv[i] - top) / k);
  for (int i = 1; i + 1 < n; ++i) {
    const double second = g[i - 1] - 2.0 * g[i] + g[i + 1];
    if (second > 1e-8) flag(u[i], "concavity", second);
  }
  return report;
}

double canonical_inverse_phi(const LevelSetFunction& ell, int k, double s) {
  if (k < 1) throw DomainError("canonical_inverse_phi: k must be positive");
  if (std::isnan(s) || s < -ell.support_sup()) {
    throw DomainError("canonical_inverse_phi: potential level outside the domain");
  }
  const double lv = ell.log_value(LogLevel{-s});
  if (!(lv > -kInf)) return 0.0;
  return std::exp((std::log(static_cast<double>(k)) + lv - log_surface_area(k)) / k);
}

double canonical_phi(const LevelSetFunction& ell, int k, double r) {
  if (k < 1) throw DomainError("canonical_phi: k must be positive");
  if (!(r > 0.0)) throw DomainError("canonical_phi: radius must be positive");
  const double target = log_surface_area(k) - std::log(static_cast<double>(k)) + k * std::log(r);
  if (!(target < ell.log_limit())) throw DomainError("canonical_phi: radius beyond the comparator support");
  const double sup = ell.support_sup();
  double hi = sup;
  double step = 1.0;
  double lo = sup - step;
  int it = 0;
  while (!(ell.log_value(LogLevel{lo}) > target)) {
    hi = lo;
    step *= 2.0;
    lo = sup - step;
    if (++it > kBracketCap) throw NoRootError("canonical_phi: bracket expansion failed");
  }
  for (int i = 0; i < kBisectionCap; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    (ell.log_value(LogLevel{mid}) > target ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(lo))) break;
  }
  return -0.5 * (lo + hi);
}

}  // namespace pss
