#include "pss/operator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include "pss/errors.hpp"

namespace pss {
namespace {

struct GaussRule {
  std::vector<double> x;  // nodes on (-1, 1)
  std::vector<double> w;
};

GaussRule gauss_legendre(int n) {
  GaussRule rule{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.x[i] = -z;
    rule.x[n - 1 - i] = z;
    rule.w[i] = rule.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

// Composite Simpson on [a, b] with an even number of intervals.
double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + h * i);
  return acc * h / 3.0;
}

}  // namespace

TGrid make_t_grid(std::vector<double> boundaries) {
  if (boundaries.size() < 2) throw DomainError("t-grid needs at least one cell");
  for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
    if (!(boundaries[i] < boundaries[i + 1])) throw DomainError("t-grid boundaries must increase");
  }
  TGrid grid;
  grid.boundaries = std::move(boundaries);
  grid.nodes.resize(grid.boundaries.size() - 1);
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    grid.nodes[i] = 0.5 * (grid.boundaries[i] + grid.boundaries[i + 1]);
  }
  return grid;
}

TGrid build_t_grid(const LevelSetFunction& ell, int n, double mass_tol) {
  if (n < 2) throw DomainError("build_t_grid: need at least two cells");
  const auto cut = lower_mass_cutoff(ell, mass_tol);
  const double lo = cut.log_t_min;
  const double hi = ell.support_sup();
  std::vector<double> b(n + 1);
  for (int i = 0; i <= n; ++i) b[i] = lo + (hi - lo) * i / n;
  b[n] = hi;
  TGrid grid = make_t_grid(std::move(b));
  grid.truncation_mass = cut.truncated_mass;
  grid.mass_tol = mass_tol;
  return grid;
}

std::vector<double> stationary_weights(const LevelSetFunction& ell, const TGrid& grid) {
  constexpr int kSub = 8;
  constexpr int kTopSub = 128;
  const int n = grid.size();
  const auto& ub = grid.boundaries;
  const double sup = ell.support_sup();
  // ell behaves like sqrt(sup - u) at the support end, so the top cell is
  // integrated in w with u = top - w^2.
  auto subs = [&](int j) { return j == n - 1 ? kTopSub : kSub; };
  auto node = [&](int j, int k) {
    if (j == n - 1) {
      const double w = std::sqrt(ub[n] - ub[n - 1]) * (1.0 - static_cast<double>(k) / kTopSub);
      return ub[n] - w * w;
    }
    return k == kSub ? ub[j + 1] : ub[j] + (ub[j + 1] - ub[j]) * k / kSub;
  };
  std::vector<std::vector<double>> lf(n);
  double top = -kInf;
  for (int j = 0; j < n; ++j) {
    if (ub[j] >= sup) continue;  // no mass above the support
    lf[j].resize(subs(j) + 1);
    for (int k = 0; k <= subs(j); ++k) {
      const double u = node(j, k);
      lf[j][k] = ell.log_value(LogLevel{u}) + u;
      top = std::max(top, lf[j][k]);
    }
  }
  if (!std::isfinite(top)) throw DomainError("stationary_weights: degenerate support, zero mass");
  std::vector<double> w(n, 0.0);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    if (lf[j].empty()) continue;
    const bool last = j == n - 1;
    const int m = subs(j);
    const double h = (last ? std::sqrt(ub[n] - ub[n - 1]) : ub[j + 1] - ub[j]) / m;
    double acc = 0.0;
    for (int k = 0; k <= m; ++k) {
      const double coef = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      // du = 2 w dw on the top cell
      const double jac = last ? 2.0 * std::sqrt(ub[n] - node(j, k)) : 1.0;
      acc += coef * jac * std::exp(lf[j][k] - top);
    }
    w[j] = acc * h / 3.0;
    total += w[j];
  }
  if (!(total > 0.0)) throw DomainError("stationary_weights: degenerate support, zero mass");
  for (auto& x : w) x /= total;
  return w;
}

DiscreteKernel discretize_pt(const LevelSetFunction& ell, const TGrid& grid, int refine) {
  if (refine < 1) throw DomainError("discretize_pt: refinement must be positive");
  const int n = grid.size();
  const auto& ub = grid.boundaries;
  const double top = ub.back();
  if (top < ell.support_sup()) {
    throw DomainError("discretize_pt: grid must reach the support end of ell");
  }

  // ell on the refinement grid, scaled by its largest value
  const std::size_t np = static_cast<std::size_t>(n) * refine + 1;
  std::vector<double> v(np), lv(np);
  double lref = -kInf;
  // geometric in t, except for quadratic grading towards the support end of
  // the top cell where ell has a square-root edge
  auto sub = [&](int j, double k) {
    if (j == n - 1) {
      const double f = 1.0 - k / refine;
      return top - (top - ub[j]) * f * f;
    }
    return ub[j] + (ub[j + 1] - ub[j]) * k / refine;
  };
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < refine; ++k) v[static_cast<std::size_t>(j) * refine + k] = sub(j, k);
  }
  v[np - 1] = top;
  for (std::size_t p = 0; p < np; ++p) {
    lv[p] = ell.log_value(LogLevel{v[p]});
    if (std::isnan(lv[p])) throw InvalidLevelSetError("discretize_pt: ell returned NaN");
    lref = std::max(lref, lv[p]);
  }
  if (!std::isfinite(lref)) throw DomainError("discretize_pt: ell vanishes on the grid");

  // d(-ell) on each subinterval; must be nonnegative
  std::vector<double> dl(np - 1), mid(np - 1);
  for (std::size_t p = 0; p + 1 < np; ++p) {
    const double a = std::exp(lv[p] - lref);
    const double b = std::exp(lv[p + 1] - lref);
    const double diff = a - b;
    if (diff < -1e-9 * std::max(a, b)) {
      throw InvalidLevelSetError("discretize_pt: ell increases near log t = " + std::to_string(v[p]));
    }
    dl[p] = std::max(diff, 0.0);
    mid[p] = 0.5 * (v[p] + v[p + 1]);
  }
  for (int k = 0; k < refine; ++k) mid[static_cast<std::size_t>(n - 1) * refine + k] = sub(n - 1, k + 0.5);

  // Per-cell sums (scaled so the top of the grid is s = 1):
  //   part[j] = sum_{s in C_j} dl (s - tau_j)/s,  diag[j] = sum_{s in C_j} dl (s - tau_j)^2/s,
  //   inv[j]  = sum_{s in C_j} dl / s,            width[j] = |C_j|.
  std::vector<double> part(n, 0.0), diag(n, 0.0), inv(n, 0.0), width(n);
  for (int j = 0; j < n; ++j) {
    width[j] = j == 0 ? std::exp(ub[1] - top)
                      : std::exp(ub[j] - top) * std::expm1(ub[j + 1] - ub[j]);
    for (int k = 0; k < refine; ++k) {
      const std::size_t p = static_cast<std::size_t>(j) * refine + k;
      const double s = std::exp(mid[p] - top);
      const double frac = j == 0 ? 1.0 : -std::expm1(ub[j] - mid[p]);  // (s - tau_j) / s
      part[j] += dl[p] * frac;
      diag[j] += dl[p] * frac * frac * s;
      inv[j] += dl[p] / s;
    }
  }
  std::vector<double> above(n + 1, 0.0);  // sum over s beyond cell j of dl / s
  for (int j = n - 1; j >= 0; --j) above[j] = above[j + 1] + inv[j];

  Eigen::MatrixXd q(n, n);
  for (int j = 0; j < n; ++j) {
    const double fj = part[j] + width[j] * above[j + 1];
    for (int i = 0; i < j; ++i) {
      q(i, j) = width[i] * fj;
      q(j, i) = q(i, j);
    }
    q(j, j) = diag[j] + width[j] * width[j] * above[j + 1];
  }

  Eigen::VectorXd rows = q.rowwise().sum();
  const double total = rows.sum();
  if (!(total > 0.0)) throw DomainError("discretize_pt: zero total mass");

  DiscreteKernel kernel;
  kernel.grid = grid;
  kernel.weights = rows / total;
  const auto simpson_w = stationary_weights(ell, grid);
  double defect = 0.0;
  for (int i = 0; i < n; ++i) defect += std::abs(kernel.weights[i] - simpson_w[i]);
  kernel.row_defect = defect;

  for (int i = 0; i < n; ++i) {
    if (rows[i] > 0.0) {
      q.row(i) /= rows[i];
    } else {
      q.row(i).setZero();
      q(i, i) = 1.0;
    }
  }
  kernel.matrix = std::move(q);
  return kernel;
}

double kernel_probability(const LevelSetFunction& ell, LogLevel t, double log_b_lo,
                          double log_b_hi, int subintervals) {
  const double sup = ell.support_sup();
  const double lt = ell.log_value(t);
  if (!(lt > -kInf)) throw DomainError("kernel_probability: level outside the support of ell");
  if (!(log_b_lo < log_b_hi)) return 0.0;

  std::vector<double> breaks{t.value, sup};
  for (double b : {log_b_lo, log_b_hi}) {
    if (b > t.value && b < sup) breaks.push_back(b);
  }
  std::sort(breaks.begin(), breaks.end());
  const double span = sup - t.value;

  // g_B(s) = lambda(B cap (0, s)) / s
  auto g = [&](double u) {
    const double upper = std::min(1.0, std::exp(log_b_hi - u));
    const double lower = std::exp(log_b_lo - u);
    return std::max(0.0, upper - lower);
  };
  double acc = 0.0;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double a = breaks[b];
    const double c = breaks[b + 1];
    const int m = std::max(16, static_cast<int>(std::lround(subintervals * (c - a) / span)));
    const double h = (c - a) / m;
    double prev = 1.0 * std::exp(ell.log_value(LogLevel{a}) - lt);
    for (int k = 1; k <= m; ++k) {
      const double u = k == m ? c : a + h * k;
      const double cur = std::exp(ell.log_value(LogLevel{u}) - lt);
      acc += (prev - cur) * g(a + h * (k - 0.5));
      prev = cur;
    }
  }
  return acc;
}

GapEstimate spectral_gap(const DiscreteKernel& kernel) {
  const auto& m = kernel.matrix;
  const auto& w = kernel.weights;
  const int n = static_cast<int>(w.size());
  if (m.rows() != n || m.cols() != n) throw DomainError("spectral_gap: shape mismatch");

  const double wmax = w.maxCoeff();
  std::vector<int> active;
  for (int i = 0; i < n; ++i) {
    if (w[i] > 1e-200 * wmax) active.push_back(i);
  }
  const int k = static_cast<int>(active.size());
  Eigen::VectorXd root(k);
  for (int a = 0; a < k; ++a) root[a] = std::sqrt(w[active[a]]);

  // A = D^{1/2} M D^{-1/2} - sqrt(w) sqrt(w)^T, symmetrized
  Eigen::MatrixXd a(k, k);
  for (int c = 0; c < k; ++c) {
    for (int r = c; r < k; ++r) {
      const double upper = root[r] / root[c] * m(active[r], active[c]);
      const double lower = root[c] / root[r] * m(active[c], active[r]);
      a(r, c) = 0.5 * (upper + lower) - root[r] * root[c];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("spectral_gap: eigensolver failed");
  const auto& ev = solver.eigenvalues();

  GapEstimate est;
  est.lambda2 = ev[k - 1];
  est.lambda_min = ev[0];
  est.gap = 1.0 - est.lambda2;
  est.grid_size = n;
  est.truncation_mass = kernel.grid.truncation_mass;
  est.refinement_delta = std::numeric_limits<double>::quiet_NaN();
  est.psd_warning = est.lambda_min < -1e-8;
  return est;
}

GapEstimate certify_gap(const LevelSetFunction& ell, const GapOptions& opts) {
  auto at = [&](int n) {
    return spectral_gap(discretize_pt(ell, build_t_grid(ell, n, opts.mass_tol), opts.refine));
  };
  GapEstimate est = at(opts.grid_size);
  if (opts.check_refinement) {
    const GapEstimate fine = at(2 * opts.grid_size);
    est.refinement_delta = std::abs(est.gap - fine.gap);
    est.converged = est.refinement_delta <= opts.refinement_tol;
  }
  return est;
}

DualityReport duality_gap_compare(const LevelSetFunction& ell_a, const LevelSetFunction& ell_b,
                                  const GapOptions& opts, int probes) {
  TGrid grid = build_t_grid(ell_a, opts.grid_size, opts.mass_tol);
  // the supports may differ by the rounding of their numerical suprema
  if (ell_b.support_sup() > grid.boundaries.back()) {
    const double lo = grid.boundaries.front();
    const double hi = ell_b.support_sup();
    const int n = grid.size();
    for (int i = 0; i <= n; ++i) grid.boundaries[i] = lo + (hi - lo) * i / n;
    grid.boundaries[n] = hi;
    const double mass = grid.truncation_mass;
    grid = make_t_grid(std::move(grid.boundaries));
    grid.truncation_mass = mass;
    grid.mass_tol = opts.mass_tol;
  }
  DualityReport out;
  const double lo = grid.boundaries.front();
  const double hi = grid.boundaries.back();
  for (int k = 0; k < probes; ++k) {
    const LogLevel u{lo + (hi - lo) * (k + 0.5) / probes};
    const double a = ell_a.value(u);
    const double b = ell_b.value(u);
    const double diff = std::abs(a - b);
    out.max_abs_ell_diff = std::max(out.max_abs_ell_diff, diff);
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale > 0.0) out.max_rel_ell_diff = std::max(out.max_rel_ell_diff, diff / scale);
  }
  out.gap_a = spectral_gap(discretize_pt(ell_a, grid, opts.refine)).gap;
  out.gap_b = spectral_gap(discretize_pt(ell_b, grid, opts.refine)).gap;
  out.gap_diff = std::abs(out.gap_a - out.gap_b);
  return out;
}

AdjointnessReport adjointness_check(const RadialTarget& target, const RadialFactorization& fac,
                                    const AdjointnessOptions& opts) {
  const double mode = mode_radius(target, fac);
  const double sup = mode > 0.0 ? log_h(target, fac, mode) : sup_log_h(target, fac);
  const double m = fac.radial_exponent();

  using Fn = std::function<double(double)>;
  const std::array<Fn, 4> gs = {[](double) { return 1.0; }, [](double s) { return s; },
                                [](double s) { return s * s; }, [](double s) { return std::sin(s); }};
  const std::array<Fn, 4> hs = {[](double) { return 1.0; }, [](double r) { return r; },
                                [](double r) { return r * r; }, [](double r) { return std::exp(-r); }};
  const GaussRule gl = gauss_legendre(16);

  // -- radial route: E_pi[ (U_T g)(X) h(X) ] ---------------------------------
  const auto radial = RadialFactorization::pss(fac.dim());
  const double rsup = sup_log_h(target, radial);
  const auto span = level_interval(target, radial, LogLevel{rsup - 80.0});
  auto log_dens_r = [&](double r) { return log_h(target, radial, std::max(r, 1e-300)); };
  // (U_T g)(x) = (1/S) int_0^S g(s) ds with S = h_alpha(|x|) / sup h_alpha
  auto ut = [&](const Fn& g, double r) {
    const double big_s = std::exp(log_h(target, fac, std::max(r, 1e-300)) - sup);
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.x.size(); ++i) acc += gl.w[i] * g(0.5 * big_s * (gl.x[i] + 1.0));
    return 0.5 * acc;
  };
  auto radial_mean = [&](const Fn& f) {
    return simpson([&](double r) { return std::exp(log_dens_r(r) - rsup) * f(r); }, span.r_lo,
                   span.r_hi, opts.radial_points);
  };
  const double z_r = radial_mean([](double) { return 1.0; });

  // -- level route: E_pi~[ g(T) (U_X h)(T) ] ---------------------------------
  const auto cut = lower_mass_cutoff(make_level_set_function(target, fac), 1e-14);
  const double w_max = std::sqrt(sup - cut.log_t_min);
  // r_lo reaches the origin at u = lim_{r->0} log h_alpha when alpha = 0
  double w_kink = -1.0;
  if (fac.alpha() == 0.0 && mode > 0.0) {
    const double origin = log_h(target, fac, 1e-300);
    if (origin < sup && origin > cut.log_t_min) w_kink = std::sqrt(sup - origin);
  }
  // (U_X h)(t) = int_{r_lo}^{r_hi} h r^{m-1} dr / int r^{m-1} dr, composite Gauss
  auto ux = [&](const Fn& h, const LevelInterval& iv) {
    constexpr int kPanels = 8;
    const double width = (iv.r_hi - iv.r_lo) / kPanels;
    double num = 0.0, den = 0.0;
    for (int p = 0; p < kPanels; ++p) {
      const double a = iv.r_lo + width * p;
      for (std::size_t i = 0; i < gl.x.size(); ++i) {
        const double r = a + 0.5 * width * (gl.x[i] + 1.0);
        const double wt = gl.w[i] * std::exp((m - 1.0) * (std::log(r) - std::log(iv.r_hi)));
        num += wt * h(r);
        den += wt;
      }
    }
    return num / den;
  };
  auto log_f = [&](double u) {
    return log_level_measure(level_interval(target, fac, LogLevel{u}, mode, sup), fac) + u;
  };
  double lref = -kInf;
  for (int k = 1; k <= 256; ++k) {
    const double w = w_max * k / 257.0;
    lref = std::max(lref, log_f(sup - w * w));
  }
  // substitution u = sup - w^2 smooths the square-root behaviour of ell at the top
  auto level_mean = [&](const std::function<double(double, const LevelInterval&)>& f) {
    auto integrand = [&](double w) {
      if (w <= 0.0) return 0.0;
      const double u = sup - w * w;
      const auto iv = level_interval(target, fac, LogLevel{u}, mode, sup);
      const double dens = std::exp(log_level_measure(iv, fac) + u - lref);
      return 2.0 * w * dens * f(std::exp(u - sup), iv);
    };
    if (w_kink <= 0.0) return simpson(integrand, 0.0, w_max, opts.level_points);
    const int left = std::max(64, static_cast<int>(opts.level_points * w_kink / w_max));
    const int right = std::max(64, opts.level_points - left);
    return simpson(integrand, 0.0, w_kink, left) + simpson(integrand, w_kink, w_max, right);
  };
  const double z_t = level_mean([](double, const LevelInterval&) { return 1.0; });

  AdjointnessReport report;
  report.residuals.assign(gs.size(), std::vector<double>(hs.size(), 0.0));
  std::array<double, 4> g_norm{}, h_norm{};
  for (std::size_t j = 0; j < hs.size(); ++j) {
    h_norm[j] = std::sqrt(radial_mean([&](double r) { return hs[j](r) * hs[j](r); }) / z_r);
  }
  for (std::size_t i = 0; i < gs.size(); ++i) {
    g_norm[i] = std::sqrt(
        level_mean([&](double s, const LevelInterval&) { return gs[i](s) * gs[i](s); }) / z_t);
  }
  for (std::size_t i = 0; i < gs.size(); ++i) {
    for (std::size_t j = 0; j < hs.size(); ++j) {
      const double lhs = radial_mean([&](double r) { return ut(gs[i], r) * hs[j](r); }) / z_r;
      const double rhs =
          level_mean([&](double s, const LevelInterval& iv) { return gs[i](s) * ux(hs[j], iv); }) / z_t;
      const double res = std::abs(lhs - rhs) / (g_norm[i] * h_norm[j]);
      report.residuals[i][j] = res;
      report.max_residual = std::max(report.max_residual, res);
    }
  }
  return report;
}

}  // namespace pss
