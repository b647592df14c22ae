#include "pss/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "json.hpp"
#include "pss/errors.hpp"

namespace pss {
namespace {

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -kInf) return a;
  return a + std::log1p(std::exp(b - a));
}

void require_unit_open(double u, const char* who) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError(std::string(who) + ": uniform variate outside (0,1)");
}

struct ProfileCache {
  double mode;
  double sup;
};

ProfileCache profile(const RadialTarget& target, const RadialFactorization& fac) {
  const double mode = mode_radius(target, fac);
  return {mode, mode > 0.0 ? log_h(target, fac, mode) : sup_log_h(target, fac)};
}

void require_valid_radius(const RadialTarget& target, double r) {
  if (!(r > 0.0) || !(r < target.kappa) || !std::isfinite(r)) {
    throw DomainError("initial radius outside (0, kappa)");
  }
}

}  // namespace

LogLevel t_update(double log_h_x, double u) {
  require_unit_open(u, "t_update");
  const double v = log_h_x + std::log(u);
  // u close to 1 can round back onto log h(x); the level must stay below it
  return LogLevel{v < log_h_x ? v : std::nextafter(log_h_x, -kInf)};
}

double x_update_radius(const LevelInterval& iv, const RadialFactorization& fac, double u) {
  require_unit_open(u, "x_update_radius");
  if (!(iv.r_hi > iv.r_lo)) throw EmptyLevelError("x_update_radius: empty level interval");
  const double m = fac.radial_exponent();
  double r;
  if (m == 1.0) {
    r = iv.r_lo + u * (iv.r_hi - iv.r_lo);
  } else if (iv.r_lo == 0.0) {
    r = iv.r_hi * std::exp(std::log(u) / m);
  } else {
    // F^{-1}(u) = r_hi * (q + u (1 - q))^{1/m}, q = (r_lo / r_hi)^m
    const double log_q = m * (std::log(iv.r_lo) - std::log(iv.r_hi));
    const double inner = log_add_exp(std::log(u), log_q + std::log1p(-u));
    r = iv.r_hi * std::exp(inner / m);
  }
  return std::clamp(r, iv.r_lo, iv.r_hi);
}

double x_update_radius(const RadialTarget& target, const RadialFactorization& fac,
                       LogLevel log_t, double u) {
  return x_update_radius(level_interval(target, fac, log_t), fac, u);
}

std::vector<double> sample_direction(int d, Rng& rng) {
  if (d < 1) throw DomainError("sample_direction: dimension must be positive");
  std::vector<double> v(d);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm2 += x * x;
    }
  } while (!(norm2 > 0.0));
  if (d == 1) {
    v[0] = v[0] > 0.0 ? 1.0 : -1.0;
    return v;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;
  return v;
}

double default_initial_radius(const RadialTarget& target) {
  const double mode = mode_radius(target, RadialFactorization::pss(target.dim));
  return mode > 0.0 ? mode : 1.0;
}

Trace run_x_chain(const RadialTarget& target, const RadialFactorization& fac, std::int64_t n,
                  double init_radius, std::uint64_t seed, const TransitionObserver& observer) {
  require_valid_radius(target, init_radius);
  if (n < 0) throw DomainError("run_x_chain: negative step count");
  const auto prof = profile(target, fac);
  Rng rng(seed, 0);
  Trace trace;
  trace.seed = seed;
  trace.meta = {target.name, fac.alpha(), fac.dim(), n, "radius"};
  trace.values.reserve(static_cast<std::size_t>(n) + 1);
  double r = init_radius;
  trace.values.push_back(r);
  for (std::int64_t i = 0; i < n; ++i) {
    const LogLevel level = t_update(log_h(target, fac, r), rng.uniform());
    const LevelInterval iv = level_interval(target, fac, level, prof.mode, prof.sup);
    const double next = x_update_radius(iv, fac, rng.uniform());
    if (observer) observer({r, level, iv, next});
    r = next;
    trace.values.push_back(r);
  }
  return trace;
}

Trace run_x_chain_full(const RadialTarget& target, const RadialFactorization& fac,
                       std::int64_t n, double init_radius, std::uint64_t seed,
                       std::vector<double>* final_state) {
  require_valid_radius(target, init_radius);
  if (n < 0) throw DomainError("run_x_chain_full: negative step count");
  const int d = fac.dim();
  const auto prof = profile(target, fac);
  Rng rng(seed, 0);
  Rng dir_rng(seed, 1);
  std::vector<double> x = sample_direction(d, dir_rng);
  for (auto& c : x) c *= init_radius;
  auto norm = [&x] {
    double s = 0.0;
    for (double c : x) s += c * c;
    return std::sqrt(s);
  };
  Trace trace;
  trace.seed = seed;
  trace.meta = {target.name, fac.alpha(), d, n, "radius"};
  trace.values.reserve(static_cast<std::size_t>(n) + 1);
  trace.values.push_back(norm());
  for (std::int64_t i = 0; i < n; ++i) {
    const double r = norm();
    const LogLevel level = t_update(log_h(target, fac, r), rng.uniform());
    const LevelInterval iv = level_interval(target, fac, level, prof.mode, prof.sup);
    // mu_t factorizes into the radial law on [r_lo, r_hi] and a uniform direction
    const double radius = x_update_radius(iv, fac, rng.uniform());
    x = sample_direction(d, dir_rng);
    for (auto& c : x) c *= radius;
    trace.values.push_back(norm());
  }
  if (final_state) *final_state = x;
  return trace;
}

Trace run_t_chain(const RadialTarget& target, const RadialFactorization& fac, std::int64_t n,
                  LogLevel init_log_t, std::uint64_t seed) {
  if (n < 0) throw DomainError("run_t_chain: negative step count");
  const auto prof = profile(target, fac);
  if (!std::isfinite(init_log_t.value) || !(init_log_t.value < prof.sup)) {
    throw DomainError("run_t_chain: initial level outside the support of ell");
  }
  Rng rng(seed, 0);
  Trace trace;
  trace.seed = seed;
  trace.meta = {target.name, fac.alpha(), fac.dim(), n, "log_level"};
  trace.values.reserve(static_cast<std::size_t>(n) + 1);
  LogLevel level = init_log_t;
  trace.values.push_back(level.value);
  for (std::int64_t i = 0; i < n; ++i) {
    const LevelInterval iv = level_interval(target, fac, level, prof.mode, prof.sup);
    const double r = x_update_radius(iv, fac, rng.uniform());
    level = t_update(log_h(target, fac, r), rng.uniform());
    trace.values.push_back(level.value);
  }
  return trace;
}

GridInverseCdf::GridInverseCdf(double lo, double hi,
                               const std::function<double(double)>& log_density, int cells)
    : lo_(lo), hi_(hi), cdf_(static_cast<std::size_t>(cells) + 1, 0.0) {
  if (cells < 1 || !(hi > lo)) throw DomainError("GridInverseCdf: empty grid");
  const double h = (hi - lo) / cells;
  std::vector<double> lv(cells + 1);
  double top = -kInf;
  for (int i = 0; i <= cells; ++i) {
    lv[i] = log_density(lo + h * i);
    if (std::isnan(lv[i])) throw NumericError("GridInverseCdf: NaN log density");
    top = std::max(top, lv[i]);
  }
  if (!std::isfinite(top)) throw NumericError("GridInverseCdf: density vanishes on the grid");
  for (int i = 0; i < cells; ++i) {
    cdf_[i + 1] = cdf_[i] + 0.5 * h * (std::exp(lv[i] - top) + std::exp(lv[i + 1] - top));
  }
  const double total = cdf_.back();
  for (auto& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

double GridInverseCdf::sample(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return lo_;
  if (it == cdf_.end()) return hi_;
  const auto k = static_cast<std::size_t>(it - cdf_.begin()) - 1;
  const double h = (hi_ - lo_) / (cdf_.size() - 1);
  const double w = (u - cdf_[k]) / (cdf_[k + 1] - cdf_[k]);
  return lo_ + h * (k + w);
}

double GridInverseCdf::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  const double pos = (x - lo_) / (hi_ - lo_) * (cdf_.size() - 1);
  const auto k = std::min(static_cast<std::size_t>(pos), cdf_.size() - 2);
  const double w = pos - k;
  return (1.0 - w) * cdf_[k] + w * cdf_[k + 1];
}

namespace {

GridInverseCdf radial_grid(const RadialTarget& target, int cells) {
  const auto fac = RadialFactorization::pss(target.dim);
  const auto prof = profile(target, fac);
  const auto iv = level_interval(target, fac, LogLevel{prof.sup - 80.0}, prof.mode, prof.sup);
  auto log_density = [&](double r) { return log_h(target, fac, std::max(r, 1e-300)); };
  return GridInverseCdf(iv.r_lo, iv.r_hi, log_density, cells);
}

GridInverseCdf level_grid(const LevelSetFunction& ell, int cells, double mass_tol) {
  const auto cut = lower_mass_cutoff(ell, mass_tol);
  auto log_density = [&](double u) { return ell.log_value(LogLevel{u}) + u; };
  return GridInverseCdf(cut.log_t_min, ell.support_sup(), log_density, cells);
}

}  // namespace

RadialStationarySampler::RadialStationarySampler(const RadialTarget& target, int cells)
    : grid_(radial_grid(target, cells)) {}

double sample_radial_stationary(const RadialTarget& target, Rng& rng) {
  return RadialStationarySampler(target)(rng);
}

LevelStationarySampler::LevelStationarySampler(const LevelSetFunction& ell, int cells,
                                               double mass_tol)
    : grid_(level_grid(ell, cells, mass_tol)) {}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "step,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < trace.values.size(); ++i) out << i << ',' << trace.values[i] << '\n';
  nlohmann::json meta = {{"seed", trace.seed},          {"target", trace.meta.target},
                         {"alpha", trace.meta.alpha},   {"d", trace.meta.dim},
                         {"n", trace.meta.steps},       {"quantity", trace.meta.quantity}};
  std::ofstream side(path.string() + ".json");
  if (!side) throw std::runtime_error("cannot open sidecar for " + path.string());
  side << meta.dump(2) << '\n';
}

}  // namespace pss
