#pragma once

// Slice sampling for radial targets, simulated in (log t, r) coordinates.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pss/levelset.hpp"
#include "pss/rng.hpp"
#include "pss/targets.hpp"

namespace pss {

struct ChainState {
  double radius;
  std::optional<LogLevel> log_level;
};

struct TraceMeta {
  std::string target;
  double alpha = 0.0;
  int dim = 1;
  std::int64_t steps = 0;
  std::string quantity = "radius";  // or "log_level"
};

struct Trace {
  std::vector<double> values;
  std::uint64_t seed = 0;
  TraceMeta meta;
};

/// Level draw t ~ Unif(0, h(x)) in log form: log h(x) + log u.
LogLevel t_update(double log_h_x, double u);

/// Inverse-CDF draw from the radial density proportional to r^{d-1-alpha}
/// on [r_lo, r_hi].
double x_update_radius(const LevelInterval& iv, const RadialFactorization& fac, double u);
double x_update_radius(const RadialTarget& target, const RadialFactorization& fac,
                       LogLevel log_t, double u);

/// Uniform direction on S^{d-1} (normalized standard Gaussian vector).
std::vector<double> sample_direction(int d, Rng& rng);

/// One X-transition as seen by an observer: the level drawn and the
/// interval the new radius was drawn from.
struct Transition {
  double radius_before;
  LogLevel log_level;
  LevelInterval interval;
  double radius_after;
};
using TransitionObserver = std::function<void(const Transition&)>;

/// Default starting radius: mode of the radial density r^{d-1} e^{-phi(r)},
/// or 1 when that mode is at the origin.
double default_initial_radius(const RadialTarget& target);

/// Radius-marginal X-chain; records |X_i| for i = 0..n.
Trace run_x_chain(const RadialTarget& target, const RadialFactorization& fac, std::int64_t n,
                  double init_radius, std::uint64_t seed,
                  const TransitionObserver& observer = {});

/// Full-vector X-chain in R^d. Radii use the same uniform stream as
/// run_x_chain, directions an independent one, so the radius traces agree
/// with the radius-marginal chain up to rounding in the vector norm.
Trace run_x_chain_full(const RadialTarget& target, const RadialFactorization& fac,
                       std::int64_t n, double init_radius, std::uint64_t seed,
                       std::vector<double>* final_state = nullptr);

/// Auxiliary T-chain; one step is an X-update followed by a T-update.
/// Records log T_i for i = 0..n.
Trace run_t_chain(const RadialTarget& target, const RadialFactorization& fac, std::int64_t n,
                  LogLevel init_log_t, std::uint64_t seed);

/// Piecewise-linear CDF tabulated on a uniform grid from a log-density.
class GridInverseCdf {
 public:
  GridInverseCdf(double lo, double hi, const std::function<double(double)>& log_density,
                 int cells);

  double sample(double u) const;
  double cdf(double x) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& table() const { return cdf_; }

 private:
  double lo_;
  double hi_;
  std::vector<double> cdf_;
};

/// I.i.d. radii with density proportional to r^{d-1} e^{-phi(r)}; grid of
/// 2^14 cells between the points where the log density is 80 units below
/// its maximum.
class RadialStationarySampler {
 public:
  explicit RadialStationarySampler(const RadialTarget& target, int cells = 1 << 14);
  double operator()(Rng& rng) const { return grid_.sample(rng.uniform()); }
  double cdf(double r) const { return grid_.cdf(r); }
  const GridInverseCdf& grid() const { return grid_; }

 private:
  GridInverseCdf grid_;
};

double sample_radial_stationary(const RadialTarget& target, Rng& rng);

/// I.i.d. log-levels from pi~(dt) proportional to ell(t) dt.
class LevelStationarySampler {
 public:
  explicit LevelStationarySampler(const LevelSetFunction& ell, int cells = 1 << 14,
                                  double mass_tol = 1e-10);
  double operator()(Rng& rng) const { return grid_.sample(rng.uniform()); }
  double cdf(double log_t) const { return grid_.cdf(log_t); }
  double quantile(double p) const { return grid_.sample(p); }

 private:
  GridInverseCdf grid_;
};

/// CSV with columns step,value plus a JSON sidecar `<path>.json`.
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);

}  // namespace pss
