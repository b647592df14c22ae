#pragma once

// Discretization of the auxiliary level kernel
//   P_T(t, B) = 1/ell(t) * int_t^inf  lambda(B cap (0,s)) / s  d(-ell)(s)
// on a log-spaced grid of levels, and spectral-gap certificates built on it.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pss/levelset.hpp"
#include "pss/targets.hpp"

namespace pss {

struct TGrid {
  std::vector<double> boundaries;  // log t, strictly increasing, n + 1 values
  std::vector<double> nodes;       // log-midpoints of the cells
  double truncation_mass = 0.0;    // pi~ mass below the first boundary
  double mass_tol = 0.0;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// n cells, uniform in log t, from the mass cutoff up to the support end.
TGrid build_t_grid(const LevelSetFunction& ell, int n, double mass_tol = 1e-8);

/// Grid from explicit log-t boundaries (truncation mass recorded as 0).
TGrid make_t_grid(std::vector<double> boundaries);

/// pi~ cell probabilities: composite Simpson on 8 subintervals per cell of
/// ell(e^u) e^u du, normalized to sum 1. The top cell is integrated after
/// u = top - w^2 to absorb the square-root edge of ell.
std::vector<double> stationary_weights(const LevelSetFunction& ell, const TGrid& grid);

struct DiscreteKernel {
  Eigen::MatrixXd matrix;   // row-stochastic
  Eigen::VectorXd weights;  // stationary cell probabilities
  double row_defect = 0.0;  // pre-normalization defect, see discretize_pt
  TGrid grid;
};

/// Cell-to-cell kernel M_ij = Q_ij / w_i with the symmetric joint measure
///   Q_ij = int d(-ell)(s) lambda(C_i cap (0,s)) lambda(C_j cap (0,s)) / s,
/// i.e. pi~(C_i) times the pi~-average over C_i of P_T(., C_j). The first
/// cell absorbs the truncated tail (0, t_0]. d(-ell) is realized by first
/// differences of ell on `refine` geometric subintervals per cell, graded
/// quadratically towards the support end in the top cell.
///
/// row_defect is sum_i |rowsum(Q)_i / sum(Q) - w_i| against the Simpson
/// weights of stationary_weights(). Throws InvalidLevelSetError if ell
/// increases on the refinement grid.
DiscreteKernel discretize_pt(const LevelSetFunction& ell, const TGrid& grid, int refine = 16);

/// Point evaluation of P_T(t, (b_lo, b_hi)) from the Stieltjes form with
/// `subintervals` geometric subintervals on (t, sup). log_b_lo may be -inf.
double kernel_probability(const LevelSetFunction& ell, LogLevel t, double log_b_lo,
                          double log_b_hi, int subintervals = 1 << 14);

struct GapEstimate {
  double gap = 0.0;
  double lambda2 = 0.0;
  double lambda_min = 0.0;
  double truncation_mass = 0.0;
  int grid_size = 0;
  double refinement_delta = 0.0;  // |gap(n) - gap(2n)|, NaN when not computed
  bool converged = true;
  bool psd_warning = false;  // lambda_min < -1e-8
};

/// gap = 1 - lambda2, lambda2 the largest eigenvalue of
/// D^{1/2} M D^{-1/2} - sqrt(w) sqrt(w)^T (dense symmetric solve).
GapEstimate spectral_gap(const DiscreteKernel& kernel);

struct GapOptions {
  int grid_size = 2048;
  int refine = 16;
  double mass_tol = 1e-8;
  bool check_refinement = true;
  double refinement_tol = 0.005;
};

/// Gap at n cells with the refinement diagnostic at 2n cells.
GapEstimate certify_gap(const LevelSetFunction& ell, const GapOptions& opts = {});

struct DualityReport {
  double max_abs_ell_diff = 0.0;
  double max_rel_ell_diff = 0.0;
  double gap_a = 0.0;
  double gap_b = 0.0;
  double gap_diff = 0.0;
};

/// Compares two level-set functions on `probes` levels and their gaps on a
/// single grid built from ell_a, stretched to the larger support end.
DualityReport duality_gap_compare(const LevelSetFunction& ell_a, const LevelSetFunction& ell_b,
                                  const GapOptions& opts = {}, int probes = 50);

struct AdjointnessReport {
  double max_residual = 0.0;
  // residual[i][j] for g_i in {1, s, s^2, sin s} and h_j in {1, r, r^2, e^{-r}}
  std::vector<std::vector<double>> residuals;
};

struct AdjointnessOptions {
  int radial_points = 1 << 12;
  int level_points = 1 << 12;
};

/// <U_T g, h>_pi versus <g, U_X h>_pi~ by two independent quadratures (one
/// over radii, one over levels), normalized by ||g||_pi~ ||h||_pi. The level
/// variable is s = t / sup h_alpha in (0, 1).
AdjointnessReport adjointness_check(const RadialTarget& target, const RadialFactorization& fac,
                                    const AdjointnessOptions& opts = {});

}  // namespace pss
