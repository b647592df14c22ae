#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pss {

struct AcfSeries {
  std::vector<double> rho;  // rho[0] == 1
  std::size_t n = 0;
};

/// Overall-mean, denominator-n autocorrelations for lags 0..max_lag.
/// Throws InsufficientDataError for n < 10, ZeroVarianceError for constant input.
AcfSeries autocorr(std::span<const double> values, std::size_t max_lag);

struct IatEstimate {
  double value = 1.0;
  std::size_t truncation_lag = 0;
  std::string rule = "initial_positive_pair";
};

/// IAT = 1 + 2 sum_{k=1}^{K-1} rho_k with K the smallest odd lag such that
/// rho_K + rho_{K+1} < 0, capped at min(n/2, 10^4).
IatEstimate iat(std::span<const double> values);

/// Upper bound 2 / gap on the integrated autocorrelation time.
double iat_bound_from_gap(double gap);

/// sup_x |F_n(x) - F(x)| for a sample against a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace pss
