#include "pss/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "pss/errors.hpp"

namespace pss {
namespace {

struct Centered {
  std::vector<double> x;
  double c0 = 0.0;  // (1/n) sum (v - mean)^2
};

Centered center(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 10) throw InsufficientDataError("autocorrelation needs at least 10 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  Centered out;
  out.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.x[i] = values[i] - mean;
    out.c0 += out.x[i] * out.x[i];
  }
  out.c0 /= static_cast<double>(n);
  if (!(out.c0 > 0.0)) throw ZeroVarianceError("autocorrelation of a constant trace");
  return out;
}

double rho_at(const Centered& c, std::size_t k) {
  const std::size_t n = c.x.size();
  double acc = 0.0;
  for (std::size_t i = 0; i + k < n; ++i) acc += c.x[i] * c.x[i + k];
  return acc / static_cast<double>(n) / c.c0;
}

}  // namespace

AcfSeries autocorr(std::span<const double> values, std::size_t max_lag) {
  const Centered c = center(values);
  AcfSeries out;
  out.n = values.size();
  max_lag = std::min(max_lag, values.size() - 1);
  out.rho.resize(max_lag + 1);
  out.rho[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) out.rho[k] = rho_at(c, k);
  return out;
}

IatEstimate iat(std::span<const double> values) {
  const Centered c = center(values);
  const std::size_t k_max = std::min<std::size_t>(values.size() / 2, 10'000);
  IatEstimate est;
  double sum = 0.0;
  std::size_t k = 1;
  for (; k + 1 <= k_max; k += 2) {
    const double a = rho_at(c, k);
    const double b = rho_at(c, k + 1);
    if (a + b < 0.0) break;
    sum += a + b;
  }
  // lags 1..K-1 accumulated pairwise; K itself excluded
  est.truncation_lag = std::min(k, k_max);
  est.value = 1.0 + 2.0 * sum;
  return est;
}

double iat_bound_from_gap(double gap) {
  if (!(gap > 0.0) || gap > 1.0) throw DomainError("iat_bound_from_gap: gap must lie in (0, 1]");
  return 2.0 / gap;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InsufficientDataError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InsufficientDataError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

}  // namespace pss
