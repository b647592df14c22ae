#pragma once

// Rotationally invariant targets exp(-phi(|x|)) on the ball |x| < kappa,
// together with the radial power-weight factorizations
//   rho0(x) = |x|^{-alpha},  rho1(x) = |x|^{alpha} exp(-phi(|x|)).
// alpha = 0 is uniform slice sampling, alpha = d-1 is polar slice sampling.

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace pss {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct RadialTarget {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  double kappa = kInf;
  int dim = 1;
  // Claimed convexity of phi. Not enforced here; see check_target().
  bool convex = true;
};

enum class TargetTag { Exponential, Volcano, Gaussian, RadialWeightedExponential };

/// Tag plus its single shape parameter:
///   Exponential: rate (phi = rate * r), Volcano: centre c (phi = (r - c)^2),
///   Gaussian: scale s (phi = r^2 / (2 s^2)),
///   RadialWeightedExponential: rate (phi = rate * r + (d - 1) log r).
struct BuiltinTarget {
  TargetTag tag = TargetTag::Exponential;
  double param = 1.0;

  static BuiltinTarget exponential(double rate = 1.0) { return {TargetTag::Exponential, rate}; }
  static BuiltinTarget volcano(double c) { return {TargetTag::Volcano, c}; }
  static BuiltinTarget gaussian(double scale = 1.0) { return {TargetTag::Gaussian, scale}; }
  static BuiltinTarget radial_weighted_exponential(double rate = 1.0) {
    return {TargetTag::RadialWeightedExponential, rate};
  }
};

std::string to_string(TargetTag tag);
TargetTag parse_target_tag(const std::string& name);
std::string describe(const BuiltinTarget& target);

RadialTarget make_target(const BuiltinTarget& spec, int dim);

/// Target from a potential alone; the derivative is a central finite
/// difference with step max(1e-6, 1e-6 r).
RadialTarget make_custom_target(std::string name, std::function<double(double)> phi,
                                double kappa, int dim, bool convex = true);

class RadialFactorization {
 public:
  /// Throws DomainError unless 0 <= alpha <= dim - 1.
  RadialFactorization(double alpha, int dim);

  static RadialFactorization uss(int dim) { return {0.0, dim}; }
  static RadialFactorization pss(int dim) { return {dim > 1 ? dim - 1.0 : 0.0, dim}; }

  double alpha() const { return alpha_; }
  int dim() const { return dim_; }
  /// Exponent d - alpha of the radial measure r^{d-1-alpha} dr.
  double radial_exponent() const { return dim_ - alpha_; }

 private:
  double alpha_;
  int dim_;
};

/// log h_alpha(r) = alpha log r - phi(r). Throws DomainError outside (0, kappa).
double log_h(const RadialTarget& target, const RadialFactorization& fac, double r);

/// sigma_{d-1}(S^{d-1}) = 2 pi^{d/2} / Gamma(d/2).
double surface_area(int d);
double log_surface_area(int d);

struct TargetCheck {
  bool ok = true;
  std::vector<std::string> issues;
};

/// Numerical sanity checks: phi finite on (0, kappa), phi blowing up at a
/// finite kappa, dphi consistent with a central difference, and (when
/// `require_convex`) nonnegative second differences of phi.
TargetCheck check_target(const RadialTarget& target, bool require_convex = false);

}  // namespace pss
