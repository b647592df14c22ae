#include "pss/targets.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pss/errors.hpp"

namespace pss {

std::string to_string(TargetTag tag) {
  switch (tag) {
    case TargetTag::Exponential:
      return "exponential";
    case TargetTag::Volcano:
      return "volcano";
    case TargetTag::Gaussian:
      return "gaussian";
    case TargetTag::RadialWeightedExponential:
      return "radial_weighted_exponential";
  }
  return "unknown";
}

TargetTag parse_target_tag(const std::string& name) {
  for (auto tag : {TargetTag::Exponential, TargetTag::Volcano, TargetTag::Gaussian,
                   TargetTag::RadialWeightedExponential}) {
    if (to_string(tag) == name) return tag;
  }
  throw ConfigError("unknown target tag '" + name + "'");
}

std::string describe(const BuiltinTarget& target) {
  std::ostringstream os;
  os << to_string(target.tag) << "(" << target.param << ")";
  return os.str();
}

RadialTarget make_target(const BuiltinTarget& spec, int dim) {
  if (dim < 1) throw DomainError("dimension must be positive");
  if (!(spec.param > 0.0) || !std::isfinite(spec.param)) {
    throw DomainError("target parameter must be a positive real");
  }
  const double p = spec.param;
  RadialTarget t;
  t.name = describe(spec);
  t.dim = dim;
  t.kappa = kInf;
  switch (spec.tag) {
    case TargetTag::Exponential:
      t.phi = [p](double r) { return p * r; };
      t.dphi = [p](double) { return p; };
      break;
    case TargetTag::Volcano:
      t.phi = [p](double r) { return (r - p) * (r - p); };
      t.dphi = [p](double r) { return 2.0 * (r - p); };
      break;
    case TargetTag::Gaussian: {
      const double inv = 1.0 / (p * p);
      t.phi = [inv](double r) { return 0.5 * r * r * inv; };
      t.dphi = [inv](double r) { return r * inv; };
      break;
    }
    case TargetTag::RadialWeightedExponential: {
      const double w = dim - 1.0;
      t.phi = [p, w](double r) { return p * r + w * std::log(r); };
      t.dphi = [p, w](double r) { return p + w / r; };
      t.convex = dim == 1;
      break;
    }
  }
  return t;
}

RadialTarget make_custom_target(std::string name, std::function<double(double)> phi,
                                double kappa, int dim, bool convex) {
  if (dim < 1) throw DomainError("dimension must be positive");
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  RadialTarget t;
  t.name = std::move(name);
  t.dim = dim;
  t.kappa = kappa;
  t.convex = convex;
  t.phi = std::move(phi);
  t.dphi = [f = t.phi](double r) {
    const double h = std::max(1e-6, 1e-6 * r);
    return (f(r + h) - f(r - h)) / (2.0 * h);
  };
  return t;
}

RadialFactorization::RadialFactorization(double alpha, int dim) : alpha_(alpha), dim_(dim) {
  if (dim < 1) throw DomainError("dimension must be positive");
  if (!(alpha >= 0.0) || alpha > dim - 1.0) {
    throw DomainError("factorization exponent must lie in [0, d-1]");
  }
}

double log_h(const RadialTarget& target, const RadialFactorization& fac, double r) {
  if (!(r > 0.0) || !(r < target.kappa)) {
    throw DomainError("log_h: radius outside (0, kappa)");
  }
  const double a = fac.alpha();
  return (a == 0.0 ? 0.0 : a * std::log(r)) - target.phi(r);
}

double log_surface_area(int d) {
  if (d < 1) throw DomainError("surface_area: dimension must be positive");
  const double half = 0.5 * d;
  return std::numbers::ln2 + half * std::log(std::numbers::pi) - std::lgamma(half);
}

double surface_area(int d) { return std::exp(log_surface_area(d)); }

TargetCheck check_target(const RadialTarget& target, bool require_convex) {
  TargetCheck out;
  auto fail = [&out](std::string msg) {
    out.ok = false;
    out.issues.push_back(std::move(msg));
  };
  if (!target.phi || !target.dphi) {
    fail("potential or derivative missing");
    return out;
  }
  const double hi = std::isfinite(target.kappa) ? target.kappa * (1.0 - 1e-3) : 50.0;
  const double lo = std::min(1e-3, 0.5 * hi);
  constexpr int kProbes = 200;
  std::vector<double> r(kProbes), f(kProbes);
  for (int i = 0; i < kProbes; ++i) {
    r[i] = lo + (hi - lo) * i / (kProbes - 1);
    f[i] = target.phi(r[i]);
    if (!std::isfinite(f[i])) {
      fail("phi not finite at r=" + std::to_string(r[i]));
      continue;
    }
    const double h = std::max(1e-6, 1e-6 * r[i]);
    if (r[i] - h <= 0.0 || r[i] + h >= target.kappa) continue;
    const double fd = (target.phi(r[i] + h) - target.phi(r[i] - h)) / (2.0 * h);
    const double d = target.dphi(r[i]);
    if (std::abs(fd - d) > 1e-6 * std::max(1.0, std::abs(d))) {
      fail("dphi inconsistent with finite difference at r=" + std::to_string(r[i]));
    }
  }
  if (std::isfinite(target.kappa)) {
    // increasing over the last decades and growing by at least one unit
    double prev = -kInf;
    double first = 0.0;
    bool rising = true;
    for (double rel : {1e-2, 1e-4, 1e-6, 1e-8}) {
      const double v = target.phi(target.kappa * (1.0 - rel));
      if (rel == 1e-2) first = v;
      rising = rising && v > prev;
      prev = v;
    }
    if (!rising || !(prev - first >= 1.0)) fail("phi does not blow up towards kappa");
  }
  if (require_convex) {
    for (int i = 1; i + 1 < kProbes; ++i) {
      const double second = f[i - 1] - 2.0 * f[i] + f[i + 1];
      if (second < -1e-9 * std::max({1.0, std::abs(f[i - 1]), std::abs(f[i + 1])})) {
        fail("phi not convex near r=" + std::to_string(r[i]));
        break;
      }
    }
  }
  return out;
}

}  // namespace pss
