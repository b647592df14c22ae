#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "pss/errors.hpp"
#include "pss/levelset.hpp"

using namespace pss;
using doctest::Approx;

namespace {

// Newton on the log equation alpha log r - r = c, started on one branch.
double newton_exp_branch(double alpha, double c, double r) {
  for (int i = 0; i < 100; ++i) {
    const double f = alpha * std::log(r) - r - c;
    const double df = alpha / r - 1.0;
    r -= f / df;
  }
  return r;
}

const BuiltinTarget kConvex[] = {BuiltinTarget::exponential(), BuiltinTarget::volcano(2.0),
                                 BuiltinTarget::gaussian()};

}  // namespace

TEST_CASE("mode radius") {
  const auto e3 = make_target(BuiltinTarget::exponential(), 3);
  CHECK(mode_radius(e3, RadialFactorization(2.0, 3)) == Approx(2.0).epsilon(1e-12));
  const auto v2 = make_target(BuiltinTarget::volcano(2.0), 2);
  CHECK(mode_radius(v2, RadialFactorization(1.0, 2)) == Approx((4.0 + std::sqrt(24.0)) / 4.0).epsilon(1e-12));
  CHECK(mode_radius(v2, RadialFactorization(1.0, 2)) == Approx(2.224745).epsilon(1e-6));
  for (int d : {1, 2, 7}) {
    CHECK(mode_radius(make_target(BuiltinTarget::volcano(2.0), d), RadialFactorization::uss(d)) ==
          Approx(2.0).epsilon(1e-12));
  }
  // Gaussian: r phi'(r) = r^2 = alpha
  const auto g = make_target(BuiltinTarget::gaussian(), 10);
  CHECK(mode_radius(g, RadialFactorization::pss(10)) == Approx(3.0).epsilon(1e-12));
  // non-increasing profiles
  CHECK(mode_radius(make_target(BuiltinTarget::exponential(), 4), RadialFactorization::uss(4)) == 0.0);
  CHECK(mode_radius(make_target(BuiltinTarget::radial_weighted_exponential(), 4), RadialFactorization::pss(4)) == 0.0);
}

TEST_CASE("mode search fails for profiles that never turn") {
  // log h = 2 log r - log(1 + r): increasing forever
  const auto t = make_custom_target("heavy", [](double r) { return std::log1p(r); }, kInf, 3, false);
  CHECK_THROWS_AS(mode_radius(t, RadialFactorization::pss(3)), NoRootError);
}

TEST_CASE("level intervals: closed forms") {
  const auto e = make_target(BuiltinTarget::exponential(), 2);
  auto iv = level_interval(e, RadialFactorization::uss(2), LogLevel{-2.0});
  CHECK(iv.r_lo == 0.0);
  CHECK(iv.r_hi == Approx(2.0).epsilon(1e-12));

  const auto v = make_target(BuiltinTarget::volcano(2.0), 3);
  iv = level_interval(v, RadialFactorization::uss(3), LogLevel{-1.0});
  CHECK(iv.r_lo == Approx(1.0).epsilon(1e-12));
  CHECK(iv.r_hi == Approx(3.0).epsilon(1e-12));
}

TEST_CASE("level intervals: two branches of r^2 e^{-r}") {
  // level 4 e^{-3}
  const auto e = make_target(BuiltinTarget::exponential(), 3);
  const LogLevel t{std::log(4.0) - 3.0};
  const auto iv = level_interval(e, RadialFactorization(2.0, 3), t);
  const double lo = newton_exp_branch(2.0, t.value, 0.5);
  const double hi = newton_exp_branch(2.0, t.value, 5.0);
  CHECK(iv.r_lo == Approx(lo).epsilon(1e-12));
  CHECK(iv.r_hi == Approx(hi).epsilon(1e-12));
  CHECK(iv.r_lo == Approx(0.606).epsilon(2e-3));
  CHECK(iv.r_hi == Approx(4.72).epsilon(2e-3));
}

TEST_CASE("level intervals: empty levels") {
  const auto e = make_target(BuiltinTarget::exponential(), 3);
  const auto fac = RadialFactorization(2.0, 3);
  const double top = log_h(e, fac, 2.0);
  CHECK_THROWS_AS(level_interval(e, fac, LogLevel{top}), EmptyLevelError);
  CHECK_THROWS_AS(level_interval(e, fac, LogLevel{top + 1.0}), EmptyLevelError);
  CHECK(ell_eval(e, fac, LogLevel{top + 1.0}) == 0.0);
  CHECK(ell_log_eval(e, fac, LogLevel{top}) == -kInf);
}

TEST_CASE("level intervals: round trip and monotone branches") {
  for (const auto& spec : kConvex) {
    for (int d : {2, 5, 30}) {
      const auto t = make_target(spec, d);
      const auto fac = RadialFactorization::pss(d);
      const double sup = sup_log_h(t, fac);
      double prev_lo = 0.0, prev_hi = kInf;
      for (int i = 1; i <= 60; ++i) {
        const LogLevel lt{sup - 40.0 + 40.0 * i / 61.0};
        const auto iv = level_interval(t, fac, lt);
        CHECK(iv.r_lo > 0.0);
        CHECK(std::abs(log_h(t, fac, iv.r_hi) - lt.value) <= 1e-10 * std::max(1.0, std::abs(lt.value)));
        CHECK(std::abs(log_h(t, fac, iv.r_lo) - lt.value) <= 1e-10 * std::max(1.0, std::abs(lt.value)));
        CHECK(iv.r_lo >= prev_lo);
        CHECK(iv.r_hi <= prev_hi);
        prev_lo = iv.r_lo;
        prev_hi = iv.r_hi;
      }
    }
  }
}

TEST_CASE("ell: closed forms") {
  const auto w = make_target(BuiltinTarget::radial_weighted_exponential(), 3);
  CHECK(ell_eval(w, RadialFactorization::pss(3), LogLevel{-1.0}) == Approx(4.0 * std::numbers::pi).epsilon(1e-12));
  CHECK(ell_eval(w, RadialFactorization::pss(3), LogLevel{-1.0}) == Approx(12.566371).epsilon(1e-7));
  const auto e = make_target(BuiltinTarget::exponential(), 2);
  CHECK(ell_eval(e, RadialFactorization::uss(2), LogLevel{-2.0}) == Approx(4.0 * std::numbers::pi).epsilon(1e-12));
  // USS exponential: ell = sigma/d (-log t)^d
  for (int d : {1, 3, 8}) {
    const auto ed = make_target(BuiltinTarget::exponential(), d);
    for (double lt : {-0.1, -1.0, -7.0}) {
      CHECK(ell_eval(ed, RadialFactorization::uss(d), LogLevel{lt}) ==
            Approx(surface_area(d) / d * std::pow(-lt, d)).epsilon(1e-11));
    }
  }
}

TEST_CASE("ell in log form survives high dimension") {
  const int d = 500;
  const auto e = make_target(BuiltinTarget::exponential(), d);
  const auto fac = RadialFactorization::pss(d);
  const double sup = sup_log_h(e, fac);
  const double v = ell_log_eval(e, fac, LogLevel{sup - 5.0});
  CHECK(std::isfinite(v));
  // PSS: ell = sigma (r_hi - r_lo)
  const auto iv = level_interval(e, fac, LogLevel{sup - 5.0});
  CHECK(v == Approx(log_surface_area(d) + std::log(iv.r_hi - iv.r_lo)).epsilon(1e-12));
}

TEST_CASE("ell is non-increasing and strictly decreasing inside the support") {
  for (const auto& spec : kConvex) {
    for (int d : {1, 3, 10}) {
      for (auto fac : {RadialFactorization::uss(d), RadialFactorization::pss(d)}) {
        const auto ell = make_level_set_function(make_target(spec, d), fac);
        const auto probe = default_probe_grid(ell, 300);
        double prev = kInf;
        for (int i = 0; i < probe.n; ++i) {
          const double u = probe.log_t_lo + (probe.log_t_hi - probe.log_t_lo) * i / (probe.n - 1);
          const double v = ell.log_value(LogLevel{u});
          CHECK(v < prev);
          prev = v;
        }
        CHECK(ell.value(LogLevel{ell.support_sup()}) == 0.0);
      }
    }
  }
}

TEST_CASE("radially weighted exponential matches one-dimensional USS") {
  for (int d = 2; d <= 10; ++d) {
    const auto pss_ell = make_level_set_function(make_target(BuiltinTarget::radial_weighted_exponential(), d),
                                                 RadialFactorization::pss(d));
    const auto line = make_level_set_function(make_target(BuiltinTarget::exponential(2.0 / surface_area(d)), 1),
                                              RadialFactorization::uss(1));
    for (int k = 0; k < 50; ++k) {
      const LogLevel u{-30.0 + 29.9 * k / 49.0};
      const double a = pss_ell.value(u);
      const double b = line.value(u);
      CHECK(std::abs(a - b) <= 1e-10 * std::max(a, b));
    }
  }
}

TEST_CASE("lower mass cutoff") {
  const auto ell = make_level_set_function(make_target(BuiltinTarget::exponential(), 5), RadialFactorization::pss(5));
  for (double tol : {1e-4, 1e-8, 1e-12}) {
    const auto cut = lower_mass_cutoff(ell, tol);
    CHECK(cut.truncated_mass <= tol * (1 + 1e-6));
    CHECK(cut.truncated_mass >= 0.5 * tol);
    CHECK(cut.log_t_min < ell.support_sup());
  }
}

TEST_CASE("Lambda_1 holds for PSS on convex targets") {
  for (const auto& spec : kConvex) {
    for (int d : {2, 5, 10, 50}) {
      const auto ell = make_level_set_function(make_target(spec, d), RadialFactorization::pss(d));
      const auto rep = lambda_k_check(ell, 1, default_probe_grid(ell));
      CHECK_MESSAGE(rep.passed, describe(spec) << " d=" << d);
      CHECK(rep.violations.empty() == rep.passed);
    }
  }
}

TEST_CASE("Lambda_k for USS on the exponential target in d=3") {
  const auto ell = make_level_set_function(make_target(BuiltinTarget::exponential(), 3), RadialFactorization::uss(3));
  const auto probe = default_probe_grid(ell);
  const auto k3 = lambda_k_check(ell, 3, probe);
  CHECK(k3.passed);
  CHECK(k3.violations.empty());
  const auto k1 = lambda_k_check(ell, 1, probe);
  CHECK_FALSE(k1.passed);
  REQUIRE_FALSE(k1.violations.empty());
  for (const auto& v : k1.violations) CHECK(v.check == "concavity");
  CHECK(lambda_k_check(ell, 4, probe).passed);
}

TEST_CASE("Lambda_k input validation") {
  const auto ell = make_level_set_function(make_target(BuiltinTarget::exponential(), 3), RadialFactorization::pss(3));
  const auto probe = default_probe_grid(ell);
  CHECK_THROWS_AS(lambda_k_check(ell, 0, probe), DomainError);
  CHECK_THROWS_AS(lambda_k_check(ell, 1, ProbeGrid{probe.log_t_lo, probe.log_t_hi, 50}), DomainError);
  CHECK_THROWS_AS(lambda_k_check(ell, 1, ProbeGrid{probe.log_t_lo, ell.support_sup() + 1.0, 200}), DomainError);
}

TEST_CASE("Lambda_k flags a jump at the support end") {
  // ell(e^u) = 2 - u for u < 0: decreasing but tends to 2, not 0
  const LevelSetFunction ell([](double u) { return u < 0.0 ? std::log(2.0 - u) : -kInf; }, 0.0, kInf, "jump");
  const auto rep = lambda_k_check(ell, 1, ProbeGrid{-10.0, -1e-3, 200});
  CHECK_FALSE(rep.passed);
  bool saw_limit = false;
  for (const auto& v : rep.violations) saw_limit = saw_limit || v.check == "limit_at_support_end";
  CHECK(saw_limit);
}

TEST_CASE("canonical inverse potential") {
  // sigma_2 log(1/t), k = 1
  const auto ell = make_level_set_function(make_target(BuiltinTarget::radial_weighted_exponential(), 3),
                                           RadialFactorization::pss(3));
  CHECK(canonical_inverse_phi(ell, 1, 1.0) == Approx(2.0 * std::numbers::pi).epsilon(1e-12));
  CHECK(canonical_inverse_phi(ell, 1, -ell.support_sup()) == 0.0);
  CHECK_THROWS_AS(canonical_inverse_phi(ell, 1, -ell.support_sup() - 1.0), DomainError);

  for (int d : {1, 2, 5}) {
    const auto uss = make_level_set_function(make_target(BuiltinTarget::exponential(), d), RadialFactorization::uss(d));
    for (double s : {0.3, 1.0, 4.0, 12.0}) CHECK(canonical_inverse_phi(uss, d, s) == Approx(s).epsilon(1e-10));
  }
}

TEST_CASE("canonical construction round trip") {
  for (const auto& spec : kConvex) {
    const auto ell = make_level_set_function(make_target(spec, 4), RadialFactorization::pss(4));
    for (int k : {1, 2}) {
      for (double s : {0.5, 1.0, 2.0, 5.0, 10.0}) {
        const double s_eff = s - ell.support_sup();
        const double r = canonical_inverse_phi(ell, k, s_eff);
        CHECK(canonical_phi(ell, k, r) == Approx(s_eff).epsilon(1e-8));
      }
    }
  }
}
