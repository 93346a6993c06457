#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "slelab/formulas.hpp"

using namespace slelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("exponents") {
  auto e0 = exponents(0.0, 3.0, 1);
  CHECK(e0.a == 0.0);
  CHECK(e0.lambda == 0.0);

  for (double kappa : {2.0, 4.0, 6.0}) {
    auto e = exponents(0.5, kappa, 1);
    CHECK_THAT(e.a, WithinAbs(1.0 + kappa / 8.0, 1e-15));
    CHECK_THAT(e.lambda, WithinAbs(2.0, 1e-15));
  }

  auto e1 = exponents(1.0, 2.0, -1);
  CHECK_THAT(e1.a, WithinAbs(2.0, 1e-15));
  CHECK_THAT(e1.lambda, WithinAbs(5.0, 1e-15));

  CHECK_THROWS_AS(exponents(1.0, 0.0, 1), domain_error);
  CHECK_THROWS_AS(exponents(1.0, 2.0, 0), domain_error);
}

TEST_CASE("derivative_moment_F") {
  CHECK_THAT(derivative_moment_F(cplx(0, 2), 1.0, 2.0),
             WithinAbs(32.0, 1e-12));
  // x = 0: prefactor 1, value y^lambda
  auto e = exponents(0.7, 5.0, 1);  // y = 0.5 < 1 -> nu = +1
  CHECK_THAT(derivative_moment_F(cplx(0, 0.5), 0.7, 5.0),
             WithinRel(std::pow(0.5, e.lambda), 1e-12));
  CHECK_THAT(derivative_moment_F(cplx(1, 2), 0.5, 6.0),
             WithinRel(std::sqrt(1.25) * 4.0, 1e-12));

  // reflection symmetry
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> xr(0.1, 2.0);
  for (int i = 0; i < 20; ++i) {
    double x = xr(rng), y = 0.3 + xr(rng), b = 0.2 + 0.3 * xr(rng);
    if (y == 1.0) continue;
    CHECK(derivative_moment_F(cplx(x, y), b, 6.0) ==
          derivative_moment_F(cplx(-x, y), b, 6.0));
  }

  CHECK_THROWS_AS(derivative_moment_F(cplx(0, 1), 1.0, 2.0), domain_error);
  CHECK_THROWS_AS(derivative_moment_F(cplx(0, -1), 1.0, 2.0), domain_error);
}

TEST_CASE("eta_exponents") {
  auto [a0, a1] = eta_exponents(0.0, 4.0);
  CHECK_THAT(a0, WithinAbs(0.0, 1e-14));
  CHECK_THAT(a1, WithinAbs(0.0, 1e-14));

  auto [b0, b1] = eta_exponents(0.75, 2.0);
  CHECK_THAT(b0, WithinAbs(-1.5, 1e-14));
  CHECK_THAT(b1, WithinAbs(0.5, 1e-14));

  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> ar(-0.1, 2.0);
  std::uniform_real_distribution<double> kr(1.0, 10.0);
  for (int i = 0; i < 30; ++i) {
    double a = ar(rng), k = kr(rng);
    if (32.0 * a * k + (2.0 * k - 8.0) * (2.0 * k - 8.0) < 0.0) continue;
    auto [e0, e1] = eta_exponents(a, k);
    CHECK(e0 <= e1);
  }
  CHECK_THROWS_AS(eta_exponents(-10.0, 6.0), domain_error);
}

TEST_CASE("z_moment case table") {
  auto zero = z_moment(cplx(0.3, 1), -0.5, 9.0);
  CHECK(zero.kind == ZMomentKind::zero);

  auto inf = z_moment(cplx(0, 1), 0.425, 6.0);  // a >= 1 - 6/8 = 0.25
  CHECK(inf.kind == ZMomentKind::infinite);

  auto fin = z_moment(cplx(0, 1), 0.5, 2.0);
  REQUIRE(fin.kind == ZMomentKind::finite);
  // G_hat(i) = 1 (series argument 0), so the value is 1/G_hat(1)
  CHECK_THAT(fin.value, WithinRel(1.0 / g_hat_at_one(0.5, 2.0), 1e-12));

  // outside the table: a >= crit but not positive, and not the zero case
  CHECK_THROWS_AS(z_moment(cplx(0, 1), 0.0, 9.0), domain_error);
  CHECK_THROWS_AS(z_moment(cplx(0, -1), 0.1, 2.0), domain_error);
}

TEST_CASE("g_hat reduction at a = 1 - kappa/8") {
  for (double kappa : {2.0, 3.0, 6.0}) {
    double a = 1.0 - kappa / 8.0;
    for (int i = 0; i < 20; ++i) {
      double x = -2.0 + 0.21 * i;
      double y = 0.3 + 0.1 * i;
      double r = std::hypot(x, y);
      double want = std::pow(y / r, (8.0 - kappa) / kappa);
      INFO("kappa=" << kappa << " x=" << x << " y=" << y);
      CHECK_THAT(g_hat(cplx(x, y), a, kappa), WithinRel(want, 1e-9));
    }
  }
}

TEST_CASE("cardy_hit_prob") {
  CHECK_THAT(cardy_hit_prob(1.0, 6.0), WithinAbs(1.0, 1e-9));
  CHECK(cardy_hit_prob(1e6, 6.0) < 0.1);

  // fixture from the independent long-double oracle, never hand-entered
  double want = static_cast<double>(oracles::cardy_naive(2.0L, 6.0L));
  CHECK_THAT(cardy_hit_prob(2.0, 6.0), WithinRel(want, 1e-9));

  // strictly decreasing in s
  for (double kappa : {4.5, 5.0, 6.0, 7.0, 7.5}) {
    double prev = cardy_hit_prob(1.0, kappa);
    CHECK_THAT(prev, WithinAbs(1.0, 1e-9));
    for (double s : {1.2, 1.7, 2.5, 4.0, 8.0, 30.0}) {
      double p = cardy_hit_prob(s, kappa);
      INFO("kappa=" << kappa << " s=" << s);
      CHECK(p < prev);
      prev = p;
    }
  }

  CHECK_THROWS_AS(cardy_hit_prob(0.5, 6.0), domain_error);
  CHECK_THROWS_AS(cardy_hit_prob(2.0, 4.0), domain_error);
  CHECK_THROWS_AS(cardy_hit_prob(2.0, 8.0), domain_error);
}

TEST_CASE("bessel_exit_prob") {
  CHECK(bessel_exit_prob(1.0, 1.0, 4.0, 6.0) == 0.0);
  CHECK(bessel_exit_prob(4.0, 1.0, 4.0, 6.0) == 1.0);
  CHECK_THAT(bessel_exit_prob(2.0, 1.0, 4.0, 4.0), WithinAbs(0.5, 1e-12));

  // monotone in x and scale invariant
  double prev = -1.0;
  for (double x : {0.6, 1.0, 1.5, 1.9}) {
    double p = bessel_exit_prob(x, 0.5, 2.0, 6.0);
    CHECK(p > prev);
    prev = p;
    for (double c : {2.0, 7.5}) {
      CHECK_THAT(bessel_exit_prob(c * x, c * 0.5, c * 2.0, 6.0),
                 WithinRel(p, 1e-10));
      CHECK_THAT(bessel_exit_prob(c * x, c * 0.5, c * 2.0, 4.0),
                 WithinRel(bessel_exit_prob(x, 0.5, 2.0, 4.0), 1e-10));
    }
  }
  CHECK_THROWS_AS(bessel_exit_prob(5.0, 1.0, 4.0, 6.0), domain_error);
  CHECK_THROWS_AS(bessel_exit_prob(2.0, -1.0, 4.0, 6.0), domain_error);
}

TEST_CASE("swallow_harmonic") {
  CHECK(swallow_harmonic(cplx(0, 0), 6.0) == 0.0);
  CHECK_THAT(swallow_harmonic(cplx(0, 1), 8.0), WithinAbs(1.0, 1e-12));
  CHECK_THAT(swallow_harmonic(cplx(1, 0), 6.0),
             WithinRel(std::sin(kPi / 3.0), 1e-12));
  CHECK_THROWS_AS(swallow_harmonic(cplx(0, 1), 4.0), domain_error);
}

TEST_CASE("dim_exponents") {
  CHECK_THAT(dim_exponents(2.0).trace_exp, WithinAbs(1.25, 1e-15));
  CHECK_THAT(dim_exponents(8.0).trace_exp, WithinAbs(2.0, 1e-15));
  CHECK_THAT(dim_exponents(9.0).trace_exp, WithinAbs(2.0, 1e-15));
  CHECK_THAT(dim_exponents(6.0).boundary_exp, WithinRel(4.0 / 3.0, 1e-15));
  CHECK_THAT(dim_exponents(2.0).boundary_exp, WithinAbs(1.25, 1e-15));
  CHECK_THROWS_AS(dim_exponents(0.0), domain_error);
}

TEST_CASE("derest_tail_bound and theta factor") {
  CHECK(theta_factor(0.3, -1.0) == 1.0);
  CHECK_THAT(theta_factor(0.1, 0.0), WithinRel(1.0 + std::log(10.0), 1e-12));
  CHECK_THAT(theta_factor(0.1, 2.0), WithinRel(100.0, 1e-12));

  // b = 1/2 forces lambda = 2: halving y at x=0 scales the bound by 2^-2
  double b1 = derest_tail_bound(0.0, 0.8, 0.5, 0.3, 0.5, 6.0);
  double b2 = derest_tail_bound(0.0, 0.4, 0.5, 0.3, 0.5, 6.0);
  CHECK_THAT(b1 / b2, WithinRel(4.0, 1e-10));

  CHECK_THROWS_AS(derest_tail_bound(0.0, 1.5, 0.5, 0.3, 0.5, 6.0),
                  domain_error);
  CHECK_THROWS_AS(derest_tail_bound(0.0, 0.5, 0.5, 0.3, 3.0, 6.0),
                  domain_error);
}

TEST_CASE("transience_G") {
  CHECK(std::abs(transience_G(1e-8)) < 1e-6);

  double want = -0.5 * std::log(2.0) * std::log(2.0) - kPi * kPi / 12.0;
  CHECK_THAT(transience_G(1.0), WithinRel(want, 1e-10));

  // ODE residual s(1+s)^2 G'' + s(1+s) G' = 1 by finite differences
  for (double s : {0.5, 1.0, 2.0, 5.0}) {
    double h = 1e-4;
    double g0 = transience_G(s - h), g1 = transience_G(s),
           g2 = transience_G(s + h);
    double d1 = (g2 - g0) / (2.0 * h);
    double d2 = (g2 - 2.0 * g1 + g0) / (h * h);
    double resid = s * (1 + s) * (1 + s) * d2 + s * (1 + s) * d1;
    INFO("s=" << s);
    CHECK_THAT(resid, WithinAbs(1.0, 1e-4));
  }
  CHECK_THROWS_AS(transience_G(0.0), domain_error);
}
