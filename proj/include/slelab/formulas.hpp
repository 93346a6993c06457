#ifndef SLELAB_FORMULAS_HPP_
#define SLELAB_FORMULAS_HPP_

#include <cmath>
#include <complex>
#include <utility>

#include "slelab/errors.hpp"
#include "slelab/special_functions.hpp"

// Closed-form predictions used as oracles by the Monte Carlo harness and
// exposed for direct evaluation.

namespace slelab {

using cplx = std::complex<double>;

struct ExponentPair {
  double a;
  double lambda;
  double b;
  int nu;  // +1 or -1
  double kappa;
};

inline ExponentPair exponents(double b, double kappa, int nu) {
  if (kappa <= 0.0) throw domain_error("exponents: kappa <= 0");
  if (nu != 1 && nu != -1) throw domain_error("exponents: nu must be +-1");
  ExponentPair e;
  e.b = b;
  e.nu = nu;
  e.kappa = kappa;
  e.a = 2.0 * b + nu * kappa * b * (1.0 - b) / 2.0;
  e.lambda = 4.0 * b + nu * kappa * b * (1.0 - 2.0 * b) / 2.0;
  return e;
}

// F(zhat) = (1 + (x/y)^2)^b * y^lambda with nu = -sign(log y).
inline double derivative_moment_F(std::complex<double> zhat, double b,
                                  double kappa) {
  double x = zhat.real();
  double y = zhat.imag();
  if (!(y > 0.0)) throw domain_error("derivative_moment_F: Im(zhat) <= 0");
  if (y == 1.0) {
    throw domain_error("derivative_moment_F: Im(zhat) = 1 excluded");
  }
  int nu = (std::log(y) > 0.0) ? -1 : 1;
  ExponentPair e = exponents(b, kappa, nu);
  double r = x / y;
  return std::pow(1.0 + r * r, b) * std::pow(y, e.lambda);
}

// eta_j = 1/2 - 2/kappa - (-1)^j sqrt(32 a kappa + (2 kappa - 8)^2)/(4 kappa)
inline std::pair<double, double> eta_exponents(double a, double kappa) {
  if (kappa <= 0.0) throw domain_error("eta_exponents: kappa <= 0");
  double disc = 32.0 * a * kappa + (2.0 * kappa - 8.0) * (2.0 * kappa - 8.0);
  if (disc < 0.0) {
    throw domain_error("eta_exponents: negative discriminant");
  }
  double base = 0.5 - 2.0 / kappa;
  double root = std::sqrt(disc) / (4.0 * kappa);
  return {base - root, base + root};
}

// G_hat(x+iy) = 2F1(eta0, eta1, 1/2, x^2/(x^2+y^2)).
inline double g_hat(std::complex<double> z, double a, double kappa,
                    const SeriesControl& ctrl = {}) {
  if (!(z.imag() > 0.0)) throw domain_error("g_hat: Im(z) <= 0");
  auto [eta0, eta1] = eta_exponents(a, kappa);
  double x = z.real();
  double y = z.imag();
  double arg = x * x / (x * x + y * y);
  return hyp2f1(eta0, eta1, 0.5, arg, ctrl);
}

// G_hat at the boundary limit x -> infinity, i.e. the 2F1 value at z=1.
inline double g_hat_at_one(double a, double kappa) {
  auto [eta0, eta1] = eta_exponents(a, kappa);
  return hyp2f1_at_one(eta0, eta1, 0.5);
}

enum class ZMomentKind { finite, infinite, zero };

struct ZMomentResult {
  ZMomentKind kind;
  double value = 0.0;  // meaningful only for kind == finite
};

inline ZMomentResult z_moment(std::complex<double> z, double a,
                              double kappa) {
  if (kappa <= 0.0) throw domain_error("z_moment: kappa <= 0");
  if (!(z.imag() > 0.0)) throw domain_error("z_moment: Im(z) <= 0");
  double crit = 1.0 - kappa / 8.0;
  if (a < crit && kappa < 8.0) {
    return {ZMomentKind::finite, g_hat(z, a, kappa) / g_hat_at_one(a, kappa)};
  }
  if (a >= crit && a > 0.0) {
    return {ZMomentKind::infinite};
  }
  if (a < 0.0 && kappa >= 8.0) {
    return {ZMomentKind::zero};
  }
  throw domain_error("z_moment: parameter combination outside the moment "
                     "case table");
}

// P[X >= s] for the first trace hit on [1, infinity), kappa in (4,8).
inline double cardy_hit_prob(double s, double kappa,
                             const SeriesControl& ctrl = {}) {
  if (!(kappa > 4.0 && kappa < 8.0)) {
    throw domain_error("cardy_hit_prob: kappa must lie in (4,8)");
  }
  if (s < 1.0) throw domain_error("cardy_hit_prob: s < 1");
  double e0 = 1.0 - 4.0 / kappa;
  double e1 = 2.0 - 8.0 / kappa;
  double e2 = 2.0 - 4.0 / kappa;
  double f = (s == 1.0) ? hyp2f1_at_one(e0, e1, e2)
                        : hyp2f1(e0, e1, e2, 1.0 / s, ctrl);
  double pref = std::pow(4.0, (kappa - 4.0) / kappa) * std::sqrt(kPi);
  double denom = gamma_fn(2.0 - 4.0 / kappa) * gamma_fn(4.0 / kappa - 0.5);
  return pref * f * std::pow(s, (4.0 - kappa) / kappa) / denom;
}

// P[Y hits b before a | Y_0 = x] for the boundary Bessel-type process,
// via the scale function x^{(kappa-4)/kappa} (log x at kappa = 4).
inline double bessel_exit_prob(double x, double a, double b, double kappa) {
  if (kappa <= 0.0) throw domain_error("bessel_exit_prob: kappa <= 0");
  if (!(0.0 < a && a <= x && x <= b)) {
    throw domain_error("bessel_exit_prob: need 0 < a <= x <= b");
  }
  auto scale = [kappa](double v) {
    return (kappa == 4.0) ? std::log(v)
                          : std::pow(v, (kappa - 4.0) / kappa);
  };
  return (scale(x) - scale(a)) / (scale(b) - scale(a));
}

// h(z) = Im(theta z^b), b = 1 - 4/kappa, theta = exp(i pi (1-b)/2).
inline double swallow_harmonic(std::complex<double> z, double kappa) {
  if (!(kappa > 4.0)) throw domain_error("swallow_harmonic: kappa <= 4");
  double b = 1.0 - 4.0 / kappa;
  std::complex<double> theta = std::polar(1.0, kPi * (1.0 - b) / 2.0);
  if (z == 0.0) return 0.0;
  return (theta * std::pow(z, b)).imag();
}

struct DimExponents {
  double trace_exp;
  double boundary_exp;
};

inline DimExponents dim_exponents(double kappa) {
  if (kappa <= 0.0) throw domain_error("dim_exponents: kappa <= 0");
  DimExponents d;
  d.trace_exp = std::min(1.0 + kappa / 8.0, 2.0);
  d.boundary_exp = (kappa <= 4.0) ? 1.0 + kappa / 8.0 : 1.0 + 2.0 / kappa;
  return d;
}

inline double theta_factor(double delta, double s) {
  if (s > 1e-12) return std::pow(delta, -s);
  if (s < -1e-12) return 1.0;
  return 1.0 + std::abs(std::log(delta));
}

// Tail-bound shape C (1+x^2/y^2)^b (y/delta)^lambda theta(delta, a-lambda).
// C is a free constant; only monotone shape/dominance is ever asserted.
inline double derest_tail_bound(double x, double y, double t, double delta,
                                double b, double kappa, double C = 1.0) {
  if (!(y > 0.0 && y <= 1.0)) throw domain_error("derest_tail_bound: y");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw domain_error("derest_tail_bound: delta");
  }
  if (!(t >= 0.0 && t <= 1.0)) throw domain_error("derest_tail_bound: t");
  if (!(b >= 0.0 && b <= 1.0 + 4.0 / kappa)) {
    throw domain_error("derest_tail_bound: b outside [0, 1+4/kappa]");
  }
  ExponentPair e = exponents(b, kappa, 1);
  double r = x / y;
  return C * std::pow(1.0 + r * r, b) * std::pow(y / delta, e.lambda) *
         theta_factor(delta, e.a - e.lambda);
}

// G(s) = log(s) log(1+s) - log^2(1+s)/2 + Li2(-s); satisfies
// s (1+s)^2 G'' + s (1+s) G' = 1.
inline double transience_G(double s) {
  if (!(s > 0.0)) throw domain_error("transience_G: s <= 0");
  double l1 = std::log(s);
  double l2 = std::log1p(s);
  return l1 * l2 - 0.5 * l2 * l2 + dilog(-s);
}

}  // namespace slelab

#endif  // SLELAB_FORMULAS_HPP_
