#ifndef SLELAB_LOEWNER_HPP_
#define SLELAB_LOEWNER_HPP_

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "slelab/driving.hpp"
#include "slelab/errors.hpp"

// Forward Loewner flow under piecewise-constant driving (point tracking,
// derivatives, swallowing, level crossings), backward flow, and trace
// extraction by inverse slit-map composition.

namespace slelab {

using cplx = std::complex<double>;

// sqrt with the branch chosen so the result has non-negative imaginary
// part.  The branch cut is the sole source of topology errors, hence the
// explicit, cancellation-stable form.
inline cplx sqrt_upper(double u, double v) {
  double m = std::sqrt(u * u + v * v);
  if (u >= 0.0) {
    double re = std::sqrt(0.5 * (m + u));
    double im = (re > 0.0) ? std::abs(v) / (2.0 * re) : 0.0;
    return {v >= 0.0 ? re : -re, im};
  }
  double im = std::sqrt(0.5 * (m - u));
  double re = (im > 0.0) ? v / (2.0 * im) : 0.0;
  return {re, im};
}

inline cplx sqrt_upper(cplx s) { return sqrt_upper(s.real(), s.imag()); }

inline double default_swallow_tol(double dt) { return 1e-4 * std::sqrt(dt); }

struct LoewnerChain {
  double dt = 0.0;
  std::vector<double> centers;  // c_1..c_n, right-endpoint driving values
  double kappa = 0.0;           // metadata only
  std::uint64_t seed = 0;

  std::size_t steps() const { return centers.size(); }
  double total_time() const { return dt * centers.size(); }
};

inline LoewnerChain build_chain(const DrivingPath& path) {
  if (path.values.size() < 2) {
    throw domain_error("build_chain: path needs at least 2 samples");
  }
  LoewnerChain chain;
  chain.dt = path.dt;
  chain.kappa = path.kappa;
  chain.seed = path.seed;
  chain.centers.assign(path.values.begin() + 1, path.values.end());
  return chain;
}

struct StepResult {
  cplx w;
  bool swallowed = false;
};

// One forward slit-map step: w -> c + sqrt((w-c)^2 + 4 dt).
inline StepResult forward_step(cplx w, double c, double dt,
                               double swallow_tol) {
  double dx = w.real() - c;
  double dy = w.imag();
  cplx q = sqrt_upper(dx * dx - dy * dy + 4.0 * dt, 2.0 * dx * dy);
  StepResult r;
  r.w = cplx(c + q.real(), q.imag());
  r.swallowed = (dy > 0.0) && (q.imag() <= swallow_tol);
  return r;
}

inline StepResult forward_step(cplx w, double c, double dt) {
  return forward_step(w, c, dt, default_swallow_tol(dt));
}

struct FlowResult {
  cplx w;
  bool swallowed = false;
  std::size_t swallow_step = 0;  // valid when swallowed
};

inline FlowResult forward_map(const LoewnerChain& chain, cplx z,
                              std::size_t k,
                              double swallow_tol = -1.0) {
  if (k > chain.steps()) throw domain_error("forward_map: k out of range");
  if (swallow_tol < 0.0) swallow_tol = default_swallow_tol(chain.dt);
  FlowResult r;
  r.w = z;
  for (std::size_t j = 0; j < k; ++j) {
    StepResult s = forward_step(r.w, chain.centers[j], chain.dt, swallow_tol);
    r.w = s.w;
    if (s.swallowed) {
      r.swallowed = true;
      r.swallow_step = j + 1;
      return r;
    }
  }
  return r;
}

// Exact chain-rule derivative of the composed slit maps:
// product of (w_j - c_j) / sqrt((w_j - c_j)^2 + 4 dt).
inline cplx forward_derivative(const LoewnerChain& chain, cplx z,
                               std::size_t k,
                               double swallow_tol = -1.0) {
  if (k > chain.steps()) {
    throw domain_error("forward_derivative: k out of range");
  }
  if (swallow_tol < 0.0) swallow_tol = default_swallow_tol(chain.dt);
  cplx w = z;
  cplx deriv = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    double c = chain.centers[j];
    StepResult s = forward_step(w, c, chain.dt, swallow_tol);
    if (s.swallowed) {
      throw numeric_error("forward_derivative: point swallowed at step " +
                          std::to_string(j + 1));
    }
    deriv *= (w - c) / (s.w - c);
    w = s.w;
  }
  return deriv;
}

struct TrackedPoint {
  cplx z0;
  cplx g;                       // g_t(z0) at stop
  cplx gprime = 1.0;            // g_t'(z0) at stop
  std::size_t step = 0;         // steps taken
  bool swallowed = false;
  std::optional<std::size_t> tau_step;  // discrete swallow time index
  double u = 0.0;               // log Im g at stop
  double psi = 1.0;             // (Im z0 / Im g) |g'|
  double z_estimate = 0.0;      // (Im z0) |g'| / Im g at stop
  double stop_im_used = 0.0;
  // First step index at which u crosses each requested level (u decreases).
  std::vector<std::optional<std::size_t>> level_steps;
  // Re(g - xi) and |g'| at each level crossing.
  std::vector<double> level_x;
  std::vector<double> level_abs_gprime;
};

// Steps z0 forward recording g, g', u = log Im g, psi, and the first
// crossing of each requested u level.  Stops at swallow, at Im <= stop_im,
// or at chain end.
inline TrackedPoint track_point(const LoewnerChain& chain, cplx z0,
                                const std::vector<double>& levels = {},
                                double stop_im = -1.0,
                                double swallow_tol = -1.0) {
  if (!(z0.imag() > 0.0)) throw domain_error("track_point: Im(z0) <= 0");
  if (stop_im < 0.0) stop_im = 1e-3 * z0.imag();
  if (swallow_tol < 0.0) swallow_tol = default_swallow_tol(chain.dt);
  TrackedPoint tp;
  tp.z0 = z0;
  tp.g = z0;
  tp.u = std::log(z0.imag());
  tp.stop_im_used = stop_im;
  tp.level_steps.assign(levels.size(), std::nullopt);
  tp.level_x.assign(levels.size(), 0.0);
  tp.level_abs_gprime.assign(levels.size(), 0.0);
  for (std::size_t j = 0; j < chain.steps(); ++j) {
    double c = chain.centers[j];
    StepResult s = forward_step(tp.g, c, chain.dt, swallow_tol);
    if (s.swallowed) {
      tp.swallowed = true;
      tp.tau_step = j + 1;
      tp.step = j + 1;
      break;
    }
    tp.gprime *= (tp.g - c) / (s.w - c);
    tp.g = s.w;
    tp.step = j + 1;
    tp.u = std::log(tp.g.imag());
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (!tp.level_steps[i] && tp.u <= levels[i]) {
        tp.level_steps[i] = j + 1;
        tp.level_x[i] = tp.g.real() - c;
        tp.level_abs_gprime[i] = std::abs(tp.gprime);
      }
    }
    if (tp.g.imag() <= stop_im) break;
  }
  if (!tp.swallowed) {
    tp.psi = z0.imag() / tp.g.imag() * std::abs(tp.gprime);
    tp.z_estimate = tp.psi;
  }
  return tp;
}

struct TracePolyline {
  std::vector<cplx> points;  // gamma(t_k), k = 0..n; points[0] == 0
  double dt = 0.0;
  double kappa = 0.0;
  std::uint64_t seed = 0;
};

// Trace by the zipper: the tip at step k is the inverse slit-map
// composition applied to c_k + 2i sqrt(dt).  O(n^2) total; the inner sweep
// runs a small fixed block of tips at once to break the sqrt dependency
// chain, and is allocation-free.
inline TracePolyline trace(const LoewnerChain& chain) {
  constexpr std::size_t B = 8;
  const double dt = chain.dt;
  const double four_dt = 4.0 * dt;
  const double tip = 2.0 * std::sqrt(dt);
  const std::size_t n = chain.steps();
  TracePolyline poly;
  poly.dt = dt;
  poly.kappa = chain.kappa;
  poly.seed = chain.seed;
  poly.points.resize(n + 1);
  poly.points[0] = 0.0;
  const double* c = chain.centers.data();
  double wx[B], wy[B];
  for (std::size_t k0 = 1; k0 <= n; k0 += B) {
    const std::size_t kend = std::min(k0 + B - 1, n);
    const std::size_t lanes = kend - k0 + 1;
    for (std::size_t l = 0; l < lanes; ++l) {
      wx[l] = c[k0 + l - 1];  // c_{k0+l}
      wy[l] = tip;
    }
    // Ramp-in: steps j in [k0, kend-1] apply only to lanes with k > j.
    for (std::size_t j = kend - 1; j >= k0; --j) {
      const double cj = c[j - 1];
      for (std::size_t l = j - k0 + 1; l < lanes; ++l) {
        double dx = wx[l] - cj;
        double dy = wy[l];
        cplx q = sqrt_upper(dx * dx - dy * dy - four_dt, 2.0 * dx * dy);
        wx[l] = cj + q.real();
        wy[l] = q.imag();
      }
    }
    // Steady sweep: all lanes active.
    for (std::size_t j = k0 - 1; j >= 1; --j) {
      const double cj = c[j - 1];
      for (std::size_t l = 0; l < lanes; ++l) {
        double dx = wx[l] - cj;
        double dy = wy[l];
        cplx q = sqrt_upper(dx * dx - dy * dy - four_dt, 2.0 * dx * dy);
        wx[l] = cj + q.real();
        wy[l] = q.imag();
      }
    }
    for (std::size_t l = 0; l < lanes; ++l) {
      poly.points[k0 + l] = cplx(wx[l], std::max(0.0, wy[l]));
    }
  }
  return poly;
}

// Simulates g_{-t}(z) by iterating inverse steps with a fresh driving
// path; the imaginary part is non-decreasing along the flow.
inline cplx backward_flow(const DrivingPath& path, cplx z, std::size_t k) {
  if (!(z.imag() > 0.0)) throw domain_error("backward_flow: Im(z) <= 0");
  if (k > path.steps()) throw domain_error("backward_flow: k out of range");
  cplx w = z;
  const double four_dt = 4.0 * path.dt;
  for (std::size_t j = 1; j <= k; ++j) {
    double cj = path.values[j];
    double dx = w.real() - cj;
    double dy = w.imag();
    cplx q = sqrt_upper(dx * dx - dy * dy - four_dt, 2.0 * dx * dy);
    w = cplx(cj + q.real(), q.imag());
  }
  return w;
}

struct BackwardState {
  cplx w;
  cplx deriv = 1.0;
};

// Backward flow with the chain-rule derivative of the composed inverse
// steps carried along.
inline BackwardState backward_flow_with_derivative(const DrivingPath& path,
                                                   cplx z, std::size_t k) {
  if (!(z.imag() > 0.0)) {
    throw domain_error("backward_flow_with_derivative: Im(z) <= 0");
  }
  if (k > path.steps()) {
    throw domain_error("backward_flow_with_derivative: k out of range");
  }
  BackwardState st;
  st.w = z;
  const double four_dt = 4.0 * path.dt;
  for (std::size_t j = 1; j <= k; ++j) {
    double cj = path.values[j];
    cplx d = st.w - cj;
    cplx q = sqrt_upper(d * d - four_dt);
    st.deriv *= d / q;
    st.w = cj + q;
  }
  return st;
}

inline void write_trace_csv(const TracePolyline& poly, std::ostream& os) {
  os << "t,re,im\n";
  os.precision(17);
  for (std::size_t k = 0; k < poly.points.size(); ++k) {
    os << k * poly.dt << ',' << poly.points[k].real() << ','
       << poly.points[k].imag() << '\n';
  }
}

// Fixed viewBox mapping [-3,3]x[0,3] -> 1000x500, stroke width 1 px.
inline void write_trace_svg(const TracePolyline& poly, std::ostream& os) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 500\">\n"
     << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" "
        "points=\"";
  os.precision(6);
  for (const cplx& p : poly.points) {
    double x = (p.real() + 3.0) / 6.0 * 1000.0;
    double y = 500.0 - p.imag() / 3.0 * 500.0;
    os << x << ',' << y << ' ';
  }
  os << "\"/>\n</svg>\n";
}

}  // namespace slelab

#endif  // SLELAB_LOEWNER_HPP_
