#ifndef SLELAB_MC_HPP_
#define SLELAB_MC_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "slelab/driving.hpp"
#include "slelab/errors.hpp"
#include "slelab/formulas.hpp"
#include "slelab/geometry.hpp"
#include "slelab/loewner.hpp"

// Monte Carlo experiment harness.  Every estimator derives per-run seeds
// from (master_seed, run index) and reduces results in fixed index order,
// so output is bit-identical for any worker count.

namespace slelab {

struct MCEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
  std::uint64_t master_seed = 0;
};

struct ExperimentConfig {
  double kappa = 6.0;
  std::size_t n_runs = 1000;
  std::size_t n_steps = 4000;
  double horizon = 10.0;
  std::uint64_t master_seed = 1;
  double swallow_tol = -1.0;  // < 0: default 1e-4 sqrt(dt)
  double c_hit = 2.0;
  double stop_im = -1.0;      // < 0: default 1e-3 Im z0
  int workers = 1;

  double dt() const { return horizon / static_cast<double>(n_steps); }
  void validate() const {
    if (kappa < 0.0) throw domain_error("config: kappa < 0");
    if (n_runs < 1) throw domain_error("config: n_runs < 1");
    if (n_steps < 1) throw domain_error("config: n_steps < 1");
    if (!(horizon > 0.0)) throw domain_error("config: horizon <= 0");
    if (workers < 1) throw domain_error("config: workers < 1");
    if (c_hit <= 0.0) throw domain_error("config: c_hit <= 0");
  }
};

namespace detail {

// Runs f(run_index) for indices [0, n), any worker count, results stored
// by index.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, int workers, F&& f) {
  std::vector<T> out(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

inline MCEstimate reduce_mean(const std::vector<double>& samples,
                              std::uint64_t master_seed) {
  MCEstimate e;
  e.n = samples.size();
  e.master_seed = master_seed;
  double sum = 0.0;
  for (double s : samples) sum += s;
  e.mean = sum / e.n;
  double ss = 0.0;
  for (double s : samples) ss += (s - e.mean) * (s - e.mean);
  e.stderr_ = (e.n > 1) ? std::sqrt(ss / (e.n * (e.n - 1.0))) : 0.0;
  return e;
}

inline MCEstimate reduce_fraction(std::size_t hits, std::size_t n,
                                  std::uint64_t master_seed) {
  MCEstimate e;
  e.n = n;
  e.master_seed = master_seed;
  e.mean = static_cast<double>(hits) / n;
  e.stderr_ = std::sqrt(std::max(e.mean * (1.0 - e.mean), 0.0) / n);
  return e;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cardy variant: first hit of the trace on [1, infinity).

struct CardyResult {
  std::vector<double> s_values;
  std::vector<MCEstimate> estimates;  // P[X >= s] per s
  std::size_t undecided = 0;
};

inline CardyResult estimate_cardy(const ExperimentConfig& cfg,
                                  const std::vector<double>& s_values,
                                  double classify_threshold = 0.5) {
  cfg.validate();
  if (!(classify_threshold > 0.0 && classify_threshold < 1.0)) {
    throw domain_error("estimate_cardy: classifier threshold outside (0,1)");
  }
  if (!(cfg.kappa > 4.0 && cfg.kappa < 8.0)) {
    throw domain_error("estimate_cardy: kappa must lie in (4,8)");
  }
  for (double s : s_values) {
    if (s < 1.0) throw domain_error("estimate_cardy: s < 1");
  }
  const double dt0 = cfg.dt();
  // A near-touch of the curve at the point 1 is indistinguishable from a
  // true swallow at any fixed resolution, and the classifier ratio Y1/Ys
  // converges only slowly near the swallowing time, so classifying at the
  // first coarse hit is badly biased.  Instead the step size shrinks with
  // Y1 (dt ~ alpha^2 Y1^2 keeps the per-step noise a few percent of Y1)
  // down to a floor, and the ratio is read off only at a floor-resolution
  // hit.  Two shortcuts keep the cost bounded:
  //  - once Ys - Y1 has contracted below 1e-9 * Ys the points can only be
  //    swallowed together (the gap is non-increasing), so classify X >= s;
  //  - past the horizon the step cap grows geometrically (scale
  //    invariance), reaching exponentially long times in bounded work so
  //    the heavy t^-(1/2-2/kappa) swallowing tail resolves.
  const double alpha2 = 4e-4;
  const double dt_floor = dt0 * 1e-12;
  const double growth = 1.005;
  const std::size_t max_steps = cfg.n_steps * 512;

  struct RunOut {
    std::vector<char> ge_s;     // X >= s per s value
    std::vector<char> decided;  // per s value
  };
  auto runs = detail::parallel_map<RunOut>(
      cfg.n_runs, cfg.workers, [&](std::size_t run) {
        GaussianStream g(mix_seed(cfg.master_seed, run));
        RunOut out;
        out.ge_s.assign(s_values.size(), 0);
        out.decided.assign(s_values.size(), 0);
        for (std::size_t i = 0; i < s_values.size(); ++i) {
          if (s_values[i] == 1.0) {  // classifier tautology
            out.ge_s[i] = 1;
            out.decided[i] = 1;
            continue;
          }
          double y1 = 1.0, ys = s_values[i];
          double dt_cap = dt0, t = 0.0;
          for (std::size_t step = 0; step < max_steps; ++step) {
            if (t > cfg.horizon) dt_cap *= growth;
            double dt = std::min(dt_cap, std::max(alpha2 * y1 * y1,
                                                  dt_floor));
            double dxi = std::sqrt(cfg.kappa * dt) * g.next();
            y1 = std::sqrt(y1 * y1 + 4.0 * dt) - dxi;
            ys = std::sqrt(ys * ys + 4.0 * dt) - dxi;
            t += dt;
            if (ys - y1 <= 1e-9 * ys) {
              out.ge_s[i] = 1;
              out.decided[i] = 1;
              break;
            }
            if (y1 <= cfg.c_hit * std::sqrt(dt) &&
                dt <= dt_floor * 1.0001) {
              out.ge_s[i] = (y1 / ys > classify_threshold);
              out.decided[i] = 1;
              break;
            }
          }
        }
        return out;
      });

  CardyResult result;
  result.s_values = s_values;
  std::size_t total_pairs = cfg.n_runs * s_values.size();
  std::size_t decided_pairs = 0;
  for (const auto& r : runs) {
    for (char d : r.decided) decided_pairs += d;
  }
  result.undecided = total_pairs - decided_pairs;
  if (result.undecided * 20 > total_pairs) {
    throw numeric_error("estimate_cardy: " +
                        std::to_string(result.undecided) + " of " +
                        std::to_string(total_pairs) +
                        " runs undecided (> 5%)");
  }
  for (std::size_t i = 0; i < s_values.size(); ++i) {
    std::size_t hits = 0, decided = 0;
    for (const auto& r : runs) {
      decided += r.decided[i];
      if (r.decided[i] && r.ge_s[i]) ++hits;
    }
    result.estimates.push_back(
        detail::reduce_fraction(hits, decided, cfg.master_seed));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Derivative moment at the Im = 1 level crossing.

struct DerivativeMomentResult {
  MCEstimate estimate;  // of yhat^a E[(1+x(0)^2)^b |g'_{T0}|^a]
  double target = 0.0;  // derivative_moment_F(zhat, b, kappa)
  std::size_t excluded = 0;
};

inline DerivativeMomentResult estimate_derivative_moment(
    const ExperimentConfig& cfg, cplx zhat, double b) {
  cfg.validate();
  const double yhat = zhat.imag();
  if (!(yhat > 0.0) || yhat == 1.0) {
    throw domain_error("estimate_derivative_moment: need Im(zhat) > 0, != 1");
  }
  const int nu = (yhat > 1.0) ? -1 : 1;
  const ExponentPair exp_pair = exponents(b, cfg.kappa, nu);
  const double a = exp_pair.a;
  const double dt0 = cfg.dt();
  const double swallow_tol =
      cfg.swallow_tol >= 0.0 ? cfg.swallow_tol : default_swallow_tol(dt0);
  // Im g_t decays only polynomially with a random rate, so the Im = 1
  // crossing has a heavy-tailed time.  Past the resolved phase the step
  // grows geometrically (scale invariance) to bound the exclusion rate.
  const std::size_t max_steps = cfg.n_steps * 16;
  const double growth = 1.005;

  struct RunOut {
    double value = 0.0;
    bool ok = false;
  };
  auto runs = detail::parallel_map<RunOut>(
      cfg.n_runs, cfg.workers, [&](std::size_t run) {
        GaussianStream g(mix_seed(cfg.master_seed, run));
        cplx r = zhat;  // g_t(zhat) - xi(t), exact per-step slit maps
        double log_deriv = 0.0;
        RunOut out;
        double dt = dt0;
        for (std::size_t step = 0; step < max_steps; ++step) {
          if (step >= cfg.n_steps) dt *= growth;
          double sigma = std::sqrt(cfg.kappa * dt);
          double dxi = sigma * g.next();
          cplx d = r - dxi;
          double s_sign = (nu == -1) ? 1.0 : -1.0;  // forward vs backward
          cplx rn = sqrt_upper(d * d + s_sign * 4.0 * dt);
          if (nu == -1 && rn.imag() <= swallow_tol) {
            return out;  // swallowed before the crossing; excluded
          }
          bool crossed = (nu == -1) ? (rn.imag() <= 1.0) : (rn.imag() >= 1.0);
          if (crossed) {
            // Bisect the partial step so the crossing lands on Im = 1.
            double lo = 0.0, hi = dt;
            for (int it = 0; it < 60; ++it) {
              double mid = 0.5 * (lo + hi);
              cplx rm = sqrt_upper(d * d + s_sign * 4.0 * mid);
              bool past = (nu == -1) ? (rm.imag() <= 1.0) : (rm.imag() >= 1.0);
              (past ? hi : lo) = mid;
            }
            rn = sqrt_upper(d * d + s_sign * 4.0 * hi);
          }
          log_deriv += std::log(std::abs(d / rn));
          r = rn;
          if (crossed) {
            double x0 = r.real();
            out.value = std::pow(1.0 + x0 * x0, b) *
                        std::exp(a * log_deriv);
            out.ok = true;
            return out;
          }
        }
        return out;  // horizon exhausted; excluded
      });

  std::vector<double> samples;
  samples.reserve(cfg.n_runs);
  std::size_t excluded = 0;
  for (const auto& r : runs) {
    if (r.ok) {
      samples.push_back(r.value);
    } else {
      ++excluded;
    }
  }
  if (excluded * 100 > cfg.n_runs) {
    throw numeric_error("estimate_derivative_moment: " +
                        std::to_string(excluded) +
                        " runs excluded (> 1%)");
  }
  DerivativeMomentResult result;
  result.excluded = excluded;
  result.estimate = detail::reduce_mean(samples, cfg.master_seed);
  double scale = std::pow(yhat, a);
  result.estimate.mean *= scale;
  result.estimate.stderr_ *= scale;
  result.target = derivative_moment_F(zhat, b, cfg.kappa);
  return result;
}

// ---------------------------------------------------------------------------
// Z-moment E[Z(z)^a].

struct ZMomentMCResult {
  MCEstimate estimate;
  ZMomentResult target;
  bool heavy_tail_warning = false;
  double stop_im_used = 0.0;
};

inline ZMomentMCResult estimate_z_moment(const ExperimentConfig& cfg, cplx z,
                                         double a) {
  cfg.validate();
  if (!(z.imag() > 0.0)) throw domain_error("estimate_z_moment: Im(z) <= 0");
  double crit = 1.0 - cfg.kappa / 8.0;
  bool finite_mode = cfg.kappa < 8.0 && a < crit;
  bool zero_mode = cfg.kappa >= 8.0 && a < 0.0;
  if (!finite_mode && !zero_mode) {
    throw domain_error("estimate_z_moment: need kappa<8, a<1-kappa/8 or "
                       "kappa>=8, a<0");
  }
  const double dt0 = cfg.dt();
  const double stop_im =
      cfg.stop_im >= 0.0 ? cfg.stop_im : 1e-3 * z.imag();
  const double swallow_tol =
      cfg.swallow_tol >= 0.0 ? cfg.swallow_tol : default_swallow_tol(dt0);
  const double log_y0 = std::log(z.imag());
  // Im g_t decays only polynomially with a random rate; past the resolved
  // phase the step grows geometrically (the flow smooths as |r| ~ 2 sqrt(t),
  // keeping dt << |r|^2) so small stop_im levels stay reachable.
  const std::size_t max_steps = cfg.n_steps * 16;
  const double growth = 1.005;

  auto samples = detail::parallel_map<double>(
      cfg.n_runs, cfg.workers, [&](std::size_t run) {
        GaussianStream g(mix_seed(cfg.master_seed, run));
        cplx r = z;
        double log_deriv = 0.0;
        double dt_cap = dt0;
        for (std::size_t step = 0; step < max_steps; ++step) {
          if (step >= cfg.n_steps) dt_cap *= growth;
          // Refine near the singularity: passages with small |r| dominate
          // the |g'| accumulation and need dt << |r|^2 to be resolved.
          double dt = std::min(dt_cap,
                               std::max(1e-3 * std::norm(r), dt0 * 1e-10));
          double dxi = std::sqrt(cfg.kappa * dt) * g.next();
          cplx d = r - dxi;
          cplx rn = sqrt_upper(d * d + 4.0 * dt);
          if (rn.imag() <= swallow_tol) break;  // Z -> infinity at swallow
          log_deriv += std::log(std::abs(d / rn));
          r = rn;
          if (r.imag() <= stop_im) break;
        }
        // Z = (Im z) |g'| / Im g at the stop state.
        double log_z = log_y0 + log_deriv - std::log(r.imag());
        return std::exp(a * log_z);
      });

  ZMomentMCResult result;
  result.estimate = detail::reduce_mean(samples, cfg.master_seed);
  result.stop_im_used = stop_im;
  result.heavy_tail_warning = finite_mode && (crit - a < 0.1);
  result.target = z_moment(z, a, cfg.kappa);
  return result;
}

// ---------------------------------------------------------------------------
// Bessel exit probability.

struct BesselExitResult {
  MCEstimate estimate;  // P[hit b before a]
  double target = 0.0;
  std::size_t undecided = 0;
};

inline BesselExitResult estimate_bessel_exit(const ExperimentConfig& cfg,
                                             double x, double a, double b) {
  cfg.validate();
  if (!(0.0 < a && a < x && x < b)) {
    throw domain_error("estimate_bessel_exit: need 0 < a < x < b");
  }
  const double dt = cfg.dt();
  const double sigma = std::sqrt(cfg.kappa * dt);
  const double low = a + cfg.c_hit * std::sqrt(dt);
  const std::size_t max_steps = cfg.n_steps * 16;

  auto runs = detail::parallel_map<int>(
      cfg.n_runs, cfg.workers, [&](std::size_t run) {
        GaussianStream g(mix_seed(cfg.master_seed, run));
        double y = x;
        for (std::size_t step = 0; step < max_steps; ++step) {
          y = std::sqrt(y * y + 4.0 * dt) - sigma * g.next();
          if (y <= low) return 0;
          if (y >= b) return 1;
        }
        return -1;  // undecided
      });

  BesselExitResult result;
  std::size_t hits = 0, decided = 0;
  for (int r : runs) {
    if (r >= 0) {
      ++decided;
      hits += r;
    }
  }
  result.undecided = cfg.n_runs - decided;
  if (result.undecided * 20 > cfg.n_runs) {
    throw numeric_error("estimate_bessel_exit: " +
                        std::to_string(result.undecided) +
                        " runs undecided (> 5%)");
  }
  result.estimate = detail::reduce_fraction(hits, decided, cfg.master_seed);
  result.target = bessel_exit_prob(x, a, b, cfg.kappa);
  return result;
}

// ---------------------------------------------------------------------------
// Swallowing probability P[tau(z) <= t].

struct SwallowProbResult {
  std::vector<double> t_values;
  std::vector<MCEstimate> estimates;
};

inline SwallowProbResult estimate_swallow_prob(
    const ExperimentConfig& cfg, cplx z, const std::vector<double>& t_values) {
  cfg.validate();
  if (!(z.imag() > 0.0)) {
    throw domain_error("estimate_swallow_prob: Im(z) <= 0");
  }
  for (double t : t_values) {
    if (t > cfg.horizon) {
      throw domain_error("estimate_swallow_prob: t beyond horizon");
    }
  }
  const double dt = cfg.dt();
  const double sigma = std::sqrt(cfg.kappa * dt);
  const double swallow_tol =
      cfg.swallow_tol >= 0.0 ? cfg.swallow_tol : default_swallow_tol(dt);

  auto taus = detail::parallel_map<double>(
      cfg.n_runs, cfg.workers, [&](std::size_t run) {
        GaussianStream g(mix_seed(cfg.master_seed, run));
        cplx r = z;
        for (std::size_t step = 0; step < cfg.n_steps; ++step) {
          double dxi = sigma * g.next();
          cplx d = r - dxi;
          r = sqrt_upper(d * d + 4.0 * dt);
          if (r.imag() <= swallow_tol) {
            return (step + 1) * dt;  // discrete tau(z)
          }
        }
        return std::numeric_limits<double>::infinity();
      });

  SwallowProbResult result;
  result.t_values = t_values;
  for (double t : t_values) {
    std::size_t hits = 0;
    for (double tau : taus) hits += (tau <= t);
    result.estimates.push_back(
        detail::reduce_fraction(hits, cfg.n_runs, cfg.master_seed));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Trace dimension by box counting.

struct TraceDimensionResult {
  MCEstimate slope;        // fit on run-averaged counts; stderr across runs
  double target = 0.0;
  BoxCountResult mean_counts;  // counts field holds rounded means
};

inline TraceDimensionResult estimate_trace_dimension(
    const ExperimentConfig& cfg, const std::vector<double>& eps_schedule,
    Rect window = {-1.0, 0.2, 1.0, 1.2}) {
  cfg.validate();
  if (eps_schedule.size() < 3) {
    throw domain_error("estimate_trace_dimension: need >= 3 scales");
  }
  const double finest = eps_schedule.back();

  auto counts = detail::parallel_map<std::vector<std::size_t>>(
      cfg.n_runs, cfg.workers, [&](std::size_t run) {
        DrivingPath path =
            cfg.kappa == 0.0
                ? zero_path(cfg.horizon, cfg.n_steps)
                : sample_brownian(cfg.kappa, cfg.horizon, cfg.n_steps,
                                  mix_seed(cfg.master_seed, run));
        LoewnerChain chain = build_chain(path);
        TracePolyline poly = trace(chain);
        auto pts = resample_polyline(poly, finest / 4.0);
        return box_count(pts, window, eps_schedule).counts;
      });

  // Run-averaged counts.
  std::vector<double> mean(eps_schedule.size(), 0.0);
  for (const auto& c : counts) {
    for (std::size_t i = 0; i < c.size(); ++i) mean[i] += c[i];
  }
  for (double& m : mean) m /= cfg.n_runs;
  bool any = false;
  for (double m : mean) any = any || (m > 0.0);
  if (!any) {
    throw numeric_error("estimate_trace_dimension: window disjoint from "
                        "trace range");
  }
  BoxCountResult avg;
  avg.window = window;
  avg.epsilons = eps_schedule;
  double sxx = 0, sxy = 0, mx = 0, my = 0;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
    avg.counts.push_back(static_cast<std::size_t>(std::llround(mean[i])));
    if (mean[i] <= 0.0) continue;
    xs.push_back(std::log(1.0 / eps_schedule[i]));
    ys.push_back(std::log(mean[i]));
    mx += xs.back();
    my += ys.back();
  }
  if (xs.size() < 3) {
    throw numeric_error("estimate_trace_dimension: fewer than 3 scales "
                        "with nonzero mean counts");
  }
  mx /= xs.size();
  my /= ys.size();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }

  // Per-run slopes give the spread.
  std::vector<double> slopes;
  for (const auto& c : counts) {
    bool ok = true;
    for (auto v : c) ok = ok && (v > 0);
    if (!ok) continue;
    BoxCountResult one;
    one.window = window;
    one.epsilons = eps_schedule;
    one.counts = c;
    slopes.push_back(fit_dimension(one).slope);
  }
  TraceDimensionResult result;
  result.mean_counts = avg;
  result.slope = slopes.empty()
                     ? MCEstimate{}
                     : detail::reduce_mean(slopes, cfg.master_seed);
  result.slope.mean = sxy / sxx;  // point estimate from E[N]
  result.slope.master_seed = cfg.master_seed;
  // kappa = 0 is the deterministic slit, a smooth curve of dimension 1.
  result.target = cfg.kappa > 0.0 ? dim_exponents(cfg.kappa).trace_exp : 1.0;
  return result;
}

// ---------------------------------------------------------------------------
// Hull-boundary dimension by Whitney cell counts.

struct BoundaryDimensionResult {
  MCEstimate slope;
  double target = 0.0;
  std::map<int, std::size_t> total_histogram;
};

inline BoundaryDimensionResult estimate_boundary_dimension(
    const ExperimentConfig& cfg, double h, const std::vector<int>& levels) {
  cfg.validate();
  if (!(cfg.kappa > 4.0)) {
    throw domain_error("estimate_boundary_dimension: kappa <= 4; the "
                       "boundary is the trace, use the trace estimator");
  }
  if (levels.size() < 3) {
    throw domain_error("estimate_boundary_dimension: need >= 3 levels");
  }
  int max_level = *std::max_element(levels.begin(), levels.end());
  double min_size = std::ldexp(1.0, -max_level);
  Rect region{-2.5, min_size / 2.0, 2.5, 2.0};

  auto hists = detail::parallel_map<std::map<int, std::size_t>>(
      cfg.n_runs, cfg.workers, [&](std::size_t run) {
        DrivingPath path = sample_brownian(cfg.kappa, cfg.horizon,
                                           cfg.n_steps,
                                           mix_seed(cfg.master_seed, run));
        LoewnerChain chain = build_chain(path);
        TracePolyline poly = trace(chain);
        auto swallowed = [&chain](cplx p) {
          return forward_map(chain, p, chain.steps()).swallowed;
        };
        auto cells = whitney_decompose(poly, swallowed, region, min_size);
        // Keep cells whose size is set by the hull boundary, not by the
        // real axis: distance to the trace comparable to the cell size
        // (the sandwich allows up to 8 d(Q) plus sampling slack).  Cells
        // sized by their height above a distant stretch of R would
        // otherwise add a slope-1 component.
        SegmentGrid near(poly);
        std::vector<WhitneyCell> kept;
        for (const auto& q : cells) {
          if (q.top() < h) continue;
          if (near.dist(q.center(), 12.0 * q.size) > 10.0 * q.size) continue;
          kept.push_back(q);
        }
        return whitney_histogram(kept);
      });

  std::map<int, double> mean_w;
  BoundaryDimensionResult result;
  for (const auto& hist : hists) {
    for (const auto& [n, w] : hist) {
      mean_w[n] += w;
      result.total_histogram[n] += w;
    }
  }
  std::size_t finest_total = result.total_histogram[max_level];
  if (finest_total < 50) {
    throw numeric_error("estimate_boundary_dimension: only " +
                        std::to_string(finest_total) +
                        " cells at the finest level (< 50)");
  }
  std::vector<double> xs, ys;
  for (int n : levels) {
    double w = mean_w.count(n) ? mean_w[n] / cfg.n_runs : 0.0;
    if (w <= 0.0) continue;
    xs.push_back(n * std::log(2.0));
    ys.push_back(std::log(w));
  }
  if (xs.size() < 3) {
    throw numeric_error("estimate_boundary_dimension: insufficient levels "
                        "with cells");
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
  mx /= xs.size();
  my /= ys.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  // Per-run slopes for the spread, where defined.
  std::vector<double> slopes;
  for (const auto& hist : hists) {
    std::vector<double> x1, y1;
    for (int n : levels) {
      auto it = hist.find(n);
      if (it == hist.end() || it->second == 0) continue;
      x1.push_back(n * std::log(2.0));
      y1.push_back(std::log(static_cast<double>(it->second)));
    }
    if (x1.size() < 3) continue;
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < x1.size(); ++i) { m1 += x1[i]; m2 += y1[i]; }
    m1 /= x1.size();
    m2 /= y1.size();
    double a1 = 0, a2 = 0;
    for (std::size_t i = 0; i < x1.size(); ++i) {
      a1 += (x1[i] - m1) * (x1[i] - m1);
      a2 += (x1[i] - m1) * (y1[i] - m2);
    }
    slopes.push_back(a2 / a1);
  }
  result.slope = slopes.empty()
                     ? MCEstimate{}
                     : detail::reduce_mean(slopes, cfg.master_seed);
  result.slope.mean = sxy / sxx;
  result.slope.master_seed = cfg.master_seed;
  result.target = dim_exponents(cfg.kappa).boundary_exp;
  return result;
}

// ---------------------------------------------------------------------------
// Transience profile.

struct TransienceResult {
  std::vector<double> checkpoints;
  std::vector<MCEstimate> min_abs;  // mean of min |gamma(t)|, t >= checkpoint
  double frac_increasing = 0.0;     // runs with strictly increasing profile
};

inline TransienceResult estimate_transience(
    const ExperimentConfig& cfg, const std::vector<double>& checkpoints,
    bool run_anyway_kappa8 = false) {
  cfg.validate();
  if (cfg.kappa == 8.0 && !run_anyway_kappa8) {
    throw domain_error("estimate_transience: kappa = 8 excluded (pass "
                       "run_anyway to override)");
  }
  for (double t : checkpoints) {
    if (t > cfg.horizon) {
      throw domain_error("estimate_transience: checkpoint beyond horizon");
    }
  }

  auto profiles = detail::parallel_map<std::vector<double>>(
      cfg.n_runs, cfg.workers, [&](std::size_t run) {
        DrivingPath path =
            cfg.kappa == 0.0
                ? zero_path(cfg.horizon, cfg.n_steps)
                : sample_brownian(cfg.kappa, cfg.horizon, cfg.n_steps,
                                  mix_seed(cfg.master_seed, run));
        LoewnerChain chain = build_chain(path);
        TracePolyline poly = trace(chain);
        std::vector<double> mins(checkpoints.size(),
                                 std::numeric_limits<double>::max());
        for (std::size_t k = 1; k < poly.points.size(); ++k) {
          double t = k * poly.dt;
          double r = std::abs(poly.points[k]);
          for (std::size_t i = 0; i < checkpoints.size(); ++i) {
            if (t >= checkpoints[i]) mins[i] = std::min(mins[i], r);
          }
        }
        return mins;
      });

  TransienceResult result;
  result.checkpoints = checkpoints;
  std::size_t increasing = 0;
  for (const auto& p : profiles) {
    bool inc = true;
    for (std::size_t i = 1; i < p.size(); ++i) inc = inc && (p[i] > p[i - 1]);
    increasing += inc;
  }
  result.frac_increasing = static_cast<double>(increasing) / cfg.n_runs;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    std::vector<double> vals;
    vals.reserve(cfg.n_runs);
    for (const auto& p : profiles) vals.push_back(p[i]);
    result.min_abs.push_back(detail::reduce_mean(vals, cfg.master_seed));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Derivative tail vs the closed-form bound shape.

struct DerestTailResult {
  MCEstimate empirical;   // P[|f_t'(x+iy)| >= delta / y]
  double bound_shape;     // derest_tail_bound with C = 1
};

inline DerestTailResult estimate_derest_tail(const ExperimentConfig& cfg,
                                             double x, double y, double t,
                                             double delta, double b) {
  cfg.validate();
  double bound = derest_tail_bound(x, y, t, delta, b, cfg.kappa);
  if (t > cfg.horizon) {
    throw domain_error("estimate_derest_tail: t beyond horizon");
  }
  const double dt = cfg.dt();
  auto k = static_cast<std::size_t>(std::llround(t / dt));
  const double threshold = delta / y;

  auto hits = detail::parallel_map<int>(
      cfg.n_runs, cfg.workers, [&](std::size_t run) {
        DrivingPath path = sample_brownian(cfg.kappa, cfg.horizon,
                                           cfg.n_steps,
                                           mix_seed(cfg.master_seed, run));
        BackwardState st =
            backward_flow_with_derivative(path, cplx(x, y), k);
        return std::abs(st.deriv) >= threshold ? 1 : 0;
      });

  std::size_t count = 0;
  for (int h : hits) count += h;
  DerestTailResult result;
  result.empirical = detail::reduce_fraction(count, cfg.n_runs,
                                             cfg.master_seed);
  result.bound_shape = bound;
  return result;
}

}  // namespace slelab

#endif  // SLELAB_MC_HPP_
