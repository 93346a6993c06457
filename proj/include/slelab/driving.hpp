#ifndef SLELAB_DRIVING_HPP_
#define SLELAB_DRIVING_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "slelab/errors.hpp"

// Sampled driving functions xi(t) on uniform time grids, plus the scaling
// and restart transforms.  Gaussian sampling is hand-rolled Box-Muller on
// top of mt19937_64 so that seeds reproduce bit-exactly across standard
// library implementations.

namespace slelab {

enum class PathOrigin { brownian, deterministic, derived };

// splitmix64 finalizer; used to derive independent child seeds from a
// master seed and a run index, so batch results do not depend on worker
// scheduling.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t x = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

// Stream of standard Gaussians, deterministic per seed.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // Box-Muller on uniforms in (0,1].
    double u1 = ((rng_() >> 11) + 1) * 0x1.0p-53;
    double u2 = ((rng_() >> 11) + 1) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

struct DrivingPath {
  double kappa = 0.0;
  double dt = 0.0;
  std::vector<double> values;  // xi(0), xi(dt), ..., xi(n*dt); values[0] == 0
  std::uint64_t seed = 0;
  PathOrigin origin = PathOrigin::deterministic;

  double horizon() const { return dt * (values.size() - 1); }
  std::size_t steps() const { return values.size() - 1; }
};

inline DrivingPath sample_brownian(double kappa, double horizon,
                                   std::size_t n_steps, std::uint64_t seed) {
  if (kappa < 0.0) throw domain_error("sample_brownian: kappa < 0");
  if (n_steps < 1) throw domain_error("sample_brownian: n_steps < 1");
  if (!(horizon > 0.0)) throw domain_error("sample_brownian: horizon <= 0");
  DrivingPath p;
  p.kappa = kappa;
  p.dt = horizon / static_cast<double>(n_steps);
  p.seed = seed;
  p.origin = PathOrigin::brownian;
  p.values.resize(n_steps + 1);
  p.values[0] = 0.0;
  double sigma = std::sqrt(kappa * p.dt);
  GaussianStream g(seed);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    p.values[k] = p.values[k - 1] + sigma * g.next();
  }
  return p;
}

inline DrivingPath zero_path(double horizon, std::size_t n_steps) {
  DrivingPath p;
  p.kappa = 0.0;
  p.dt = horizon / static_cast<double>(n_steps);
  p.values.assign(n_steps + 1, 0.0);
  p.origin = PathOrigin::deterministic;
  return p;
}

// xi~(t) = alpha^{-1/2} xi(alpha t) on the grid dt/alpha.  Sample k of the
// output sits at time k*dt/alpha and equals alpha^{-1/2} * values[k]; only
// dyadic alpha (powers of two) are accepted per the grid contract.
inline DrivingPath rescale(const DrivingPath& path, double alpha) {
  if (!(alpha > 0.0)) throw domain_error("rescale: alpha must be > 0");
  int exp2 = 0;
  double mant = std::frexp(alpha, &exp2);
  if (mant != 0.5) {
    throw domain_error("rescale: alpha is not a power of two");
  }
  DrivingPath out = path;
  out.dt = path.dt / alpha;
  out.origin = (alpha == 1.0) ? path.origin : PathOrigin::derived;
  double s = 1.0 / std::sqrt(alpha);
  for (auto& v : out.values) v *= s;
  return out;
}

// xi~(t) = xi(t + k0*dt) - xi(k0*dt) on the remaining grid.
inline DrivingPath restart(const DrivingPath& path, std::size_t k0) {
  if (k0 >= path.values.size()) {
    throw domain_error("restart: index out of range");
  }
  DrivingPath out;
  out.kappa = path.kappa;
  out.dt = path.dt;
  out.seed = path.seed;
  out.origin = (k0 == 0) ? path.origin : PathOrigin::derived;
  out.values.reserve(path.values.size() - k0);
  double base = path.values[k0];
  for (std::size_t k = k0; k < path.values.size(); ++k) {
    out.values.push_back(path.values[k] - base);
  }
  out.values[0] = 0.0;
  return out;
}

inline void write_path_csv(const DrivingPath& path, std::ostream& os) {
  os << "t,xi\n";
  os.precision(17);
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    os << k * path.dt << ',' << path.values[k] << '\n';
  }
}

}  // namespace slelab

#endif  // SLELAB_DRIVING_HPP_
