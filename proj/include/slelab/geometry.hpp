#ifndef SLELAB_GEOMETRY_HPP_
#define SLELAB_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "slelab/errors.hpp"
#include "slelab/loewner.hpp"

// Geometric estimators on simulated traces: box counting, dimension fits,
// distance queries, Whitney decomposition, phase diagnostics.

namespace slelab {

struct Rect {
  double x0, y0, x1, y1;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(cplx p) const {
    return p.real() >= x0 && p.real() <= x1 && p.imag() >= y0 &&
           p.imag() <= y1;
  }
};

namespace detail {

inline std::int64_t cell_key(std::int64_t ix, std::int64_t iy) {
  return (ix << 32) ^ (iy & 0xffffffffLL);
}

inline double point_segment_dist(cplx p, cplx a, cplx b) {
  cplx ab = b - a;
  double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p.real() - a.real()) * ab.real() +
              (p.imag() - a.imag()) * ab.imag()) /
             len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

inline double segment_segment_dist(cplx a, cplx b, cplx c, cplx d) {
  // Proper intersection means distance zero; otherwise the minimum is
  // attained at an endpoint.
  auto orient = [](cplx p, cplx q, cplx r) {
    return (q.real() - p.real()) * (r.imag() - p.imag()) -
           (q.imag() - p.imag()) * (r.real() - p.real());
  };
  double o1 = orient(a, b, c), o2 = orient(a, b, d);
  double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0))) return 0.0;
  return std::min(std::min(point_segment_dist(c, a, b),
                           point_segment_dist(d, a, b)),
                  std::min(point_segment_dist(a, c, d),
                           point_segment_dist(b, c, d)));
}

}  // namespace detail

struct BoxCountResult {
  std::vector<double> epsilons;
  std::vector<std::size_t> counts;
  Rect window;
};

// Counts dyadic grid boxes of side eps meeting the point set, clipped to
// the window.
inline BoxCountResult box_count(const std::vector<cplx>& points,
                                const Rect& window,
                                const std::vector<double>& eps_list) {
  if (window.width() <= 0.0 || window.height() <= 0.0) {
    throw domain_error("box_count: degenerate window");
  }
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (eps_list[i] >= eps_list[i - 1]) {
      throw domain_error("box_count: eps_list must be decreasing");
    }
  }
  BoxCountResult result;
  result.window = window;
  result.epsilons = eps_list;
  for (double eps : eps_list) {
    std::unordered_set<std::int64_t> occupied;
    for (const cplx& p : points) {
      if (!window.contains(p)) continue;
      auto ix = static_cast<std::int64_t>(std::floor(p.real() / eps));
      auto iy = static_cast<std::int64_t>(std::floor(p.imag() / eps));
      occupied.insert(detail::cell_key(ix, iy));
    }
    result.counts.push_back(occupied.size());
  }
  return result;
}

struct DimensionFit {
  double slope;
  double r2;
};

// OLS slope of log N against log 1/eps over scales inside [eps_min, eps_max].
inline DimensionFit fit_dimension(const BoxCountResult& result,
                                  double eps_min = 0.0,
                                  double eps_max =
                                      std::numeric_limits<double>::max()) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < result.epsilons.size(); ++i) {
    double eps = result.epsilons[i];
    if (eps < eps_min || eps > eps_max) continue;
    if (result.counts[i] == 0) continue;
    xs.push_back(std::log(1.0 / eps));
    ys.push_back(std::log(static_cast<double>(result.counts[i])));
  }
  std::size_t n = xs.size();
  if (n < 3) throw domain_error("fit_dimension: fewer than 3 usable scales");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) { mx += xs[i]; my += ys[i]; }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  DimensionFit fit;
  fit.slope = sxy / sxx;
  fit.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

// Exact Euclidean distance to the union of trace segments; brute force.
inline double dist_to_polyline(cplx z, const TracePolyline& trace) {
  if (trace.points.empty()) {
    throw domain_error("dist_to_polyline: empty polyline");
  }
  if (trace.points.size() == 1) return std::abs(z - trace.points[0]);
  double best = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i + 1 < trace.points.size(); ++i) {
    best = std::min(best, detail::point_segment_dist(z, trace.points[i],
                                                     trace.points[i + 1]));
  }
  return best;
}

// Uniform spatial hash over the trace segments for capped nearest-distance
// queries; the brute-force path above stays as the test oracle.
class SegmentGrid {
 public:
  explicit SegmentGrid(const TracePolyline& trace, double cell = 0.0)
      : points_(trace.points) {
    if (points_.size() < 2) {
      single_ = true;
      return;
    }
    if (cell <= 0.0) {
      // Heuristic: mean segment length, clamped away from zero.
      double total = 0.0;
      for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        total += std::abs(points_[i + 1] - points_[i]);
      }
      cell = std::max(total / (points_.size() - 1), 1e-6);
    }
    cell_ = cell;
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
      cplx a = points_[i], b = points_[i + 1];
      auto ix0 = idx(std::min(a.real(), b.real()));
      auto ix1 = idx(std::max(a.real(), b.real()));
      auto iy0 = idx(std::min(a.imag(), b.imag()));
      auto iy1 = idx(std::max(a.imag(), b.imag()));
      for (auto ix = ix0; ix <= ix1; ++ix) {
        for (auto iy = iy0; iy <= iy1; ++iy) {
          buckets_[detail::cell_key(ix, iy)].push_back(i);
        }
      }
    }
  }

  // min(distance to trace, cap); expanding ring search.
  double dist(cplx p, double cap) const {
    if (single_) {
      return points_.empty() ? cap : std::min(cap, std::abs(p - points_[0]));
    }
    double best = cap;
    auto cx = idx(p.real());
    auto cy = idx(p.imag());
    auto max_ring =
        static_cast<std::int64_t>(std::ceil(cap / cell_)) + 1;
    for (std::int64_t r = 0; r <= max_ring; ++r) {
      if (static_cast<double>(r - 1) * cell_ >= best) break;
      for (std::int64_t ix = cx - r; ix <= cx + r; ++ix) {
        for (std::int64_t iy = cy - r; iy <= cy + r; ++iy) {
          if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != r) continue;
          auto it = buckets_.find(detail::cell_key(ix, iy));
          if (it == buckets_.end()) continue;
          for (std::size_t seg : it->second) {
            best = std::min(best, detail::point_segment_dist(
                                      p, points_[seg], points_[seg + 1]));
          }
        }
      }
    }
    return best;
  }

 private:
  std::int64_t idx(double v) const {
    return static_cast<std::int64_t>(std::floor(v / cell_));
  }

  std::vector<cplx> points_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets_;
  double cell_ = 1.0;
  bool single_ = false;
};

struct WhitneyCell {
  cplx corner;              // lower-left corner
  double size;              // d(Q), a power of two
  double dist_to_boundary;  // discrete dist(Q, boundary) estimate

  double top() const { return corner.imag() + size; }
  cplx center() const { return corner + cplx(size / 2.0, size / 2.0); }
};

// Maximal dyadic squares Q inside `region` with d(Q) <= dist(Q, boundary),
// center not swallowed, and Q in the open upper half-plane.  dist(Q, b) is
// estimated as min over the corners and center of min(dist to trace, Im)
// minus the half-diagonal.  Maximality is enforced against the global
// dyadic grid: a square is emitted only if its parent fails the test.
inline std::vector<WhitneyCell> whitney_decompose(
    const TracePolyline& trace,
    const std::function<bool(cplx)>& swallowed_oracle, const Rect& region,
    double min_size) {
  if (!(region.y0 > 0.0)) {
    throw domain_error("whitney_decompose: region must lie in {Im > 0}");
  }
  if (!(min_size > 0.0)) {
    throw domain_error("whitney_decompose: min_size must be positive");
  }
  SegmentGrid grid(trace, min_size * 4.0);
  const double half_diag = std::sqrt(2.0) / 2.0;

  auto boundary_dist = [&](double x0, double y0, double d) {
    double cap = 20.0 * d;
    double f = cap;
    const cplx samples[5] = {{x0, y0},
                             {x0 + d, y0},
                             {x0, y0 + d},
                             {x0 + d, y0 + d},
                             {x0 + d / 2.0, y0 + d / 2.0}};
    for (const cplx& p : samples) {
      f = std::min(f, std::min(grid.dist(p, cap), p.imag()));
    }
    return f - half_diag * d;
  };

  struct Key {
    int level;
    std::int64_t ix, iy;
    bool operator==(const Key& o) const {
      return level == o.level && ix == o.ix && iy == o.iy;
    }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = static_cast<std::uint64_t>(k.level) * 0x9E3779B9ULL;
      h ^= static_cast<std::uint64_t>(k.ix) * 0xBF58476D1CE4E5B9ULL;
      h ^= static_cast<std::uint64_t>(k.iy) * 0x94D049BB133111EBULL;
      return static_cast<std::size_t>(h ^ (h >> 29));
    }
  };
  std::unordered_map<Key, bool, KeyHash> accept_cache;

  std::function<bool(int, std::int64_t, std::int64_t)> acceptable =
      [&](int level, std::int64_t ix, std::int64_t iy) {
        Key key{level, ix, iy};
        auto it = accept_cache.find(key);
        if (it != accept_cache.end()) return it->second;
        double d = std::ldexp(1.0, level);
        double x0 = ix * d;
        double y0 = iy * d;
        bool ok = y0 > 0.0;
        if (ok) {
          cplx center(x0 + d / 2.0, y0 + d / 2.0);
          ok = !swallowed_oracle(center) && d <= boundary_dist(x0, y0, d);
        }
        accept_cache.emplace(key, ok);
        return ok;
      };

  int min_level = static_cast<int>(std::llround(std::log2(min_size)));
  if (std::ldexp(1.0, min_level) != min_size) {
    throw domain_error("whitney_decompose: min_size must be a power of two");
  }
  double max_dim = std::max(region.width(), region.height());
  int max_level = static_cast<int>(std::floor(std::log2(max_dim)));

  std::vector<WhitneyCell> cells;
  for (int level = min_level; level <= max_level; ++level) {
    double d = std::ldexp(1.0, level);
    auto ix0 = static_cast<std::int64_t>(std::ceil(region.x0 / d));
    auto ix1 = static_cast<std::int64_t>(std::floor(region.x1 / d)) - 1;
    auto iy0 = static_cast<std::int64_t>(std::ceil(region.y0 / d));
    auto iy1 = static_cast<std::int64_t>(std::floor(region.y1 / d)) - 1;
    for (auto ix = ix0; ix <= ix1; ++ix) {
      for (auto iy = iy0; iy <= iy1; ++iy) {
        if (!acceptable(level, ix, iy)) continue;
        // floor-div by 2 for the parent index in the global grid
        auto pix = (ix >= 0) ? ix / 2 : (ix - 1) / 2;
        auto piy = (iy >= 0) ? iy / 2 : (iy - 1) / 2;
        if (acceptable(level + 1, pix, piy)) continue;
        WhitneyCell cell;
        cell.corner = cplx(ix * d, iy * d);
        cell.size = d;
        cell.dist_to_boundary = boundary_dist(ix * d, iy * d, d);
        cells.push_back(cell);
      }
    }
  }
  // Deterministic order independent of traversal: size, then corner.
  std::sort(cells.begin(), cells.end(),
            [](const WhitneyCell& a, const WhitneyCell& b) {
              if (a.size != b.size) return a.size < b.size;
              if (a.corner.real() != b.corner.real()) {
                return a.corner.real() < b.corner.real();
              }
              return a.corner.imag() < b.corner.imag();
            });
  return cells;
}

// S_h(a) = sum of d(Q)^a over cells with boundary distance <= cap and
// top edge >= h.
inline double whitney_sum(const std::vector<WhitneyCell>& cells, double h,
                          double a, double hull_dist_cap = 1.0) {
  if (!(h > 0.0 && h < 1.0)) throw domain_error("whitney_sum: h not in (0,1)");
  double sum = 0.0;
  for (const WhitneyCell& q : cells) {
    if (q.dist_to_boundary > hull_dist_cap) continue;
    if (q.top() < h) continue;
    sum += std::pow(q.size, a);
  }
  return sum;
}

// W(n) = number of cells of size 2^{-n}.
inline std::map<int, std::size_t> whitney_histogram(
    const std::vector<WhitneyCell>& cells) {
  std::map<int, std::size_t> hist;
  for (const WhitneyCell& q : cells) {
    int n = static_cast<int>(std::llround(-std::log2(q.size)));
    ++hist[n];
  }
  return hist;
}

// Number of non-adjacent segment pairs at distance < tol.
inline std::size_t self_intersections(const TracePolyline& trace,
                                      double tol) {
  if (!(tol > 0.0)) throw domain_error("self_intersections: tol <= 0");
  if (trace.points.size() < 4) return 0;
  std::size_t count = 0;
  const auto& p = trace.points;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    double ix0 = std::min(p[i].real(), p[i + 1].real()) - tol;
    double ix1 = std::max(p[i].real(), p[i + 1].real()) + tol;
    double iy0 = std::min(p[i].imag(), p[i + 1].imag()) - tol;
    double iy1 = std::max(p[i].imag(), p[i + 1].imag()) + tol;
    // Segments within two indices are treated as adjacent: a tight turn of
    // the discrete curve brings segment i and segment i+2 within one step
    // length of each other without the curve revisiting any point.
    for (std::size_t j = i + 3; j + 1 < p.size(); ++j) {
      if (std::min(p[j].real(), p[j + 1].real()) > ix1 ||
          std::max(p[j].real(), p[j + 1].real()) < ix0 ||
          std::min(p[j].imag(), p[j + 1].imag()) > iy1 ||
          std::max(p[j].imag(), p[j + 1].imag()) < iy0) {
        continue;
      }
      if (detail::segment_segment_dist(p[i], p[i + 1], p[j], p[j + 1]) <
          tol) {
        ++count;
      }
    }
  }
  return count;
}

// Resamples the polyline with points at spacing at most `spacing` along
// each segment; feeds box counting at scales finer than the step size.
inline std::vector<cplx> resample_polyline(const TracePolyline& trace,
                                           double spacing) {
  std::vector<cplx> out;
  if (trace.points.empty()) return out;
  out.push_back(trace.points[0]);
  for (std::size_t i = 0; i + 1 < trace.points.size(); ++i) {
    cplx a = trace.points[i], b = trace.points[i + 1];
    double len = std::abs(b - a);
    auto pieces = static_cast<std::size_t>(std::ceil(len / spacing));
    for (std::size_t k = 1; k <= pieces; ++k) {
      out.push_back(a + (b - a) * (static_cast<double>(k) / pieces));
    }
  }
  return out;
}

// Fraction of eps-boxes of the region visited by the polyline.
inline double filling_fraction(const TracePolyline& trace, const Rect& region,
                               double eps) {
  if (!(region.y0 > 0.0)) {
    throw domain_error("filling_fraction: region must lie in {Im > 0}");
  }
  auto nx = static_cast<std::size_t>(std::round(region.width() / eps));
  auto ny = static_cast<std::size_t>(std::round(region.height() / eps));
  nx = std::max<std::size_t>(nx, 1);
  ny = std::max<std::size_t>(ny, 1);
  std::vector<char> hit(nx * ny, 0);
  std::vector<cplx> pts = trace.points.size() > 1
                              ? resample_polyline(trace, eps / 4.0)
                              : trace.points;
  for (const cplx& p : pts) {
    if (!region.contains(p)) continue;
    auto ix = std::min(nx - 1, static_cast<std::size_t>(
                                   (p.real() - region.x0) / eps));
    auto iy = std::min(ny - 1, static_cast<std::size_t>(
                                   (p.imag() - region.y0) / eps));
    hit[iy * nx + ix] = 1;
  }
  std::size_t visited = 0;
  for (char h : hit) visited += h;
  return static_cast<double>(visited) / static_cast<double>(nx * ny);
}

inline void write_boxcount_csv(const BoxCountResult& r, std::ostream& os) {
  os << "eps,count\n";
  os.precision(17);
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    os << r.epsilons[i] << ',' << r.counts[i] << '\n';
  }
}

inline void write_whitney_csv(const std::map<int, std::size_t>& hist,
                              std::ostream& os) {
  os << "n,W\n";
  for (const auto& [n, w] : hist) os << n << ',' << w << '\n';
}

}  // namespace slelab

#endif  // SLELAB_GEOMETRY_HPP_
