#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "slelab/driving.hpp"
#include "slelab/geometry.hpp"
#include "slelab/loewner.hpp"

using namespace slelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TracePolyline make_polyline(std::vector<cplx> pts, double dt = 1.0) {
  TracePolyline p;
  p.points = std::move(pts);
  p.dt = dt;
  return p;
}

}  // namespace

TEST_CASE("box_count basics") {
  Rect win{0.0, 0.0, 1.0, 1.0};
  std::vector<double> eps = {0.25, 0.125};

  auto one = box_count({cplx(0.4, 0.4)}, win, eps);
  CHECK(one.counts == std::vector<std::size_t>{1, 1});

  auto two = box_count({cplx(0.1, 0.1), cplx(0.9, 0.9)}, win, eps);
  CHECK(two.counts == std::vector<std::size_t>{2, 2});

  // unit segment sampled at spacing eps/4: N(eps) in [2^m, 2^m + 1]
  for (int m = 2; m <= 5; ++m) {
    double e = std::ldexp(1.0, -m);
    std::vector<cplx> seg;
    for (double x = 0.0; x <= 1.0; x += e / 4.0) seg.emplace_back(x, 0.3);
    auto r = box_count(seg, win, {e});
    auto n = static_cast<std::size_t>(1) << m;
    INFO("m=" << m);
    CHECK(r.counts[0] >= n);
    CHECK(r.counts[0] <= n + 1);
  }

  CHECK(box_count({}, win, eps).counts == std::vector<std::size_t>{0, 0});
  CHECK_THROWS_AS(box_count({}, win, {0.125, 0.25}), domain_error);
  CHECK_THROWS_AS(box_count({}, Rect{0, 0, 0, 1}, eps), domain_error);
}

TEST_CASE("box_count monotone and translation invariant") {
  Rect win{-2.0, -2.0, 2.0, 2.0};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ur(-1.0, 1.0);
  std::vector<cplx> small, big;
  for (int i = 0; i < 50; ++i) small.emplace_back(ur(rng), ur(rng));
  big = small;
  for (int i = 0; i < 50; ++i) big.emplace_back(ur(rng), ur(rng));
  auto rs = box_count(small, win, {0.25, 0.125});
  auto rb = box_count(big, win, {0.25, 0.125});
  CHECK(rs.counts[0] <= rb.counts[0]);
  CHECK(rs.counts[1] <= rb.counts[1]);

  std::vector<cplx> shifted;
  for (auto p : small) shifted.push_back(p + cplx(0.5, -0.25));
  auto rt = box_count(shifted, win, {0.25, 0.125});
  CHECK(rt.counts == rs.counts);
}

TEST_CASE("fit_dimension") {
  BoxCountResult synth;
  synth.window = {0, 0, 1, 1};
  for (int m = 1; m <= 5; ++m) {
    synth.epsilons.push_back(std::pow(4.0, -m));
    synth.counts.push_back(2 * (static_cast<std::size_t>(1) << (3 * m)));
  }
  auto fit = fit_dimension(synth);
  CHECK_THAT(fit.slope, WithinAbs(1.5, 1e-12));
  CHECK_THAT(fit.r2, WithinAbs(1.0, 1e-12));

  BoxCountResult flat;
  flat.window = {0, 0, 1, 1};
  flat.epsilons = {0.25, 0.125, 0.0625};
  flat.counts = {7, 7, 7};
  CHECK_THAT(fit_dimension(flat).slope, WithinAbs(0.0, 1e-12));

  // segment data -> slope about 1
  Rect win{0.0, 0.0, 1.0, 1.0};
  std::vector<cplx> seg;
  for (double x = 0.0; x <= 1.0; x += 1.0 / 4096.0) seg.emplace_back(x, 0.3);
  auto r = box_count(seg, win, {0.125, 0.0625, 0.03125, 0.015625});
  CHECK_THAT(fit_dimension(r).slope, WithinAbs(1.0, 0.05));

  BoxCountResult few;
  few.window = {0, 0, 1, 1};
  few.epsilons = {0.5, 0.25};
  few.counts = {1, 2};
  CHECK_THROWS_AS(fit_dimension(few), domain_error);
}

TEST_CASE("dist_to_polyline and SegmentGrid") {
  auto poly = make_polyline({cplx(0, 0), cplx(0, 2)});
  CHECK(dist_to_polyline(cplx(0, 2), poly) == 0.0);
  CHECK_THAT(dist_to_polyline(cplx(1, 1), poly), WithinAbs(1.0, 1e-15));

  TracePolyline empty;
  CHECK_THROWS_AS(dist_to_polyline(cplx(0, 1), empty), domain_error);

  // spatial hash agrees with the brute-force oracle
  auto chain = build_chain(sample_brownian(6.0, 1.0, 500, 21));
  auto tr = trace(chain);
  SegmentGrid grid(tr);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> xr(-2.0, 2.0);
  std::uniform_real_distribution<double> yr(0.01, 2.0);
  for (int i = 0; i < 200; ++i) {
    cplx p(xr(rng), yr(rng));
    double brute = dist_to_polyline(p, tr);
    double capped = grid.dist(p, 10.0);
    INFO("p=" << p);
    CHECK_THAT(capped, WithinAbs(std::min(brute, 10.0), 1e-12));
    double tight = grid.dist(p, 0.25);
    CHECK_THAT(tight, WithinAbs(std::min(brute, 0.25), 1e-12));
  }
}

TEST_CASE("whitney_decompose on the empty hull") {
  // A single point at the origin: the domain is essentially the whole
  // half-plane, so cell sizes track the height above R.
  auto poly = make_polyline({cplx(0, 0)});
  auto never = [](cplx) { return false; };
  Rect region{-1.0, 1.0 / 64.0, 1.0, 1.0};
  auto cells = whitney_decompose(poly, never, region, 1.0 / 64.0);
  REQUIRE_FALSE(cells.empty());
  for (const auto& q : cells) {
    double y = q.corner.imag();
    INFO("corner=" << q.corner << " size=" << q.size);
    CHECK(q.size >= y / 16.0);
    CHECK(q.size <= y);
  }

  // interiors pairwise disjoint
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      const auto& a = cells[i];
      const auto& b = cells[j];
      bool overlap = a.corner.real() < b.corner.real() + b.size &&
                     b.corner.real() < a.corner.real() + a.size &&
                     a.corner.imag() < b.corner.imag() + b.size &&
                     b.corner.imag() < a.corner.imag() + a.size;
      CHECK_FALSE(overlap);
    }
  }

  CHECK_THROWS_AS(whitney_decompose(poly, never, Rect{-1, 0, 1, 1}, 0.25),
                  domain_error);
  CHECK_THROWS_AS(
      whitney_decompose(poly, never, Rect{-1, 0.5, 1, 1}, 0.3),
      domain_error);
}

TEST_CASE("whitney sandwich audit on a simulated trace") {
  auto chain = build_chain(sample_brownian(2.0, 1.0, 10000, 4));
  auto tr = trace(chain);
  auto never = [](cplx) { return false; };  // kappa=2 swallows nothing
  double min_size = 1.0 / 64.0;
  Rect region{-1.5, min_size, 1.5, 1.5};
  auto cells = whitney_decompose(tr, never, region, min_size);
  REQUIRE(cells.size() >= 50);
  std::size_t ok = 0;
  for (const auto& q : cells) {
    // independent audit distance: dense samples against the brute oracle
    double f = std::numeric_limits<double>::max();
    for (int i = 0; i <= 4; ++i) {
      for (int j = 0; j <= 4; ++j) {
        cplx p = q.corner + cplx(q.size * i / 4.0, q.size * j / 4.0);
        f = std::min(f, std::min(dist_to_polyline(p, tr), p.imag()));
      }
    }
    // f over-estimates inf_Q by at most the 25-grid coverage radius
    // (~0.18 d), so these two checks bracket the true sandwich.
    if (q.size <= f * (1.0 + 1e-12) && f <= 8.0 * q.size) ++ok;
  }
  CHECK(ok == cells.size());
}

TEST_CASE("whitney_sum and histogram") {
  std::vector<WhitneyCell> cells;
  for (int i = 0; i < 3; ++i) {
    WhitneyCell q;
    q.corner = cplx(0.25 * i, 0.25);
    q.size = 0.25;
    q.dist_to_boundary = 0.5;
    cells.push_back(q);
  }
  CHECK(whitney_sum({}, 0.5, 1.0) == 0.0);
  CHECK_THAT(whitney_sum(cells, 0.4, 0.0), WithinAbs(3.0, 1e-15));
  double prev = 1e300;
  for (double a : {1.0, 1.3, 1.7, 2.0}) {
    double s = whitney_sum(cells, 0.4, a);
    CHECK(s < prev);
    prev = s;
  }
  CHECK(whitney_sum(cells, 0.9, 1.0) == 0.0);  // top edge below h
  CHECK_THROWS_AS(whitney_sum(cells, 0.0, 1.0), domain_error);

  auto hist = whitney_histogram(cells);
  CHECK(hist.size() == 1);
  CHECK(hist[2] == 3);
  CHECK(whitney_histogram({}).empty());

  // area bound: sum W(n) 4^{-n} <= region area (cells disjoint)
  double area = 0.0;
  for (const auto& [n, w] : hist) area += w * std::pow(4.0, -n);
  CHECK(area <= 1.0);
}

TEST_CASE("self_intersections") {
  auto straight = make_polyline(
      {cplx(0, 0), cplx(0, 1), cplx(0, 2), cplx(0, 3), cplx(0, 4)});
  CHECK(self_intersections(straight, 1e-6) == 0);

  auto eight = make_polyline({cplx(0, 1), cplx(2, 1), cplx(2, 3), cplx(1, 0),
                              cplx(0, 3), cplx(0, 1)});
  CHECK(self_intersections(eight, 1e-6) >= 1);

  auto chain = build_chain(sample_brownian(6.0, 1.0, 2000, 6));
  auto tr = trace(chain);
  auto rev = tr;
  std::reverse(rev.points.begin(), rev.points.end());
  CHECK(self_intersections(tr, tr.dt) == self_intersections(rev, tr.dt));

  CHECK_THROWS_AS(self_intersections(straight, 0.0), domain_error);
}

TEST_CASE("filling_fraction") {
  Rect region{0.0, 1.0, 1.0, 2.0};
  auto empty = make_polyline({cplx(0, 0)});
  CHECK(filling_fraction(empty, region, 0.25) == 0.0);

  // serpentine path through every box center
  std::vector<cplx> pts;
  for (int iy = 0; iy < 4; ++iy) {
    double y = 1.0 + 0.25 * iy + 0.125;
    if (iy % 2 == 0) {
      for (int ix = 0; ix < 4; ++ix) pts.emplace_back(0.25 * ix + 0.125, y);
    } else {
      for (int ix = 3; ix >= 0; --ix) pts.emplace_back(0.25 * ix + 0.125, y);
    }
  }
  CHECK(filling_fraction(make_polyline(std::move(pts)), region, 0.25) == 1.0);

  CHECK_THROWS_AS(filling_fraction(empty, Rect{0, 0, 1, 1}, 0.25),
                  domain_error);
}

TEST_CASE("resample_polyline") {
  auto poly = make_polyline({cplx(0, 0), cplx(1, 0)});
  auto pts = resample_polyline(poly, 0.25);
  CHECK(pts.size() == 5);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(std::abs(pts[i] - pts[i - 1]) <= 0.25 + 1e-12);
  }
}

TEST_CASE("geometry CSV export") {
  BoxCountResult r;
  r.window = {0, 0, 1, 1};
  r.epsilons = {0.5, 0.25};
  r.counts = {1, 3};
  std::ostringstream os;
  write_boxcount_csv(r, os);
  CHECK(os.str() == "eps,count\n0.5,1\n0.25,3\n");

  std::map<int, std::size_t> hist{{2, 3}, {3, 7}};
  std::ostringstream os2;
  write_whitney_csv(hist, os2);
  CHECK(os2.str() == "n,W\n2,3\n3,7\n");
}
