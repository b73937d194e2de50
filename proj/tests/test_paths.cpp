#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "loopsoup/paths.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

TEST_CASE("bridge endpoints are exact and the law matches the bridge covariance") {
  Rng rng(21, 0);
  const Vec3 x{0.3, -1.0, 0.5}, y{-0.7, 0.2, 1.5};
  for (int i = 0; i < 20; ++i) {
    const OpenPath p = sample_bridge(x, y, 2.0, 16, rng);
    CHECK(p.points.front() == x);
    CHECK(p.points.back() == y);
    CHECK(p.times.front() == 0.0);
    CHECK(p.times.back() == 2.0);
  }

  // x = y = 0, t = 1: midpoint mean 0, variance 1/4; cov(W_s, W_u) = s(1-u).
  const int n = 100000;
  const std::size_t m = 16;
  double sum_mid = 0, sum_mid2 = 0, sum_su = 0, sum_s2 = 0, sum_u2 = 0;
  const std::size_t ks = 4, ku = 12;  // s = 1/4, u = 3/4
  for (int i = 0; i < n; ++i) {
    const OpenPath p = sample_bridge({0, 0, 0}, {0, 0, 0}, 1.0, m, rng);
    const double mid = p.points[m / 2].x;
    sum_mid += mid;
    sum_mid2 += mid * mid;
    const double ws = p.points[ks].y, wu = p.points[ku].y;
    sum_su += ws * wu;
    sum_s2 += ws * ws;
    sum_u2 += wu * wu;
  }
  const double mean_mid = sum_mid / n;
  const double var_mid = sum_mid2 / n - mean_mid * mean_mid;
  CHECK(std::abs(mean_mid) < 3.0 * std::sqrt(0.25 / n));
  CHECK(std::abs(var_mid - 0.25) < 3.0 * 0.25 * std::sqrt(2.0 / n));

  const double s = 0.25, u = 0.75;
  const double cov_exact = s * (1.0 - u);  // s(t-u)/t at t=1
  const double cov_emp = sum_su / n;
  const double vs = sum_s2 / n, vu = sum_u2 / n;
  const double se = std::sqrt((vs * vu + cov_exact * cov_exact) / n);
  CHECK(std::abs(cov_emp - cov_exact) < 3.0 * se + 1e-4);
}

TEST_CASE("duration-band sampler: inverse-cdf law, uniform root, band mass") {
  Rng rng(22, 0);
  const double t_min = 0.5, t_max = 4.0;
  const Box3 window({-1, -2, 0}, {1, 0, 3});
  std::vector<double> ts, rx;
  for (int i = 0; i < 100000; ++i) {
    const double t = sample_duration_band(3, t_min, t_max, rng);
    CHECK(t >= t_min);
    CHECK(t <= t_max);
    ts.push_back(t);
  }
  const KsResult kt =
      ks_test(ts, [&](double t) { return duration_band_cdf(3, t_min, t_max, t); });
  CHECK(kt.p_value > 0.01);

  for (int i = 0; i < 20000; ++i) {
    const Loop loop = sample_loop_duration_band(t_min, t_max, window, 8.0, rng);
    rx.push_back(loop.root().x);
    CHECK(loop.points.front() == loop.points.back());
    CHECK(window.contains(loop.root()));
  }
  const KsResult kr = ks_test(rx, [&](double v) {
    return std::clamp((v - window.lo.x) / (window.hi.x - window.lo.x), 0.0, 1.0);
  });
  CHECK(kr.p_value > 0.01);

  // analytic band mass; t_min = 1, t_max = inf gives (2 pi)^{-3/2} * 2/3
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(band_mass_per_volume(3, 1.0, inf) ==
        doctest::Approx(std::pow(2.0 * M_PI, -1.5) * 2.0 / 3.0).epsilon(1e-14));
  CHECK(band_mass_per_volume(3, 1.0, inf) == doctest::Approx(0.0423).epsilon(2e-3));
  CHECK_THROWS_AS(sample_loop_duration_band(2.0, 1.0, window, 8.0, rng),
                  std::domain_error);
}

TEST_CASE("duration marginal matches the closed-form band cdf") {
  // F(t) = (t_min^{-3/2} - t^{-3/2}) / (t_min^{-3/2} - t_max^{-3/2}) at d = 3
  Rng rng(23, 0);
  const double t_min = 1.0, t_max = 9.0;
  std::vector<double> ts;
  const Box3 window = Box3::cube(0.5);
  for (int i = 0; i < 50000; ++i)
    ts.push_back(sample_loop_duration_band(t_min, t_max, window, 4.0, rng).duration);
  const double a = std::pow(t_min, -1.5), b = std::pow(t_max, -1.5);
  const KsResult k = ks_test(ts, [&](double t) {
    return std::clamp((a - std::pow(t, -1.5)) / (a - b), 0.0, 1.0);
  });
  CHECK(k.p_value > 0.01);
}

TEST_CASE("excursion duration: Levy law, median, tail, scaling") {
  Rng rng(24, 0);
  const Vec3 x{0, 0, 0}, y{1, 0, 0};

  // oracle: root of the closed-form cdf = 1/2 by bisection
  double lo = 0.1, hi = 20.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (excursion_duration_cdf(1.0, mid) < 0.5 ? lo : hi) = mid;
  }
  const double median_exact = 0.5 * (lo + hi);
  CHECK(median_exact == doctest::Approx(2.198).epsilon(5e-4));

  const int n = 100000;
  std::vector<double> taus;
  taus.reserve(n);
  int tail_hits = 0;
  for (int i = 0; i < n; ++i) {
    const double t = sample_excursion_duration(x, y, rng);
    taus.push_back(t);
    if (t > 100.0) ++tail_hits;
  }
  std::vector<double> sorted = taus;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  CHECK(std::abs(sorted[n / 2] - median_exact) < 0.06);

  // P(tau > t) sqrt(t) -> sqrt(2/pi); at t = 100 within 5%
  const double tail = static_cast<double>(tail_hits) / n * std::sqrt(100.0);
  CHECK(std::abs(tail - std::sqrt(2.0 / M_PI)) / std::sqrt(2.0 / M_PI) < 0.05);

  // KS against the closed-form cdf
  const KsResult k = ks_test(taus, [](double t) { return excursion_duration_cdf(1.0, t); });
  CHECK(k.p_value > 0.01);

  // scaling: tau for |x-y| = a is a^2 tau(1) in law
  const double a = 2.0;
  std::vector<double> t_a, t_1_scaled;
  for (int i = 0; i < 20000; ++i) {
    t_a.push_back(sample_excursion_duration(x, {a, 0, 0}, rng));
    t_1_scaled.push_back(a * a * sample_excursion_duration(x, y, rng));
  }
  CHECK(ks_test_two(t_a, t_1_scaled).p_value > 0.01);

  CHECK_THROWS_AS(sample_excursion_duration(x, x, rng), std::domain_error);
}

namespace {
Loop make_circle(double radius, std::size_t m, double duration) {
  Loop loop;
  loop.times.resize(m + 1);
  loop.points.resize(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    loop.times[k] = duration * static_cast<double>(k) / static_cast<double>(m);
    const double th = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(m);
    loop.points[k] = {radius * std::cos(th), radius * std::sin(th), 0.0};
  }
  loop.points.back() = loop.points.front();
  finalize_loop(loop);
  return loop;
}
}  // namespace

TEST_CASE("inversion: circle maps to radius 1/rho with duration rho^{-4}") {
  const double rho = 2.5, T = 1.7;
  const Loop circle = make_circle(rho, 200, T);
  const Loop inv = invert_path(circle);
  for (const Vec3& p : inv.points)
    CHECK(p.norm() == doctest::Approx(1.0 / rho).epsilon(1e-12));
  // constant |p|^{-4} makes the trapezoid rule exact
  CHECK(inv.duration == doctest::Approx(T * std::pow(rho, -4.0)).epsilon(1e-12));
  CHECK(inv.points.front() == inv.points.back());
}

TEST_CASE("inversion is an involution on vertices") {
  Rng rng(25, 0);
  const Box3 window({2.0, -0.5, -0.5}, {3.0, 0.5, 0.5});  // away from the origin
  int tested = 0;
  for (int i = 0; i < 40 && tested < 20; ++i) {
    const Loop loop = sample_loop_duration_band(0.05, 0.5, window, 64.0, rng);
    if (loop.bbox.distance({0, 0, 0}) < 0.3) continue;  // guard margin
    ++tested;
    const Loop twice = invert_path(invert_path(loop));
    REQUIRE(twice.points.size() == loop.points.size());
    for (std::size_t k = 0; k < loop.points.size(); ++k) {
      CHECK(dist(twice.points[k], loop.points[k]) <=
            1e-9 * std::max(1.0, loop.points[k].norm()));
    }
    // duration reproduced within trapezoid-rule tolerance: composing the two
    // trapezoid time changes inflates each edge by exactly
    // dt (w_a - w_b)^2 / (4 w_a w_b), w = |p|^{-4}
    double inflation = 0.0;
    for (std::size_t k = 0; k + 1 < loop.points.size(); ++k) {
      const double wa = std::pow(loop.points[k].norm2(), -2.0);
      const double wb = std::pow(loop.points[k + 1].norm2(), -2.0);
      const double dt = loop.times[k + 1] - loop.times[k];
      inflation += dt * (wa - wb) * (wa - wb) / (4.0 * wa * wb);
    }
    CHECK(twice.duration - loop.duration ==
          doctest::Approx(inflation).epsilon(1e-9).scale(loop.duration));
    // the annulus-crossing event is preserved exactly at vertex level
    double minr = 1e300, maxr = 0, minr2 = 1e300, maxr2 = 0;
    const Loop inv = invert_path(loop);
    for (const Vec3& p : loop.points) {
      minr = std::min(minr, p.norm());
      maxr = std::max(maxr, p.norm());
    }
    for (const Vec3& p : inv.points) {
      minr2 = std::min(minr2, p.norm());
      maxr2 = std::max(maxr2, p.norm());
    }
    const double rho = 0.4;
    const bool before = (minr <= rho) && (maxr >= 1.0 / rho);
    const bool after = (minr2 <= rho) && (maxr2 >= 1.0 / rho);
    CHECK(before == after);
  }
  CHECK(tested >= 10);
}

TEST_CASE("inversion rejects paths entering the origin guard ball") {
  Loop loop = make_circle(1.0, 16, 1.0);
  loop.points[3] = {1e-12, 0, 0};
  CHECK_THROWS_AS(invert_path(loop, 1e-9), RejectionError);
}

TEST_CASE("diameter cache equals the O(m^2) recomputation") {
  Rng rng(26, 0);
  int small_checked = 0;
  for (int i = 0; i < 80 && small_checked < 50; ++i) {
    const Loop loop = sample_loop_duration_band(0.1, 2.0, Box3::cube(1.0), 64.0, rng);
    if (loop.points.size() > 201) continue;
    ++small_checked;
    CHECK(loop.diameter == detail::diameter_brute(loop.points));
  }
  CHECK(small_checked >= 20);
  // long polylines: the cell-pruned scan stays exact
  for (int i = 0; i < 3; ++i) {
    const Loop loop = sample_loop_duration_band(4.0, 8.0, Box3::cube(1.0), 512.0, rng);
    REQUIRE(loop.points.size() > 2000);
    CHECK(polyline_diameter(loop.points) == detail::diameter_brute(loop.points));
  }
}

TEST_CASE("uniform re-rooting preserves geometry and closure") {
  Rng rng(27, 0);
  const Loop loop = sample_loop_duration_band(0.5, 2.0, Box3::cube(1.0), 32.0, rng);
  for (int i = 0; i < 10; ++i) {
    const Loop rot = rotate_root_uniform(loop, rng);
    CHECK(rot.points.size() == loop.points.size());
    CHECK(rot.duration == doctest::Approx(loop.duration).epsilon(1e-12));
    CHECK(rot.diameter == doctest::Approx(loop.diameter).epsilon(1e-12));
    CHECK(rot.points.front() == rot.points.back());
    for (std::size_t k = 1; k < rot.times.size(); ++k)
      CHECK(rot.times[k] > rot.times[k - 1]);
  }
}

TEST_CASE("midpoint refinement keeps endpoints and doubles resolution") {
  Rng rng(28, 0);
  OpenPath p = sample_bridge({0, 0, 0}, {1, 1, 0}, 1.0, 8, rng);
  const Vec3 a = p.points.front(), b = p.points.back();
  refine_midpoints(p.times, p.points, rng);
  CHECK(p.points.size() == 17);
  CHECK(p.points.front() == a);
  CHECK(p.points.back() == b);
  for (std::size_t k = 1; k < p.times.size(); ++k) CHECK(p.times[k] > p.times[k - 1]);
}
