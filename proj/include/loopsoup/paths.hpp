#pragma once

// Exact-in-law path samplers: Brownian bridges, loops under the scale
// invariant loop measure restricted to a duration band, first-hit durations
// of the whole-space excursion measure, and the inversion map
// x -> -x/|x|^2 with its time change.
//
// Discretization convention: a loop of duration T carries
// m = max(4, ceil(steps_per_unit * T)) uniform steps; vertex 0 and vertex m
// coincide bit for bit. The cached diameter is the exact vertex-pairwise
// diameter (a lower bound on the true path diameter, by convention applied
// consistently in band tests).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "loopsoup/geom.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

// Thrown where the spec says "rejection error (caller resamples)".
struct RejectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OpenPath {
  std::vector<double> times;
  std::vector<Vec3> points;
  double duration() const { return times.empty() ? 0.0 : times.back(); }
};

struct Loop {
  std::vector<double> times;  // 0 = t_0 < ... < t_m = T
  std::vector<Vec3> points;   // points[0] == points[m] exactly
  double duration = 0.0;
  double diameter = 0.0;  // vertex-pairwise
  Box3 bbox;

  const Vec3& root() const { return points.front(); }
  std::size_t steps() const { return points.empty() ? 0 : points.size() - 1; }
};

// ---------------------------------------------------------------------------
// Vertex diameter: exact, with a coarse-cell prefilter for long polylines.

namespace detail {

inline double diameter_brute(std::span<const Vec3> pts) {
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, dist2(pts[i], pts[j]));
  return std::sqrt(best);
}

// Max distance between two boxes, axiswise; >= any pairwise point distance
// in floating point as well (each term is monotone under rounding).
inline double box_gap2(const Box3& a, const Box3& b) {
  const double dx = std::max({a.hi.x - b.lo.x, b.hi.x - a.lo.x, 0.0});
  const double dy = std::max({a.hi.y - b.lo.y, b.hi.y - a.lo.y, 0.0});
  const double dz = std::max({a.hi.z - b.lo.z, b.hi.z - a.lo.z, 0.0});
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace detail

inline double polyline_diameter(std::span<const Vec3> pts) {
  const std::size_t n = pts.size();
  if (n < 2) return 0.0;
  if (n <= 256) return detail::diameter_brute(pts);

  Box3 bbox;
  for (const Vec3& p : pts) bbox.expand(p);
  const Vec3 ext = bbox.extent();
  if (ext.x == 0 && ext.y == 0 && ext.z == 0) return 0.0;

  constexpr int G = 8;
  auto cell_of = [&](const Vec3& p) {
    auto axis = [&](double v, double lo, double e) {
      if (e <= 0.0) return 0;
      return std::min(G - 1, static_cast<int>((v - lo) / e * G));
    };
    return (axis(p.x, bbox.lo.x, ext.x) * G + axis(p.y, bbox.lo.y, ext.y)) * G +
           axis(p.z, bbox.lo.z, ext.z);
  };

  std::vector<std::vector<std::uint32_t>> buckets(G * G * G);
  std::vector<Box3> cell_box(G * G * G);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = cell_of(pts[i]);
    buckets[c].push_back(static_cast<std::uint32_t>(i));
    cell_box[c].expand(pts[i]);
  }

  // lower bound from axis-extreme points
  std::size_t extremes[6] = {0, 0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    if (pts[i].x < pts[extremes[0]].x) extremes[0] = i;
    if (pts[i].x > pts[extremes[1]].x) extremes[1] = i;
    if (pts[i].y < pts[extremes[2]].y) extremes[2] = i;
    if (pts[i].y > pts[extremes[3]].y) extremes[3] = i;
    if (pts[i].z < pts[extremes[4]].z) extremes[4] = i;
    if (pts[i].z > pts[extremes[5]].z) extremes[5] = i;
  }
  double best2 = 0.0;
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b)
      best2 = std::max(best2, dist2(pts[extremes[a]], pts[extremes[b]]));

  struct Pair {
    double bound2;
    int ca, cb;
  };
  std::vector<Pair> pairs;
  for (int a = 0; a < G * G * G; ++a) {
    if (buckets[a].empty()) continue;
    for (int b = a; b < G * G * G; ++b) {
      if (buckets[b].empty()) continue;
      const double bd = detail::box_gap2(cell_box[a], cell_box[b]);
      if (bd > best2) pairs.push_back({bd, a, b});
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const Pair& p, const Pair& q) { return p.bound2 > q.bound2; });
  for (const Pair& pr : pairs) {
    if (pr.bound2 <= best2) break;
    for (std::uint32_t i : buckets[pr.ca]) {
      for (std::uint32_t j : buckets[pr.cb]) {
        if (pr.ca == pr.cb && j <= i) continue;
        best2 = std::max(best2, dist2(pts[i], pts[j]));
      }
    }
  }
  return std::sqrt(best2);
}

inline void finalize_loop(Loop& loop) {
  if (loop.points.size() < 2 || !(loop.points.front() == loop.points.back()))
    throw std::invalid_argument("finalize_loop: polyline must close exactly");
  loop.duration = loop.times.back();
  loop.bbox = Box3{};
  for (const Vec3& p : loop.points) loop.bbox.expand(p);
  loop.diameter = polyline_diameter(loop.points);
}

// ---------------------------------------------------------------------------
// Brownian bridge

// Discretized bridge from x to y of duration t on `steps` uniform intervals.
// Endpoints are exact; the per-coordinate marginal at time s has mean
// x + (s/t)(y-x) and variance s(t-s)/t.
inline OpenPath sample_bridge(const Vec3& x, const Vec3& y, double t, std::size_t steps,
                              Rng& rng) {
  if (t <= 0.0) throw std::domain_error("sample_bridge: duration must be positive");
  if (steps < 1) throw std::domain_error("sample_bridge: steps must be >= 1");
  OpenPath path;
  const std::size_t m = steps;
  path.times.resize(m + 1);
  path.points.resize(m + 1);
  const double sdt = std::sqrt(t / static_cast<double>(m));
  Vec3 w{0, 0, 0};
  for (std::size_t k = 1; k <= m; ++k) {
    w += rng.normal3() * sdt;
    path.points[k] = w;  // raw walk, pinned below
  }
  const Vec3 defect = w - (y - x);
  for (std::size_t k = 0; k <= m; ++k) {
    path.times[k] = t * static_cast<double>(k) / static_cast<double>(m);
    if (k == 0)
      path.points[k] = x;
    else if (k == m)
      path.points[k] = y;
    else
      path.points[k] = x + path.points[k] - defect * (static_cast<double>(k) / m);
  }
  path.times[m] = t;
  return path;
}

// One level of Levy midpoint refinement; exact in law for a Brownian path
// conditioned on its current vertices.
inline void refine_midpoints(std::vector<double>& times, std::vector<Vec3>& points,
                             Rng& rng) {
  const std::size_t m = points.size() - 1;
  std::vector<double> nt(2 * m + 1);
  std::vector<Vec3> np(2 * m + 1);
  for (std::size_t k = 0; k < m; ++k) {
    const double dt = times[k + 1] - times[k];
    nt[2 * k] = times[k];
    np[2 * k] = points[k];
    nt[2 * k + 1] = times[k] + 0.5 * dt;
    np[2 * k + 1] = (points[k] + points[k + 1]) * 0.5 + rng.normal3() * std::sqrt(0.25 * dt);
  }
  nt[2 * m] = times[m];
  np[2 * m] = points[m];
  times.swap(nt);
  points.swap(np);
}

// ---------------------------------------------------------------------------
// Duration band of the loop measure (root density is uniform; the duration
// factor is t^{-1-d/2} (2 pi)^{-d/2}).

// Band mass per unit root volume: (2 pi)^{-d/2} (2/d) (t_lo^{-d/2} - t_hi^{-d/2}).
inline double band_mass_per_volume(int d, double t_lo, double t_hi) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo))
    throw std::domain_error("band_mass_per_volume: need 0 < t_lo < t_hi");
  const double a = std::pow(t_lo, -0.5 * d);
  const double b = std::isinf(t_hi) ? 0.0 : std::pow(t_hi, -0.5 * d);
  return std::pow(2.0 * M_PI, -0.5 * d) * (2.0 / d) * (a - b);
}

inline double duration_band_cdf(int d, double t_lo, double t_hi, double t) {
  const double a = std::pow(t_lo, -0.5 * d);
  const double b = std::isinf(t_hi) ? 0.0 : std::pow(t_hi, -0.5 * d);
  if (t <= t_lo) return 0.0;
  if (t >= t_hi) return 1.0;
  return (a - std::pow(t, -0.5 * d)) / (a - b);
}

// Inverse-cdf draw of the band duration (acceptance-free).
inline double sample_duration_band(int d, double t_lo, double t_hi, Rng& rng) {
  const double a = std::pow(t_lo, -0.5 * d);
  const double b = std::isinf(t_hi) ? 0.0 : std::pow(t_hi, -0.5 * d);
  const double u = rng.uniform();
  return std::pow(a - u * (a - b), -2.0 / d);
}

inline std::size_t steps_for_duration(double steps_per_unit, double t) {
  const double m = std::ceil(steps_per_unit * t);
  return static_cast<std::size_t>(std::max(4.0, m));
}

// One loop whose (root, duration, shape) law is the loop measure restricted
// to {root in window, T in [t_min, t_max]}, normalized. d = 3.
inline Loop sample_loop_duration_band(double t_min, double t_max, const Box3& window,
                                      double steps_per_unit, Rng& rng) {
  if (window.empty() || window.volume() <= 0.0)
    throw std::domain_error("sample_loop_duration_band: empty window");
  if (!(0.0 < t_min && t_min < t_max))
    throw std::domain_error("sample_loop_duration_band: inverted band");
  const Vec3 root = rng.uniform_in(window);
  const double t = sample_duration_band(3, t_min, t_max, rng);
  const std::size_t m = steps_for_duration(steps_per_unit, t);
  OpenPath bridge = sample_bridge(root, root, t, m, rng);
  Loop loop;
  loop.times = std::move(bridge.times);
  loop.points = std::move(bridge.points);
  loop.points.back() = loop.points.front();  // close bit-exactly
  finalize_loop(loop);
  return loop;
}

// ---------------------------------------------------------------------------
// Excursion first-hit duration (d = 3): the Levy first-passage law with
// density |x-y| (2 pi t^3)^{-1/2} exp(-|x-y|^2 / (2t)). Sampled exactly as
// a^2 / Z^2 with Z standard normal.

inline double sample_excursion_duration(const Vec3& x, const Vec3& y, Rng& rng) {
  const double a = dist(x, y);
  if (a == 0.0) throw std::domain_error("sample_excursion_duration: x != y required");
  double z = 0.0;
  do {
    z = rng.normal();
  } while (z == 0.0);
  return a * a / (z * z);
}

inline double excursion_duration_cdf(double a, double t) {
  if (t <= 0.0) return 0.0;
  return std::erfc(a / std::sqrt(2.0 * t));
}

// ---------------------------------------------------------------------------
// Inversion iota(x) = -x/|x|^2 with the discrete time change: new time
// increments are trapezoids of |p|^{-4} over the existing vertices.

inline Vec3 invert_point(const Vec3& p) { return p * (-1.0 / p.norm2()); }

namespace detail {

template <typename Path>
void invert_in_place(Path& path, double eta) {
  for (const Vec3& p : path.points)
    if (p.norm() < eta)
      throw RejectionError("invert_path: path enters the origin guard ball");
  const std::size_t m = path.points.size() - 1;
  std::vector<double> w(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    const double n2 = path.points[k].norm2();
    w[k] = 1.0 / (n2 * n2);
  }
  std::vector<double> nt(m + 1);
  nt[0] = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double dt = path.times[k + 1] - path.times[k];
    nt[k + 1] = nt[k] + dt * 0.5 * (w[k] + w[k + 1]);
  }
  for (std::size_t k = 0; k <= m; ++k) path.points[k] = invert_point(path.points[k]);
  path.times.swap(nt);
}

}  // namespace detail

inline OpenPath invert_path(const OpenPath& p, double eta = 1e-9) {
  OpenPath q = p;
  detail::invert_in_place(q, eta);
  return q;
}

inline Loop invert_path(const Loop& p, double eta = 1e-9) {
  Loop q;
  q.times = p.times;
  q.points = p.points;
  detail::invert_in_place(q, eta);
  q.points.back() = q.points.front();  // closure is preserved exactly
  finalize_loop(q);
  return q;
}

// Re-root a loop at a uniformly chosen time (segment picked with probability
// proportional to its duration, rotation lands on the segment's start
// vertex). Restores uniform-time rooting after the inversion time change.
inline Loop rotate_root_uniform(const Loop& loop, Rng& rng) {
  const std::size_t m = loop.points.size() - 1;
  const double u = rng.uniform() * loop.duration;
  std::size_t k = 0;
  while (k + 1 < m && loop.times[k + 1] <= u) ++k;
  if (k == 0) return loop;
  Loop out;
  out.times.resize(m + 1);
  out.points.resize(m + 1);
  const double tk = loop.times[k];
  for (std::size_t j = 0; j + k <= m; ++j) {
    out.times[j] = loop.times[j + k] - tk;
    out.points[j] = loop.points[j + k];
  }
  for (std::size_t j = 1; j <= k; ++j) {
    out.times[m - k + j] = loop.duration - tk + loop.times[j];
    out.points[m - k + j] = loop.points[j];
  }
  out.points.back() = out.points.front();
  finalize_loop(out);
  return out;
}

}  // namespace loopsoup
