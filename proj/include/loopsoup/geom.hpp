#pragma once

// Small 3D vector / box types used by the samplers and the cluster engine.

#include <algorithm>
#include <cmath>
#include <limits>

namespace loopsoup {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x; y += o.y; z += o.z;
    return *this;
  }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dist2(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

inline double dist(const Vec3& a, const Vec3& b) { return std::sqrt(dist2(a, b)); }

// Axis-aligned box.
struct Box3 {
  Vec3 lo{std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  Box3() = default;
  Box3(const Vec3& lo_, const Vec3& hi_) : lo(lo_), hi(hi_) {}

  static Box3 cube(double half) { return Box3({-half, -half, -half}, {half, half, half}); }

  bool empty() const { return lo.x > hi.x || lo.y > hi.y || lo.z > hi.z; }
  double volume() const {
    return empty() ? 0.0 : (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z);
  }
  Vec3 extent() const { return hi - lo; }

  void expand(const Vec3& p) {
    lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y); lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y); hi.z = std::max(hi.z, p.z);
  }
  Box3 enlarged(double pad) const {
    return Box3({lo.x - pad, lo.y - pad, lo.z - pad}, {hi.x + pad, hi.y + pad, hi.z + pad});
  }
  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z &&
           p.z <= hi.z;
  }
  bool intersects(const Box3& o) const {
    return !(o.lo.x > hi.x || o.hi.x < lo.x || o.lo.y > hi.y || o.hi.y < lo.y ||
             o.lo.z > hi.z || o.hi.z < lo.z);
  }
  // Euclidean distance from a point to the box (0 inside).
  double distance(const Vec3& p) const {
    const double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
    const double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
    const double dz = std::max({lo.z - p.z, 0.0, p.z - hi.z});
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  double diagonal() const { return empty() ? 0.0 : dist(lo, hi); }
};

// Distance from the origin to the segment [a,b]; the squared-norm along the
// chord is a quadratic in the parameter, minimized in closed form.
inline double segment_min_radius(const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double dd = d.norm2();
  if (dd == 0.0) return a.norm();
  double t = -a.dot(d) / dd;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * d).norm();
}

// The norm along a straight segment is convex, so the max is at an endpoint.
inline double segment_max_radius(const Vec3& a, const Vec3& b) {
  return std::max(a.norm(), b.norm());
}

}  // namespace loopsoup
