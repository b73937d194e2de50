#pragma once

// Deterministic quadrature: Gauss-Legendre rules, the adaptive
// polar-Gauss x uniform-azimuth product rule on the 2-sphere, and the
// zonal reduction of sphere integrals in general dimension.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "loopsoup/geom.hpp"

namespace loopsoup {

struct Quadrature1D {
  std::vector<double> nodes;    // on (-1,1)
  std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre nodes by Newton iteration on the Legendre recurrence.
inline Quadrature1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  Quadrature1D q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    q.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    q.weights[n - 1 - i] = q.weights[i];
  }
  return q;
}

inline double gl_integrate(const std::function<double(double)>& f, double a, double b,
                           int order) {
  const Quadrature1D q = gauss_legendre(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < order; ++i) s += q.weights[i] * f(mid + half * q.nodes[i]);
  return s * half;
}

// Surface integral over the 2-sphere of given radius (measure: 2-dimensional
// Hausdorff, total mass 4*pi*radius^2). Product rule: Gauss-Legendre in
// cos(theta), uniform in azimuth; the azimuth rule is spectrally accurate for
// periodic integrands.
inline double sphere_integral_fixed(const std::function<double(const Vec3&)>& f,
                                    double radius, int polar_order) {
  const Quadrature1D q = gauss_legendre(polar_order);
  const int n_az = 2 * polar_order;
  const double daz = 2.0 * M_PI / n_az;
  double total = 0.0;
  for (int i = 0; i < polar_order; ++i) {
    const double u = q.nodes[i];  // cos(theta)
    const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
    double ring = 0.0;
    for (int j = 0; j < n_az; ++j) {
      const double phi = daz * (j + 0.5);
      ring += f(Vec3{radius * s * std::cos(phi), radius * s * std::sin(phi), radius * u});
    }
    total += q.weights[i] * ring * daz;
  }
  return total * radius * radius;
}

// Order doubles until two successive rules agree to `tol`.
inline double sphere_integral(const std::function<double(const Vec3&)>& f, double radius,
                              double tol = 1e-8, int order0 = 8, int max_order = 2048) {
  double prev = sphere_integral_fixed(f, radius, order0);
  for (int order = 2 * order0; order <= max_order; order *= 2) {
    const double cur = sphere_integral_fixed(f, radius, order);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

// |S^{k}| = 2 pi^{(k+1)/2} / Gamma((k+1)/2), the k-sphere surface area.
inline double unit_sphere_area(int k) {
  return 2.0 * std::pow(M_PI, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

// Integral over the (d-1)-sphere of radius R of a zonal function h(cos gamma),
// gamma the angle to a fixed pole. Reduces to one dimension with weight
// (1-t^2)^{(d-3)/2}; measure is (d-1)-Hausdorff.
inline double zonal_sphere_integral(const std::function<double(double)>& h, int d,
                                    double radius, double tol = 1e-9) {
  if (d < 2) throw std::invalid_argument("zonal_sphere_integral: d >= 2 required");
  const double ring = unit_sphere_area(d - 2);
  const double p = 0.5 * (d - 3);
  auto g = [&](double t) { return h(t) * std::pow(std::max(0.0, 1.0 - t * t), p); };
  double prev = gl_integrate(g, -1.0, 1.0, 32);
  for (int order = 64; order <= 4096; order *= 2) {
    const double cur = gl_integrate(g, -1.0, 1.0, order);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur)))
      return ring * std::pow(radius, d - 1) * cur;
    prev = cur;
  }
  return ring * std::pow(radius, d - 1) * prev;
}

}  // namespace loopsoup
