#pragma once

// Closed-form harmonic kernels in R^d, d >= 3: heat kernel, Green's
// functions for the whole space and the unit ball, Poisson kernels for the
// ball and its complement, the boundary kernel of a spherical shell, and the
// three sphere-integral identities they satisfy.
//
// Conventions. Brownian motion has generator (1/2) Laplacian. Poisson
// kernels are densities with respect to (d-1)-dimensional Hausdorff measure
// on the boundary, so the ball kernel integrates to one over the full
// boundary. Green's function poles (coincident arguments) return +infinity
// instead of throwing: samplers routinely query near-coincident pairs.

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "loopsoup/geom.hpp"
#include "loopsoup/quad.hpp"

namespace loopsoup {

using PointD = std::vector<double>;  // d coordinates, d >= 3

inline double dist_d(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double norm_d(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double dot_d(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// c_d = Gamma(d/2 - 1) / (2 pi^{d/2}), the whole-space Green constant.
inline double green_constant(int d) {
  if (d < 3) throw std::invalid_argument("green_constant: d >= 3 required");
  return std::tgamma(0.5 * d - 1.0) / (2.0 * std::pow(M_PI, 0.5 * d));
}

// Gamma(d/2) / (2 pi^{d/2}), the sphere Poisson-kernel constant.
inline double poisson_constant(int d) {
  if (d < 3) throw std::invalid_argument("poisson_constant: d >= 3 required");
  return std::tgamma(0.5 * d) / (2.0 * std::pow(M_PI, 0.5 * d));
}

// Surface area of the radius-R sphere in R^d.
inline double sphere_area(int d, double R) {
  return unit_sphere_area(d - 1) * std::pow(R, d - 1);
}

// ---------------------------------------------------------------------------
// Heat kernel and Green's functions

inline double heat_kernel_dist(int d, double t, double distance) {
  if (t <= 0.0) throw std::domain_error("heat_kernel: t > 0 required");
  return std::pow(2.0 * M_PI * t, -0.5 * d) * std::exp(-distance * distance / (2.0 * t));
}

inline double heat_kernel(int d, double t, std::span<const double> x,
                          std::span<const double> y) {
  return heat_kernel_dist(d, t, dist_d(x, y));
}

inline double heat_kernel(double t, const Vec3& x, const Vec3& y) {
  return heat_kernel_dist(3, t, dist(x, y));
}

inline double green_whole_dist(int d, double distance) {
  if (distance == 0.0) return std::numeric_limits<double>::infinity();  // pole
  return green_constant(d) * std::pow(distance, 2.0 - d);
}

inline double green_whole(int d, std::span<const double> x, std::span<const double> y) {
  return green_whole_dist(d, dist_d(x, y));
}

inline double green_whole(const Vec3& x, const Vec3& y) {
  return green_whole_dist(3, dist(x, y));
}

// Green's function of the unit ball:
//   G(x,y) - G(x/|x|, |x| y),
// evaluated through |x/|x| - |x| y|^2 = 1 - 2 x.y + |x|^2 |y|^2, which is
// symmetric in (x,y) and finite at x = 0, so the center case is the plain
// continuous limit rather than a separate branch.
inline double green_ball(int d, std::span<const double> x, std::span<const double> y) {
  const double nx = norm_d(x), ny = norm_d(y);
  if (nx > 1.0 + 1e-12 || ny > 1.0 + 1e-12)
    throw std::domain_error("green_ball: points must lie in the closed unit ball");
  const double r = dist_d(x, y);
  if (r == 0.0) return std::numeric_limits<double>::infinity();  // pole
  const double image2 = 1.0 - 2.0 * dot_d(x, y) + nx * nx * ny * ny;
  const double cd = green_constant(d);
  return cd * (std::pow(r, 2.0 - d) - std::pow(image2, 0.5 * (2.0 - d)));
}

inline double green_ball(const Vec3& x, const Vec3& y) {
  const double bx[3] = {x.x, x.y, x.z}, by[3] = {y.x, y.y, y.z};
  return green_ball(3, std::span<const double>(bx, 3), std::span<const double>(by, 3));
}

// Scaled ball: G_{B(c,R)}(x,y) = R^{2-d} G_{B(0,1)}((x-c)/R, (y-c)/R).
inline double green_ball_scaled(int d, std::span<const double> x, std::span<const double> y,
                                std::span<const double> center, double R) {
  PointD xs(x.size()), ys(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xs[i] = (x[i] - center[i]) / R;
    ys[i] = (y[i] - center[i]) / R;
  }
  return std::pow(R, 2.0 - d) * green_ball(d, xs, ys);
}

// ---------------------------------------------------------------------------
// Spherical domains and Poisson kernels

struct SphericalDomain {
  enum class Kind { whole_space, ball, complement_of_ball, shell };

  Kind kind = Kind::whole_space;
  PointD center;        // empty means the origin
  double radius = 0.0;  // ball / complement
  double r_in = 0.0, r_out = 0.0;  // shell

  static SphericalDomain whole_space() { return {}; }
  static SphericalDomain ball(PointD c, double R) {
    if (R <= 0.0) throw std::domain_error("SphericalDomain: radius must be positive");
    SphericalDomain d;
    d.kind = Kind::ball;
    d.center = std::move(c);
    d.radius = R;
    return d;
  }
  static SphericalDomain complement_of_ball(PointD c, double R) {
    SphericalDomain d = ball(std::move(c), R);
    d.kind = Kind::complement_of_ball;
    return d;
  }
  static SphericalDomain shell(PointD c, double r_in, double r_out) {
    if (!(0.0 < r_in && r_in < r_out))
      throw std::domain_error("SphericalDomain: shell needs 0 < r_in < r_out");
    SphericalDomain d;
    d.kind = Kind::shell;
    d.center = std::move(c);
    d.r_in = r_in;
    d.r_out = r_out;
    return d;
  }
};

// Unit-radius normal form of the sphere Poisson kernel,
//   Gamma(d/2)/(2 pi^{d/2}) |1 - |x|^2| / |x - w|^d,
// valid for the unit ball (|x| < 1) and its complement (|x| > 1).
inline double poisson_kernel_unit(int d, std::span<const double> x,
                                  std::span<const double> omega) {
  const double nx = norm_d(x);
  const double r = dist_d(x, omega);
  return poisson_constant(d) * std::abs(1.0 - nx * nx) / std::pow(r, static_cast<double>(d));
}

// Poisson kernel of a ball or ball-complement, as a density with respect to
// Hausdorff measure on the true boundary (the unit-form value picks up
// R^{1-d} under scaling so the ball kernel still integrates to one).
inline double poisson_kernel(int d, const SphericalDomain& D, std::span<const double> x,
                             std::span<const double> omega) {
  if (D.kind != SphericalDomain::Kind::ball &&
      D.kind != SphericalDomain::Kind::complement_of_ball)
    throw std::domain_error("poisson_kernel: domain must be a ball or its complement");
  const double R = D.radius;
  PointD xs(x.size()), ws(omega.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = D.center.empty() ? 0.0 : D.center[i];
    xs[i] = (x[i] - c) / R;
    ws[i] = (omega[i] - c) / R;
  }
  const double nx = norm_d(xs);
  const double nw = norm_d(ws);
  if (std::abs(nw - 1.0) > 1e-9)
    throw std::domain_error("poisson_kernel: omega must lie on the boundary sphere");
  if (std::abs(nx - 1.0) <= 1e-12)
    throw std::domain_error(
        "poisson_kernel: x on the boundary is the boundary-kernel case");
  if (D.kind == SphericalDomain::Kind::ball && nx > 1.0)
    throw std::domain_error("poisson_kernel: x outside the ball");
  if (D.kind == SphericalDomain::Kind::complement_of_ball && nx < 1.0)
    throw std::domain_error("poisson_kernel: x inside the excluded ball");
  return std::pow(R, 1.0 - d) * poisson_kernel_unit(d, xs, ws);
}

// ---------------------------------------------------------------------------
// Shell boundary kernel and escape mass

// Total boundary-kernel mass on the outer sphere from a point of the inner
// boundary of the shell B(R) \ closure(B(r)):
//   (d-2) r^{1-d} / (r^{2-d} - R^{2-d}).
// R may be +infinity, giving the limit (d-2) r^{-1} ... times r^{2-d} scaling.
inline double shell_escape_mass(int d, double r, double R) {
  if (!(r > 0.0) || !(R > r)) throw std::domain_error("shell_escape_mass: need 0 < r < R");
  const double r2d = std::pow(r, 2.0 - d);
  const double R2d = std::isinf(R) ? 0.0 : std::pow(R, 2.0 - d);
  return (d - 2.0) * std::pow(r, 1.0 - d) / (r2d - R2d);
}

// Dimension of the space of degree-l spherical harmonics on S^{d-1}.
inline double harmonic_dim(int d, int l) {
  if (l == 0) return 1.0;
  // N_l = N_{l-1} * (l+d-3)/l * (2l+d-2)/(2l+d-4)
  double n = 1.0;
  for (int k = 1; k <= l; ++k)
    n *= (k + d - 3.0) / k * (2.0 * k + d - 2.0) / (2.0 * k + d - 4.0);
  return n;
}

// Boundary Poisson kernel of the shell B(R) \ closure(B(r)), from a point y
// on the inner sphere to a point x on the outer sphere, as a density with
// respect to Hausdorff measure on the outer sphere. Zonal-harmonic series:
// radial modes rho^l and rho^{2-d-l}, normal derivative at rho = r. The terms
// decay like (r/R)^l, so the series is summed with a rigorous tail cutoff.
inline double shell_boundary_kernel(int d, double r, double R, double cos_gamma) {
  if (!(r > 0.0) || !(R > r))
    throw std::domain_error("shell_boundary_kernel: need 0 < r < R");
  if (d < 3) throw std::invalid_argument("shell_boundary_kernel: d >= 3 required");
  const double lambda = 0.5 * (d - 2.0);
  const double omega = unit_sphere_area(d - 1);
  const double t = std::clamp(cos_gamma, -1.0, 1.0);
  const double rho = r / R;

  // Gegenbauer ratio C_l(t)/C_l(1) by simultaneous recurrence.
  double c_prev2 = 1.0, c_prev1 = 2.0 * lambda * t;       // C_0, C_1 at t
  double c1_prev2 = 1.0, c1_prev1 = 2.0 * lambda;          // C_0, C_1 at 1
  double sum = 0.0;
  const int l_max = 20000;
  for (int l = 0; l <= l_max; ++l) {
    double ct, c1;
    if (l == 0) {
      ct = c_prev2; c1 = c1_prev2;
    } else if (l == 1) {
      ct = c_prev1; c1 = c1_prev1;
    } else {
      ct = (2.0 * t * (l + lambda - 1.0) * c_prev1 - (l + 2.0 * lambda - 2.0) * c_prev2) / l;
      c1 = (2.0 * (l + lambda - 1.0) * c1_prev1 - (l + 2.0 * lambda - 2.0) * c1_prev2) / l;
      c_prev2 = c_prev1; c_prev1 = ct;
      c1_prev2 = c1_prev1; c1_prev1 = c1;
    }
    const double nl = harmonic_dim(d, l);
    const double denom = std::pow(R, static_cast<double>(l)) *
                         (1.0 - std::pow(rho, 2.0 * l + d - 2.0));
    const double coeff = (2.0 * l + d - 2.0) * std::pow(r, l - 1.0) / denom *
                         nl / omega * std::pow(R, 1.0 - d);
    sum += coeff * ct / c1;
    if (l >= 4 && std::abs(coeff) < 1e-15 * std::max(1.0, std::abs(sum))) break;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// The three sphere-integral identities, evaluated by quadrature. Used by the
// self test; each returns the quadrature value whose target is listed.

// Target 1: full-boundary mass of the ball kernel from an interior point.
inline double lemma_integral_ball(int d, double r, double R, double tol = 1e-9) {
  if (!(0.0 < r && r < R)) throw std::domain_error("lemma_integral_ball: need 0 < r < R");
  auto h = [&](double t) {
    // |y - x|, y at radius r (pole), x at radius R with cos angle t
    const double dist2v = r * r + R * R - 2.0 * r * R * t;
    const double scaled = std::sqrt(dist2v) / R;  // unit form distance
    const double nx = r / R;
    return std::pow(R, 1.0 - d) * poisson_constant(d) * (1.0 - nx * nx) /
           std::pow(scaled, static_cast<double>(d));
  };
  return zonal_sphere_integral(h, d, R, tol);
}

// Target 2: (r/R)^{d-2}, exterior-domain kernel mass from radius R.
inline double lemma_integral_exterior(int d, double r, double R, double tol = 1e-9) {
  if (!(0.0 < r && r < R))
    throw std::domain_error("lemma_integral_exterior: need 0 < r < R");
  auto h = [&](double t) {
    const double dist2v = r * r + R * R - 2.0 * r * R * t;
    const double scaled = std::sqrt(dist2v) / r;
    const double nx = R / r;
    return std::pow(r, 1.0 - d) * poisson_constant(d) * (nx * nx - 1.0) /
           std::pow(scaled, static_cast<double>(d));
  };
  return zonal_sphere_integral(h, d, r, tol);
}

// Target 3: shell_escape_mass(d, r, R), outer-sphere mass of the shell
// boundary kernel from the inner boundary.
inline double lemma_integral_shell(int d, double r, double R, double tol = 1e-9) {
  auto h = [&](double t) { return shell_boundary_kernel(d, r, R, t); };
  return zonal_sphere_integral(h, d, R, tol);
}

}  // namespace loopsoup
