#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "loopsoup/quad.hpp"

using namespace loopsoup;

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  // order n is exact for degree 2n-1
  auto f = [](double x) { return 5 * x * x * x * x - x * x + 3; };
  const double exact = 2.0 * (5.0 / 5.0 - 1.0 / 3.0 + 3.0);
  CHECK(gl_integrate(f, -1, 1, 3) == doctest::Approx(exact).epsilon(1e-14));
  CHECK(gl_integrate([](double x) { return std::exp(x); }, 0, 1, 24) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
}

TEST_CASE("sphere quadrature: area and first moments") {
  const double area = sphere_integral([](const Vec3&) { return 1.0; }, 1.0);
  CHECK(area == doctest::Approx(4.0 * M_PI).epsilon(1e-10));
  const double mz = sphere_integral([](const Vec3& p) { return p.z; }, 1.0);
  CHECK(std::abs(mz) < 1e-10);
  const double z2 = sphere_integral([](const Vec3& p) { return p.z * p.z; }, 2.0);
  // int z^2 over sphere of radius R = (4 pi R^2) R^2 / 3
  CHECK(z2 == doctest::Approx(16.0 * M_PI * 4.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("sphere quadrature handles a kernel-like peaked integrand") {
  // 1/|p - a|^3 with a = (0,0,0.5) over the unit sphere; zonal closed form:
  // 2 pi int (1 + a^2 - 2 a t)^{-3/2} dt = (2 pi / a) [ (1-a)^{-1} - (1+a)^{-1} ] / 1
  const double a = 0.5;
  const Vec3 pole{0, 0, a};
  const double got =
      sphere_integral([&](const Vec3& p) { return std::pow(dist(p, pole), -3.0); }, 1.0);
  const double exact = 2.0 * M_PI / a * (1.0 / (1.0 - a) - 1.0 / (1.0 + a)) / 1.0;
  CHECK(got == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("zonal reduction agrees with the product rule in d = 3") {
  const double a = 0.35;
  auto h = [&](double t) { return 1.0 / (1.0 + a * a - 2.0 * a * t); };
  const Vec3 pole{0, 0, a};
  const double product =
      sphere_integral([&](const Vec3& p) { return 1.0 / dist2(p, pole); }, 1.0);
  const double zonal = zonal_sphere_integral(h, 3, 1.0);
  CHECK(zonal == doctest::Approx(product).epsilon(1e-9));
}

TEST_CASE("zonal integral in higher dimension: sphere areas") {
  for (int d : {3, 4, 5, 7}) {
    const double got = zonal_sphere_integral([](double) { return 1.0; }, d, 1.5);
    CHECK(got == doctest::Approx(unit_sphere_area(d - 1) * std::pow(1.5, d - 1))
                     .epsilon(1e-9));
  }
}
