#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "loopsoup/rng.hpp"

using namespace loopsoup;

TEST_CASE("identical (seed, stream) reproduces identical output bit for bit") {
  Rng a(42, 7), b(42, 7);
  for (int i = 0; i < 10000; ++i) CHECK(a.u64() == b.u64());
  Rng c(42, 7), d(42, 7);
  for (int i = 0; i < 1000; ++i) {
    CHECK(c.normal() == d.normal());
    CHECK(c.uniform() == d.uniform());
    CHECK(c.poisson(3.7) == d.poisson(3.7));
  }
}

TEST_CASE("different streams differ") {
  Rng a(42, 7), b(42, 8), c(43, 7);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    same_ab += (a.u64() == b.u64());
    same_ac += (a.u64() == c.u64());
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("derive is deterministic and tag-sensitive") {
  Rng base(5, 11);
  Rng d1 = base.derive(3), d2 = base.derive(3), d3 = base.derive(4);
  CHECK(d1.u64() == d2.u64());
  CHECK(d1.u64() != d3.u64());
  Rng n1 = base.derive("one-arm", 17), n2 = base.derive("one-arm", 17);
  CHECK(n1.u64() == n2.u64());
  CHECK(base.derive("one-arm", 17).u64() != base.derive("one-arm", 18).u64());
  CHECK(base.derive("one-arm", 17).u64() != base.derive("inversion", 17).u64());
}

TEST_CASE("normal moments") {
  Rng r(1, 2);
  const int n = 200000;
  double s = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(s4 / n - 3.0) < 0.1);
}

TEST_CASE("poisson moments, small and large mean") {
  Rng r(9, 1);
  for (double mean : {0.2, 4.0, 80.0}) {
    const int n = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(r.poisson(mean));
      s += k;
      s2 += k * k;
    }
    const double m = s / n;
    const double var = s2 / n - m * m;
    CHECK(std::abs(m - mean) < 5.0 * std::sqrt(mean / n) + 1e-3);
    CHECK(std::abs(var - mean) < 0.05 * mean + 0.05);
  }
}

TEST_CASE("uniform sphere points have unit norm and vanishing mean") {
  Rng r(3, 3);
  Vec3 acc{0, 0, 0};
  for (int i = 0; i < 20000; ++i) {
    const Vec3 p = r.uniform_sphere(2.0);
    CHECK(p.norm() == doctest::Approx(2.0).epsilon(1e-12));
    acc += p;
  }
  CHECK(acc.norm() / 20000 < 0.05);
}
