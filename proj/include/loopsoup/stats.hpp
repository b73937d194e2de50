#pragma once

// Monte Carlo bookkeeping: Estimate (value, stderr, replicate count, seed
// provenance), compensated summation for deterministic reductions,
// Kolmogorov-Smirnov tests, and the weighted log-log line fit used by the
// exponent estimators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopsoup {

// Neumaier-compensated running sum; order-stable to ulp scale.
class KahanSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n = 0;  // independent replicates
  std::uint64_t seed = 0;
  std::string metadata;

  bool consistent_with(double target, double tol_abs, double n_sigma = 3.0) const {
    return std::abs(value - target) <= tol_abs + n_sigma * stderr_;
  }
};

// Mean and standard error over independent replicates (n >= 2 per the
// Estimate invariant).
inline Estimate mean_estimate(const std::vector<double>& xs, std::uint64_t seed = 0,
                              std::string meta = {}) {
  if (xs.size() < 2) throw std::invalid_argument("mean_estimate: need >= 2 replicates");
  KahanSum s;
  for (double x : xs) s.add(x);
  const double n = static_cast<double>(xs.size());
  const double mean = s.value() / n;
  KahanSum q;
  for (double x : xs) q.add((x - mean) * (x - mean));
  const double var = q.value() / (n - 1.0);
  Estimate e;
  e.value = mean;
  e.stderr_ = std::sqrt(std::max(0.0, var / n));
  e.n = xs.size();
  e.seed = seed;
  e.metadata = std::move(meta);
  return e;
}

// Binomial proportion with its exact-variance standard error.
inline Estimate proportion_estimate(std::uint64_t hits, std::uint64_t n,
                                    std::uint64_t seed = 0, std::string meta = {}) {
  if (n < 2) throw std::invalid_argument("proportion_estimate: need >= 2 replicates");
  Estimate e;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  e.value = p;
  e.stderr_ = std::sqrt(std::max(0.0, p * (1.0 - p) / static_cast<double>(n)));
  e.n = n;
  e.seed = seed;
  e.metadata = std::move(meta);
  return e;
}

// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_tail(double lambda) {
  if (lambda < 0.04) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    s += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;  // sup |F_n - F|
  double p_value = 1.0;
};

// One-sample KS against a cdf callable. Stephens' finite-n correction.
inline KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  const std::size_t n = sample.size();
  if (n < 8) throw std::invalid_argument("ks_test: sample too small");
  std::sort(sample.begin(), sample.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  const double sn = std::sqrt(static_cast<double>(n));
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

// Two-sample KS.
inline KsResult ks_test_two(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 8 || b.size() < 8) throw std::invalid_argument("ks_test_two: samples too small");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
  const double sn = std::sqrt(ne);
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
};

// Weighted least squares for y = a + b x with per-point variances.
inline LineFit wls_line(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<double>& var) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || var.size() != n)
    throw std::invalid_argument("wls_line: need >= 2 points with matching variances");
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / std::max(var[i], 1e-300);
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
    swxx += w * x[i] * x[i];
    swxy += w * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  if (det <= 0.0) throw std::runtime_error("wls_line: singular system");
  LineFit f;
  f.slope = (sw * swxy - swx * swy) / det;
  f.intercept = (swxx * swy - swx * swxy) / det;
  f.slope_stderr = std::sqrt(sw / det);
  f.intercept_stderr = std::sqrt(swxx / det);
  return f;
}

// Index of dispersion (variance/mean) for count data; ~1 under Poisson.
inline double dispersion_index(const std::vector<std::uint64_t>& counts) {
  if (counts.size() < 2) throw std::invalid_argument("dispersion_index: need >= 2 counts");
  KahanSum s;
  for (auto c : counts) s.add(static_cast<double>(c));
  const double n = static_cast<double>(counts.size());
  const double mean = s.value() / n;
  if (mean <= 0.0) return 1.0;
  KahanSum q;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - mean;
    q.add(d * d);
  }
  return (q.value() / (n - 1.0)) / mean;
}

}  // namespace loopsoup
