#pragma once

// Poisson loop soup generation with diameter-band thinning, and the
// shell-crossing counters.
//
// The loop measure factorizes over (root, duration, bridge shape): roots are
// uniform, durations carry the density t^{-1-d/2} (2 pi)^{-d/2}. A diameter
// band is realized by proposing from a duration band wide enough to cover it
// and thinning on the realized vertex diameter. The duration window uses the
// calibrated spread of the unit-loop diameter:
//   diam / sqrt(T) in [C_LO, C_HI] up to a D^3-weighted defect < 2e-4
// (measured: P-weighted tails at C_HI = 3.2 and C_LO = 0.6 are each about
// 1e-4; the spec budget is 1e-3). Wide bands are split into diameter
// octaves, each with its own duration window and window enlargement; the
// union of the independent octave soups has exactly the law of the banded
// soup because the octave thinning events are disjoint.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsoup/geom.hpp"
#include "loopsoup/paths.hpp"
#include "loopsoup/radial.hpp"
#include "loopsoup/rng.hpp"
#include "loopsoup/stats.hpp"

namespace loopsoup {

inline constexpr double kDiamOverSqrtTHi = 3.2;  // calibrated, see header note
inline constexpr double kDiamOverSqrtTLo = 0.6;
inline constexpr double kBandCoverageDefect = 2e-4;  // calibrated bound

enum class BorderMode {
  intersect,  // keep loops whose bounding box meets the target window
  confine     // keep loops contained in the window
};

struct SoupConfig {
  double alpha = 1.0;
  Box3 window;                 // target window
  double diam_min = 0.0;       // 0 with diam_max = inf disables thinning
  double diam_max = 0.0;
  double steps_per_unit = 64.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  BorderMode border = BorderMode::intersect;
  // explicit duration proposal band; both zero means "derive from the band"
  double proposal_t_lo = 0.0;
  double proposal_t_hi = 0.0;

  bool thinning_disabled() const {
    return diam_min == 0.0 && std::isinf(diam_max);
  }
  void validate() const {
    if (!(alpha > 0.0)) throw std::domain_error("SoupConfig: alpha > 0 required");
    if (window.empty() || window.volume() <= 0.0)
      throw std::domain_error("SoupConfig: empty window");
    if (!thinning_disabled() && !(0.0 < diam_min && diam_min < diam_max))
      throw std::domain_error("SoupConfig: need 0 < diam_min < diam_max");
    if (thinning_disabled() && !(proposal_t_lo > 0.0 && proposal_t_hi > proposal_t_lo))
      throw std::domain_error(
          "SoupConfig: thinning disabled requires an explicit duration band");
    if (!(steps_per_unit > 0.0))
      throw std::domain_error("SoupConfig: steps_per_unit > 0 required");
  }
};

struct LoopRef {
  std::uint64_t first = 0;   // index into the flat arrays
  std::uint32_t nvert = 0;   // m + 1
  double duration = 0.0;
  double diameter = 0.0;
  Box3 bbox;
};

struct LoopSoup {
  SoupConfig config;
  std::vector<LoopRef> loops;
  std::vector<Vec3> points;
  std::vector<double> times;
  std::uint64_t proposal_count = 0;
  double proposal_mass = 0.0;        // expected proposals, alpha included
  double thinning_acceptance = 0.0;  // realized fraction kept
  double coverage_defect_bound = 0.0;

  std::size_t size() const { return loops.size(); }
  std::span<const Vec3> points_of(std::size_t i) const {
    return {points.data() + loops[i].first, loops[i].nvert};
  }
  std::span<const double> times_of(std::size_t i) const {
    return {times.data() + loops[i].first, loops[i].nvert};
  }
  Loop materialize(std::size_t i) const {
    Loop loop;
    const auto ps = points_of(i);
    const auto ts = times_of(i);
    loop.points.assign(ps.begin(), ps.end());
    loop.times.assign(ts.begin(), ts.end());
    loop.duration = loops[i].duration;
    loop.diameter = loops[i].diameter;
    loop.bbox = loops[i].bbox;
    return loop;
  }
};

namespace detail {

struct Stratum {
  double diam_lo = 0.0, diam_hi = 0.0;  // 0,inf when thinning disabled
  bool last = true;                     // upper edge inclusive
  double t_lo = 0.0, t_hi = 0.0;
  double pad = 0.0;  // window enlargement
  double mass = 0.0; // expected proposals, alpha and volume included
};

inline std::vector<Stratum> build_strata(const SoupConfig& cfg) {
  std::vector<Stratum> strata;
  if (cfg.thinning_disabled()) {
    Stratum s;
    s.diam_lo = 0.0;
    s.diam_hi = std::numeric_limits<double>::infinity();
    s.t_lo = cfg.proposal_t_lo;
    s.t_hi = cfg.proposal_t_hi;
    s.pad = 0.0;
    s.mass = cfg.alpha * cfg.window.volume() * band_mass_per_volume(3, s.t_lo, s.t_hi);
    strata.push_back(s);
    return strata;
  }
  std::vector<double> edges{cfg.diam_min};
  if (cfg.diam_max / cfg.diam_min <= 4.0) {
    edges.push_back(cfg.diam_max);
  } else {
    double e = cfg.diam_min;
    while (e * 2.0 < cfg.diam_max) {
      e *= 2.0;
      edges.push_back(e);
    }
    edges.push_back(cfg.diam_max);
  }
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    Stratum s;
    s.diam_lo = edges[k];
    s.diam_hi = edges[k + 1];
    s.last = (k + 2 == edges.size());
    s.t_lo = std::pow(s.diam_lo / kDiamOverSqrtTHi, 2.0);
    s.t_hi = std::pow(s.diam_hi / kDiamOverSqrtTLo, 2.0);
    if (cfg.proposal_t_lo > 0.0 || cfg.proposal_t_hi > 0.0) {
      // explicit band: must cover each stratum's derived window
      if (cfg.proposal_t_lo > s.t_lo * (1.0 + 1e-12) ||
          cfg.proposal_t_hi < s.t_hi * (1.0 - 1e-12))
        throw std::domain_error(
            "SoupConfig: proposal duration band too narrow to cover the diameter "
            "band (stratum [" +
            std::to_string(s.diam_lo) + "," + std::to_string(s.diam_hi) +
            ") needs t in [" + std::to_string(s.t_lo) + "," + std::to_string(s.t_hi) +
            "])");
      s.t_lo = std::max(s.t_lo, cfg.proposal_t_lo);
      s.t_hi = std::min(s.t_hi, cfg.proposal_t_hi);
    }
    s.pad = (cfg.border == BorderMode::intersect) ? s.diam_hi : 0.0;
    s.mass = cfg.alpha * cfg.window.enlarged(s.pad).volume() *
             band_mass_per_volume(3, s.t_lo, s.t_hi);
    strata.push_back(s);
  }
  return strata;
}

// Deviation bound for refinement growth: with probability >= 1 - tol no
// refined vertex moves farther than this from its coarse segment.
inline double refinement_growth_bound(std::size_t coarse_segments, double dt_coarse,
                                      double tol = 1e-9) {
  return std::sqrt(1.5 * dt_coarse *
                   std::log(6.0 * static_cast<double>(coarse_segments) / tol));
}

}  // namespace detail

// Realization of the Poisson loop soup restricted to the window and the
// diameter band. Deterministic in (config.seed, config.stream).
inline LoopSoup generate_soup(const SoupConfig& cfg) {
  cfg.validate();
  LoopSoup soup;
  soup.config = cfg;
  Rng rng(cfg.seed, cfg.stream);

  const auto strata = detail::build_strata(cfg);
  double total_mass = 0.0;
  for (const auto& s : strata) total_mass += s.mass;
  soup.proposal_mass = total_mass;
  soup.coverage_defect_bound = cfg.thinning_disabled() ? 0.0 : kBandCoverageDefect;

  Loop scratch;
  for (const auto& s : strata) {
    const Box3 pwin = cfg.window.enlarged(s.pad);
    const std::uint64_t n = rng.poisson(s.mass);
    soup.proposal_count += n;
    for (std::uint64_t i = 0; i < n; ++i) {
      const Vec3 root = rng.uniform_in(pwin);
      const double t = sample_duration_band(3, s.t_lo, s.t_hi, rng);
      const std::size_t m_target = steps_for_duration(cfg.steps_per_unit, t);

      std::vector<Vec3> pts;
      std::vector<double> tms;
      if (m_target <= 1024) {
        OpenPath b = sample_bridge(root, root, t, m_target, rng);
        pts = std::move(b.points);
        tms = std::move(b.times);
      } else {
        // two-phase: coarse bridge, cheap prune, dyadic refinement
        const std::size_t m0 = 512;
        std::size_t levels = 0;
        while ((m0 << levels) < m_target) ++levels;
        OpenPath b = sample_bridge(root, root, t, m0, rng);
        const double g =
            detail::refinement_growth_bound(m0, t / static_cast<double>(m0));
        Box3 cb;
        for (const Vec3& p : b.points) cb.expand(p);
        const double cd = polyline_diameter(b.points);
        bool keep = true;
        if (!cfg.thinning_disabled()) {
          if (cd > s.diam_hi) keep = false;                 // exact reject
          if (cd + 2.0 * g < s.diam_lo) keep = false;       // 1e-9 bias
        }
        if (keep && cfg.border == BorderMode::intersect &&
            !cb.enlarged(g).intersects(cfg.window))
          keep = false;                                     // 1e-9 bias
        if (keep && cfg.border == BorderMode::confine &&
            !(cfg.window.contains(cb.lo) && cfg.window.contains(cb.hi)))
          keep = false;                                     // exact reject
        if (!keep) continue;
        for (std::size_t l = 0; l < levels; ++l) refine_midpoints(b.times, b.points, rng);
        pts = std::move(b.points);
        tms = std::move(b.times);
      }

      pts.back() = pts.front();  // close bit-exactly
      scratch.points = std::move(pts);
      scratch.times = std::move(tms);
      finalize_loop(scratch);

      bool keep = true;
      if (!cfg.thinning_disabled()) {
        const double lo = std::max(s.diam_lo, cfg.diam_min);
        const double hi = std::min(s.diam_hi, cfg.diam_max);
        const bool upper_ok = s.last ? (scratch.diameter <= hi) : (scratch.diameter < hi);
        keep = (scratch.diameter >= lo) && upper_ok;
      }
      if (keep && cfg.border == BorderMode::intersect && !cfg.thinning_disabled())
        keep = scratch.bbox.intersects(cfg.window);
      if (keep && cfg.border == BorderMode::confine)
        keep = cfg.window.contains(scratch.bbox.lo) && cfg.window.contains(scratch.bbox.hi);
      if (!keep) continue;

      LoopRef ref;
      ref.first = soup.points.size();
      ref.nvert = static_cast<std::uint32_t>(scratch.points.size());
      ref.duration = scratch.duration;
      ref.diameter = scratch.diameter;
      ref.bbox = scratch.bbox;
      soup.loops.push_back(ref);
      soup.points.insert(soup.points.end(), scratch.points.begin(), scratch.points.end());
      soup.times.insert(soup.times.end(), scratch.times.begin(), scratch.times.end());
    }
  }
  soup.thinning_acceptance =
      soup.proposal_count == 0
          ? 0.0
          : static_cast<double>(soup.loops.size()) / static_cast<double>(soup.proposal_count);
  return soup;
}

// Union of two realized soups (the superposition coupling).
inline LoopSoup merge_soups(const LoopSoup& a, const LoopSoup& b) {
  LoopSoup out = a;
  out.config.alpha = a.config.alpha + b.config.alpha;
  const std::uint64_t base = out.points.size();
  out.points.insert(out.points.end(), b.points.begin(), b.points.end());
  out.times.insert(out.times.end(), b.times.begin(), b.times.end());
  for (LoopRef ref : b.loops) {
    ref.first += base;
    out.loops.push_back(ref);
  }
  out.proposal_count += b.proposal_count;
  out.proposal_mass += b.proposal_mass;
  out.thinning_acceptance =
      out.proposal_count == 0
          ? 0.0
          : static_cast<double>(out.loops.size()) / static_cast<double>(out.proposal_count);
  return out;
}

// ---------------------------------------------------------------------------
// Shell-crossing counters (soup-free): Poisson mean of loops crossing
// B(1) \ closure(B(r)) exactly n times, by direct generation of the loops
// that could cross and lazy refined counting.

struct ShellCrossingOptions {
  double t_top = 65536.0;  // duration coverage; the crossing tail is ~ t^{-1/2}
  double window_kappa = 3.5;
  double floor_scale = 64.0;
};

struct ShellCrossingResult {
  Estimate estimate;                   // per-soup Poisson mean of n-crossers
  std::vector<std::uint64_t> counts;   // per-replicate counts (dispersion tests)
  double coverage_defect_bound = 0.0;  // conservative tail estimate
};

// Exact spectral values of the crossing decomposition for tests and
// reporting: lambda_n(r) = (1/n) sum_l (2l+1) r^{n(2l+1)} and the total
// crossing mass m(r) = -sum_l (2l+1) log(1 - r^{2l+1}).
inline double shell_crossing_mean_exact(double r, int n) {
  double sum = 0.0;
  for (int l = 0;; ++l) {
    const double term = (2.0 * l + 1.0) * std::pow(r, n * (2.0 * l + 1.0));
    sum += term;
    if (term < 1e-17 * std::max(1.0, sum) || l > 100000) break;
  }
  return sum / n;
}

inline double crossing_mass_exact(double r) {
  double sum = 0.0;
  for (int l = 0;; ++l) {
    const double term = -(2.0 * l + 1.0) * std::log1p(-std::pow(r, 2.0 * l + 1.0));
    sum += term;
    if (term < 1e-17 * std::max(1.0, sum) || l > 100000) break;
  }
  return sum;
}

inline ShellCrossingResult shell_crossing_count(double alpha, double r, int n_crossings,
                                                std::size_t replicates, const Rng& base_rng,
                                                const ShellCrossingOptions& opt = {}) {
  if (!(alpha > 0.0)) throw std::domain_error("shell_crossing_count: alpha > 0");
  if (!(r > 0.0 && r < 0.95))
    throw std::domain_error("shell_crossing_count: need 0 < r < 0.95 (no shell)");
  if (n_crossings < 1) throw std::domain_error("shell_crossing_count: n >= 1");
  if (replicates < 30)
    throw std::domain_error("shell_crossing_count: need >= 30 replicates");

  const RadialScanParams scan_params = RadialScanParams::shell(r, 1.0, opt.floor_scale);
  // crossing loops span at least 1 - r
  const double t_base = std::pow((1.0 - r) / 4.0, 2.0);

  ShellCrossingResult result;
  result.counts.resize(replicates, 0);
  // duration tail of the crossing mass ~ 1.6 r / sqrt(t): conservative bound
  result.coverage_defect_bound = 1.6 * r / std::sqrt(opt.t_top) / crossing_mass_exact(r);

  for (std::size_t rep = 0; rep < replicates; ++rep) {
    Rng rng = base_rng.derive("shell-crossing", rep);
    std::uint64_t hits = 0;
    for (double t_lo = t_base; t_lo < opt.t_top; t_lo *= 2.0) {
      const double t_hi = std::min(2.0 * t_lo, opt.t_top);
      const double radius = 1.0 + opt.window_kappa * std::sqrt(t_hi);
      const double vol = 4.0 / 3.0 * M_PI * radius * radius * radius;
      const double mass = alpha * vol * band_mass_per_volume(3, t_lo, t_hi);
      const std::uint64_t n = rng.poisson(mass);
      for (std::uint64_t i = 0; i < n; ++i) {
        const Vec3 root = rng.uniform_in_ball(radius);
        const double t = sample_duration_band(3, t_lo, t_hi, rng);
        // a crossing must enter B(r); prune roots that cannot plausibly reach it
        if (!bridge_can_reach(root, t, Box3::cube(r), 1e-12)) continue;
        const CrossingScan scan = radial_profile_lazy(root, t, scan_params, rng);
        if (scan.crossings() == n_crossings) ++hits;
      }
    }
    result.counts[rep] = hits;
  }

  std::vector<double> vals(result.counts.begin(), result.counts.end());
  result.estimate = mean_estimate(vals, base_rng.seed(),
                                  "shell_crossing_count r=" + std::to_string(r) +
                                      " n=" + std::to_string(n_crossings));
  return result;
}

}  // namespace loopsoup
