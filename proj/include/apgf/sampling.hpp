/// \file sampling.hpp
/// Sampled suprema on finite windows, with local golden-section refinement of
/// the best sample maxima, and the default window/mesh heuristics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "apgf/error.hpp"
#include "apgf/trigpoly.hpp"

namespace apgf {

/// Window and mesh for sampled sups over [-window, window]. Zero means "auto".
struct SupConfig {
  double window = 0.0;
  double mesh = 0.0;
  std::size_t max_points = 20000;
  bool refine = true;
};

/// Window and mesh actually used for one sampled sup.
struct SampleSpec {
  double lo = 0.0;
  double hi = 0.0;
  double mesh = 0.0;
  bool truncated = false;  // window shrunk to respect max_points
};

inline constexpr double kMaxAutoWindow = 1e4;
inline constexpr double kPointsPerPeriod = 20.0;

/// Auto window: 100 periods of the smallest frequency gap, capped at 1e4.
/// Auto mesh: 20 samples per period of the largest frequency.
inline SampleSpec resolve_window(const SupConfig& cfg, double min_gap, double max_freq) {
  SampleSpec s;
  double window = cfg.window;
  if (window <= 0.0) {
    const double g = std::isfinite(min_gap) && min_gap > 0.0 ? min_gap : std::max(max_freq, 1.0);
    window = std::min(kMaxAutoWindow, 100.0 * two_pi / g);
  }
  double mesh = cfg.mesh;
  if (mesh <= 0.0) {
    mesh = max_freq > 0.0 ? two_pi / (kPointsPerPeriod * max_freq) : window / 8.0;
    mesh = std::min(mesh, window / 8.0);
  }
  if (mesh >= window) throw InvalidInput("sampled sup: mesh must be smaller than window");
  if (cfg.max_points > 1 && 2.0 * window / mesh > static_cast<double>(cfg.max_points)) {
    window = 0.5 * mesh * static_cast<double>(cfg.max_points);
    s.truncated = true;
  }
  s.lo = -window;
  s.hi = window;
  s.mesh = mesh;
  return s;
}

namespace detail {

template <class F>
double golden_max(F&& f, double a, double b, double tol) {
  constexpr double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return std::max(fc, fd);
}


inline std::size_t sample_count(double lo, double hi, double mesh) {
  if (!(hi > lo) || !(mesh > 0.0)) throw InvalidInput("sampled_sup: empty window or mesh");
  return static_cast<std::size_t>(std::ceil((hi - lo) / mesh)) + 1;
}

inline double sample_point(double lo, double hi, double mesh, std::size_t i) {
  return std::min(hi, lo + static_cast<double>(i) * mesh);
}

// Best sample, then golden-section refinement around the 16 largest local
// sample maxima.
template <class G>
double refine_sup(const std::vector<double>& v, G&& g, double lo, double hi, double mesh, bool refine) {
  const std::size_t n = v.size();
  double best = *std::max_element(v.begin(), v.end());
  if (!refine || !std::isfinite(best) || n < 3) return best;
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 || v[i] >= v[i - 1];
    const bool right = i + 1 == n || v[i] >= v[i + 1];
    if (left && right) peaks.push_back(i);
  }
  constexpr std::size_t kRefine = 16;
  if (peaks.size() > kRefine) {
    std::partial_sort(peaks.begin(), peaks.begin() + kRefine, peaks.end(),
                      [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    peaks.resize(kRefine);
  }
  for (auto i : peaks) {
    const double x = lo + static_cast<double>(i) * mesh;
    const double a = std::max(lo, x - mesh);
    const double b = std::min(hi, x + mesh);
    if (b > a) best = std::max(best, golden_max(g, a, b, mesh * 1e-9));
  }
  return best;
}

}  // namespace detail

/// max |f(x)| over x in [lo, hi] sampled at `mesh`, then refined around the
/// largest local sample maxima. Never exceeds the true sup of |f|.
template <class F>
double sampled_sup(F&& f, double lo, double hi, double mesh, bool refine = true) {
  const std::size_t n = detail::sample_count(lo, hi, mesh);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::abs(f(detail::sample_point(lo, hi, mesh, i)));
  return detail::refine_sup(v, [&](double x) { return std::abs(f(x)); }, lo, hi, mesh, refine);
}

/// Sampled sup of a trigonometric polynomial. Samples are generated by phasor
/// recurrence, re-anchored with exact exponentials every 64 steps.
inline double sampled_sup(const TrigPoly& p, double lo, double hi, double mesh, bool refine = true) {
  const std::size_t n = detail::sample_count(lo, hi, mesh);
  if (p.is_zero()) return 0.0;
  const auto t = p.terms();
  std::vector<complex> step(t.size()), cur(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) step[j] = std::polar(1.0, t[j].frequency * mesh);
  std::vector<double> v(n);
  constexpr std::size_t kAnchor = 64;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % kAnchor == 0 || i + 1 == n) {
      const double x = detail::sample_point(lo, hi, mesh, i);
      for (std::size_t j = 0; j < t.size(); ++j) cur[j] = t[j].coefficient * std::polar(1.0, t[j].frequency * x);
    } else {
      for (std::size_t j = 0; j < t.size(); ++j) cur[j] *= step[j];
    }
    complex s{};
    for (const auto& c : cur) s += c;
    v[i] = std::abs(s);
  }
  return detail::refine_sup(v, [&](double x) { return std::abs(p.evaluate(x)); }, lo, hi, mesh, refine);
}

/// sum_{j<=k} sup |P^(j)| over [-window, window].
inline double sup_seminorm_sampled(const TrigPoly& p, int k, double window, double mesh,
                                   bool refine = true) {
  if (k < 0) throw InvalidInput("sup_seminorm_sampled: negative order");
  if (!(window > 0.0) || !(mesh > 0.0)) throw InvalidInput("sup_seminorm_sampled: window and mesh must be positive");
  if (mesh >= window) throw InvalidInput("sup_seminorm_sampled: mesh must be smaller than window");
  if (p.is_zero()) return 0.0;
  double total = 0.0;
  for (int j = 0; j <= k; ++j) {
    const TrigPoly d = derivative(p, j);
    if (d.is_zero()) continue;
    total += sampled_sup(d, -window, window, mesh, refine);
  }
  return total;
}

/// Sampled seminorm with auto window/mesh from the polynomial's own frequencies.
inline double sup_seminorm_sampled(const TrigPoly& p, int k, const SupConfig& cfg = {}) {
  if (p.is_zero()) return 0.0;
  const SampleSpec s = resolve_window(cfg, p.min_frequency_gap(), p.max_abs_frequency());
  return sup_seminorm_sampled(p, k, s.hi, s.mesh, cfg.refine);
}

}  // namespace apgf
