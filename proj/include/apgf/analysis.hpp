/// \file analysis.hpp
/// Generalized mean value and Bohr transform, generalized trigonometric
/// polynomials and their spectrum, numeric spectrum scanning, primitives and
/// the generalized Bohl-Bohr verdict, composition with polynomials, and a
/// numeric almost-period search.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apgf/distribution.hpp"
#include "apgf/epsnet.hpp"
#include "apgf/error.hpp"
#include "apgf/quadrature.hpp"
#include "apgf/sampling.hpp"
#include "apgf/trigpoly.hpp"

namespace apgf {

/// Function of one real variable, the callable form of a frozen-eps slice.
using SliceFunction = std::function<complex(double)>;

// ---------------------------------------------------------------------------
// Means

/// plain:  (1/X) int_0^X f
/// cesaro: triangular (Fejer) weight on [0, X], i.e. the plain means over
///         windows [s, s + X/2] averaged over s in [0, X/2]; leakage from a
///         frequency mu decays like (mu X)^-2 instead of (mu X)^-1.
enum class Averaging { plain, cesaro };

inline const char* to_string(Averaging a) { return a == Averaging::plain ? "plain" : "cesaro"; }

struct MeanEstimate {
  complex value{};
  /// Bound on |value - M(f)|; available for trigonometric polynomials only.
  std::optional<double> error_bound;
};

namespace detail {

/// Averaging functional applied to e^{i mu x}.
inline complex averaging_kernel(double mu, double X, Averaging a) {
  if (mu == 0.0) return 1.0;
  if (a == Averaging::plain) {
    const double z = mu * X;
    const double s = std::sin(0.5 * z);
    return complex{std::sin(z) / z, 2.0 * s * s / z};
  }
  const double u = 0.25 * mu * X;
  const double sinc = std::sin(u) / u;
  return std::polar(sinc * sinc, 0.5 * mu * X);
}

inline double averaging_kernel_bound(double mu, double X, Averaging a) {
  if (mu == 0.0) return 0.0;
  const double z = std::abs(mu * X);
  return a == Averaging::plain ? std::min(1.0, 2.0 / z) : std::min(1.0, 16.0 / (z * z));
}

/// Quadrature weights for the averaging functional on a uniform grid over
/// [0, X] with n panels, n a multiple of 4 so that X/2 is an even node.
inline std::vector<double> averaging_weights(double X, std::size_t n, Averaging a) {
  std::vector<double> w(n + 1);
  const double h = X / static_cast<double>(n);
  for (std::size_t j = 0; j <= n; ++j) {
    const double simpson = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    const double t = static_cast<double>(j) * h;
    const double kernel = a == Averaging::plain ? 1.0 / X : (2.0 / X) * (1.0 - std::abs(2.0 * t - X) / X);
    w[j] = simpson * h / 3.0 * kernel;
  }
  return w;
}

inline std::size_t averaging_panels(double X, double frequency) {
  const double mesh = two_pi / (kPointsPerPeriod * std::max(frequency, 1e-3));
  auto n = static_cast<std::size_t>(std::ceil(X / mesh));
  n = std::clamp<std::size_t>(n, 400, 4'000'000);
  return (n + 3) / 4 * 4;
}

inline void check_window(double X) {
  if (!(X > 0.0) || !std::isfinite(X)) throw InvalidInput("mean: averaging window must be positive and finite");
}

}  // namespace detail

/// Finite-window mean of a trigonometric polynomial with its distance bound
/// to the exact mean.
inline MeanEstimate mean_estimate(const TrigPoly& f, double X, Averaging a = Averaging::plain) {
  detail::check_window(X);
  MeanEstimate m;
  double bound = 0.0;
  for (const auto& t : f.terms()) {
    m.value += t.coefficient * detail::averaging_kernel(t.frequency, X, a);
    bound += std::abs(t.coefficient) * detail::averaging_kernel_bound(t.frequency, X, a);
  }
  m.error_bound = bound;
  return m;
}

/// Finite-window mean of a general slice by composite Simpson; `frequency`
/// sets the sampling density.
inline MeanEstimate mean_estimate(const SliceFunction& f, double X, Averaging a = Averaging::plain,
                                  double frequency = 1.0) {
  detail::check_window(X);
  const std::size_t n = detail::averaging_panels(X, frequency);
  const auto w = detail::averaging_weights(X, n, a);
  MeanEstimate m;
  const double h = X / static_cast<double>(n);
  for (std::size_t j = 0; j <= n; ++j) m.value += w[j] * f(static_cast<double>(j) * h);
  return m;
}

struct MeanOptions {
  double window = 1e4;
  Averaging averaging = Averaging::cesaro;
  ClassifyOptions classify{};
};

struct GeneralizedMean {
  GeneralizedScalar value;
  /// Per-eps: exact limit for symbolic slices (no bound needed), otherwise
  /// the finite-window estimate, with a bound when one is known.
  bool exact = false;
  std::vector<std::optional<double>> error_bounds;
  Classification classification;
};

namespace detail {
inline GeneralizedMean finish_mean(const EpsGrid& g, std::vector<complex> v, bool exact,
                                   std::vector<std::optional<double>> bounds, const ClassifyOptions& opt) {
  GeneralizedMean r{GeneralizedScalar(g, std::move(v)), exact, std::move(bounds), {}};
  r.classification = classify(r.value, opt);
  if (!exact) r.classification.caveats.push_back("finite-window estimate of the mean");
  return r;
}
}  // namespace detail

/// M_g(u) = ((lim 1/X int_0^X u_eps)_eps).
inline GeneralizedMean generalized_mean(const GeneralizedFunction& u, const MeanOptions& opt = {}) {
  std::vector<complex> v;
  std::vector<std::optional<double>> b;
  for (std::size_t i = 0; i < u.grid().size(); ++i) {
    if (u.is_symbolic()) {
      v.push_back(mean_exact(u.slice(i)));
      b.emplace_back(0.0);
    } else {
      auto f = [&u, i](double x) { return u.evaluate(i, x); };
      v.push_back(mean_estimate(f, opt.window, opt.averaging, u.frequency_scale(i)).value);
      b.emplace_back(std::nullopt);
    }
  }
  return detail::finish_mean(u.grid(), std::move(v), u.is_symbolic(), std::move(b), opt.classify);
}

/// a_lambda(u) = M_g(u e^{-i lambda x}) for a real frequency net lambda.
inline GeneralizedMean bohr_transform(const GeneralizedFunction& u, const GeneralizedScalar& lambda,
                                      const MeanOptions& opt = {}) {
  if (!lambda.is_real()) throw InvalidInput("bohr transform: frequency net must be real");
  const EpsGrid g = EpsGrid::intersect(u.grid(), lambda.grid());
  const auto ur = u.restricted(g);
  const auto lr = lambda.restricted(g);
  std::vector<complex> v;
  std::vector<std::optional<double>> b;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double l = lr[i].real();
    if (ur.is_symbolic()) {
      v.push_back(bohr_coefficient_exact(ur.slice(i), l));
      b.emplace_back(0.0);
    } else {
      auto f = [&ur, i, l](double x) { return ur.evaluate(i, x) * std::polar(1.0, -l * x); };
      v.push_back(mean_estimate(f, opt.window, opt.averaging, std::max(ur.frequency_scale(i), std::abs(l))).value);
      b.emplace_back(std::nullopt);
    }
  }
  return detail::finish_mean(g, std::move(v), ur.is_symbolic(), std::move(b), opt.classify);
}

inline GeneralizedMean bohr_transform(const GeneralizedFunction& u, double lambda, const MeanOptions& opt = {}) {
  return bohr_transform(u, GeneralizedScalar::constant(u.grid(), lambda), opt);
}

struct MeanCompatibility {
  GeneralizedScalar generalized;  // M_g(i_ap(T))
  complex classical{};            // M(T)
  std::vector<double> defect;     // |M_g(i_ap(T))_eps - M(T)|
  double max_defect = 0.0;
};

inline MeanCompatibility mean_compatibility_check(const ApDistribution& t, const Mollifier& rho,
                                                  EpsGrid grid = EpsGrid::default_grid()) {
  const auto gm = generalized_mean(embed_iap(t, rho, std::move(grid)));
  MeanCompatibility r{gm.value, distribution_mean(t), {}, 0.0};
  for (const auto& v : r.generalized.values()) {
    r.defect.push_back(std::abs(v - r.classical));
    r.max_defect = std::max(r.max_defect, r.defect.back());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Generalized trigonometric polynomials

struct GenTerm {
  GeneralizedScalar frequency;    // real-valued
  GeneralizedScalar coefficient;
};

/// P_eps(x) = sum_n c_{eps,n} e^{i lambda_{eps,n} x}. Terms with identical
/// frequency nets are merged.
class GenTrigPoly {
 public:
  GenTrigPoly() = default;
  explicit GenTrigPoly(std::vector<GenTerm> terms) {
    if (terms.empty()) return;
    grid_ = terms.front().frequency.grid();
    for (const auto& t : terms) {
      if (!t.frequency.is_real()) throw InvalidInput("generalized trigonometric polynomial: frequency net must be real");
      grid_ = EpsGrid::intersect(grid_, EpsGrid::intersect(t.frequency.grid(), t.coefficient.grid()));
    }
    for (const auto& t : terms) {
      GenTerm r{t.frequency.restricted(grid_), t.coefficient.restricted(grid_)};
      auto same = std::find_if(terms_.begin(), terms_.end(), [&](const GenTerm& x) { return x.frequency == r.frequency; });
      if (same != terms_.end())
        same->coefficient = same->coefficient + r.coefficient;
      else
        terms_.push_back(std::move(r));
    }
  }

  /// Constant frequencies and coefficients on a grid.
  static GenTrigPoly from_trigpoly(const TrigPoly& p, const EpsGrid& grid = EpsGrid::default_grid()) {
    std::vector<GenTerm> t;
    for (const auto& x : p.terms())
      t.push_back({GeneralizedScalar::constant(grid, x.frequency), GeneralizedScalar::constant(grid, x.coefficient)});
    GenTrigPoly g(std::move(t));
    g.grid_ = grid;
    return g;
  }

  const std::vector<GenTerm>& terms() const noexcept { return terms_; }
  const EpsGrid& grid() const noexcept { return grid_; }

  /// The symbolic net eps -> sum c_eps e^{i lambda_eps x}.
  GeneralizedFunction realize() const {
    if (terms_.empty()) return GeneralizedFunction::zero(grid_.size() ? grid_ : EpsGrid::default_grid());
    std::vector<TrigPoly> s;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      std::vector<Term> t;
      for (const auto& x : terms_) t.push_back({x.frequency[i].real(), x.coefficient[i]});
      s.push_back(TrigPoly::normalize(std::move(t)));
    }
    return GeneralizedFunction::symbolic(grid_, std::move(s));
  }

 private:
  EpsGrid grid_;
  std::vector<GenTerm> terms_;
};

inline GenTrigPoly gen_add(const GenTrigPoly& p, const GenTrigPoly& q) {
  auto t = p.terms();
  t.insert(t.end(), q.terms().begin(), q.terms().end());
  return GenTrigPoly(std::move(t));
}

inline GenTrigPoly gen_mul(const GenTrigPoly& p, const GenTrigPoly& q) {
  std::vector<GenTerm> t;
  for (const auto& a : p.terms())
    for (const auto& b : q.terms()) t.push_back({a.frequency + b.frequency, a.coefficient * b.coefficient});
  return GenTrigPoly(std::move(t));
}

inline GenTrigPoly gen_scale(const GenTrigPoly& p, const GeneralizedScalar& s) {
  std::vector<GenTerm> t;
  for (const auto& a : p.terms()) t.push_back({a.frequency, a.coefficient * s});
  return GenTrigPoly(std::move(t));
}

struct GenSpectrum {
  std::vector<GeneralizedScalar> frequencies;
  std::vector<std::string> notes;
};

/// Lambda_g(P): frequency nets of the terms whose coefficient net is not
/// negligible at the configured certificate level.
inline GenSpectrum gen_spectrum(const GenTrigPoly& p, const ClassifyOptions& opt = {}) {
  GenSpectrum s;
  for (std::size_t n = 0; n < p.terms().size(); ++n) {
    const auto& t = p.terms()[n];
    if (classify(t.coefficient, opt).negligible()) {
      s.notes.push_back("term " + std::to_string(n) + " excluded: negligible coefficient net");
      continue;
    }
    s.frequencies.push_back(t.frequency);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Spectrum scan

struct SpectrumOptions {
  double lo = -5.0;
  double hi = 5.0;
  double step = 0.1;
  double threshold = 1e-3;
  double window = 1e4;  // final averaging window X
  ClassifyOptions classify{};
};

struct SpectralPeak {
  double frequency = 0.0;
  complex reference_value{};  // coefficient estimate at the reference eps
  GeneralizedScalar coefficient;
  Classification classification;
};

struct SpectrumScan {
  std::vector<SpectralPeak> peaks;
  double reference_eps = 0.0;
  double coarse_window = 0.0;
  double window = 0.0;
  std::vector<std::string> warnings;
};

/// Peaks whose deflated coefficient is below this fraction of the strongest
/// one are treated as leakage.
inline constexpr double kSpectrumRelativeFloor = 1e-6;

namespace detail {

/// Fejer kernel of the window [-X/2, X/2]; real, so a small frequency error
/// perturbs the estimate only to second order.
inline double centered_kernel(double mu, double X) {
  if (mu == 0.0) return 1.0;
  const double u = 0.25 * mu * X;
  const double sinc = std::sin(u) / u;
  return sinc * sinc;
}

/// lambda -> cesaro-weighted mean of f e^{-i lambda x} over [-X/2, X/2] for one slice.
class CoefficientProbe {
 public:
  CoefficientProbe(const GeneralizedFunction& u, std::size_t i, double X, double lambda_max) : X_(X) {
    if (u.is_symbolic()) {
      poly_ = u.slice(i);
      return;
    }
    const std::size_t n = averaging_panels(X, std::max(u.frequency_scale(i), lambda_max));
    const auto w = averaging_weights(X, n, Averaging::cesaro);
    h_ = X / static_cast<double>(n);
    wf_.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) wf_[j] = w[j] * u.evaluate(i, static_cast<double>(j) * h_ - 0.5 * X);
  }

  complex operator()(double lambda) const {
    if (poly_) {
      complex s{};
      for (const auto& t : poly_->terms()) s += t.coefficient * centered_kernel(t.frequency - lambda, X_);
      return s;
    }
    complex s{};
    const complex step = std::polar(1.0, -lambda * h_);
    complex ph{1.0, 0.0};
    for (std::size_t j = 0; j < wf_.size(); ++j) {
      if (j % 64 == 0) ph = std::polar(1.0, -lambda * (static_cast<double>(j) * h_ - 0.5 * X_));
      s += wf_[j] * ph;
      ph *= step;
    }
    return s;
  }

 private:
  double X_;
  std::optional<TrigPoly> poly_;
  double h_ = 0.0;
  std::vector<complex> wf_;
};

}  // namespace detail

/// Numeric search for constant frequencies lambda in [lo, hi] with a
/// non-negligible Bohr coefficient net. The scan runs at the smallest eps on
/// the grid; each coarse peak is refined by golden-section search while the
/// averaging window grows fourfold per stage up to `window`.
inline SpectrumScan spectrum_scan(const GeneralizedFunction& u, const SpectrumOptions& opt = {}) {
  if (!(opt.lo < opt.hi) || !(opt.step > 0.0) || !(opt.threshold >= 0.0))
    throw InvalidInput("spectrum scan: need lo < hi, step > 0, threshold >= 0");
  detail::check_window(opt.window);
  SpectrumScan r;
  const std::size_t ref = u.grid().size() - 1;
  r.reference_eps = u.grid()[ref];
  r.window = opt.window;
  r.coarse_window = std::min(opt.window, two_pi / opt.step);
  const double lmax = std::max(std::abs(opt.lo), std::abs(opt.hi));

  const detail::CoefficientProbe coarse(u, ref, r.coarse_window, lmax);
  const auto nk = static_cast<std::size_t>(std::floor((opt.hi - opt.lo) / opt.step)) + 1;
  std::vector<double> lam(nk), amp(nk);
  for (std::size_t k = 0; k < nk; ++k) {
    lam[k] = opt.lo + static_cast<double>(k) * opt.step;
    amp[k] = std::abs(coarse(lam[k]));
  }
  std::vector<double> candidates;
  for (std::size_t k = 0; k < nk; ++k) {
    const bool left = k == 0 || amp[k] >= amp[k - 1];
    const bool right = k + 1 == nk || amp[k] > amp[k + 1];
    if (left && right && amp[k] >= 0.5 * opt.threshold && amp[k] > 0.0) candidates.push_back(lam[k]);
  }

  std::vector<double> stages;
  for (double X = r.coarse_window * 4.0; X < opt.window; X *= 4.0) stages.push_back(X);
  stages.push_back(opt.window);
  std::vector<detail::CoefficientProbe> probes;
  for (double X : stages) probes.emplace_back(u, ref, X, lmax);

  std::vector<double> refined;
  for (double c : candidates) {
    double center = c;
    double h = opt.step;
    for (std::size_t s = 0; s < stages.size(); ++s) {
      const auto& probe = probes[s];
      auto g = [&](double l) { return std::abs(probe(l)); };
      const bool last = s + 1 == stages.size();
      const double tol = last ? 1e-10 : h * 1e-4;
      double a = std::max(opt.lo - opt.step, center - h), b = std::min(opt.hi + opt.step, center + h);
      constexpr double invphi = 0.6180339887498949;
      double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
      double f1 = g(x1), f2 = g(x2);
      for (int it = 0; it < 300 && b - a > tol; ++it) {
        if (f1 > f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - invphi * (b - a);
          f1 = g(x1);
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + invphi * (b - a);
          f2 = g(x2);
        }
      }
      center = 0.5 * (a + b);
      h = 0.9 * std::numbers::pi / stages[s];
    }
    refined.push_back(center);
  }
  std::sort(refined.begin(), refined.end());
  const double merge = two_pi / opt.window;
  std::vector<double> unique;
  const auto& final_probe = probes.back();
  for (double l : refined) {
    if (!unique.empty() && l - unique.back() < merge) {
      if (std::abs(final_probe(l)) > std::abs(final_probe(unique.back()))) unique.back() = l;
      continue;
    }
    unique.push_back(l);
  }
  // sidelobes of strong peaks survive refinement as local maxima; remove
  // them by deflating with the kernel of every stronger accepted peak
  {
    std::vector<complex> val;
    double top = 0.0;
    for (double l : unique) {
      val.push_back(final_probe(l));
      top = std::max(top, std::abs(val.back()));
    }
    std::vector<std::size_t> order(unique.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(val[a]) > std::abs(val[b]); });
    const double floor = std::max(opt.threshold, kSpectrumRelativeFloor * top);
    std::vector<std::size_t> kept;
    for (std::size_t k : order) {
      complex res = val[k];
      for (std::size_t a : kept) res -= val[a] * detail::centered_kernel(unique[a] - unique[k], opt.window);
      if (std::abs(res) >= floor && std::abs(res) > 0.0) kept.push_back(k);
    }
    std::sort(kept.begin(), kept.end());
    std::vector<double> survivors;
    for (std::size_t k : kept) survivors.push_back(unique[k]);
    unique = std::move(survivors);
  }
  for (std::size_t k = 1; k < unique.size(); ++k)
    if (unique[k] - unique[k - 1] < 8.0 * std::numbers::pi / opt.window)
      r.warnings.push_back("peaks at " + std::to_string(unique[k - 1]) + " and " + std::to_string(unique[k]) +
                           " overlap at window " + std::to_string(opt.window));

  std::vector<detail::CoefficientProbe> slice_probes;
  for (std::size_t i = 0; i < u.grid().size(); ++i)
    slice_probes.push_back(i == ref ? probes.back() : detail::CoefficientProbe(u, i, opt.window, lmax));
  for (double l : unique) {
    if (l < opt.lo || l > opt.hi) continue;
    std::vector<complex> v;
    for (const auto& p : slice_probes) v.push_back(p(l));
    SpectralPeak p;
    p.frequency = l;
    p.reference_value = v[ref];
    p.coefficient = GeneralizedScalar(u.grid(), std::move(v));
    p.classification = classify(p.coefficient, opt.classify);
    if (p.classification.negligible() || std::abs(p.reference_value) < opt.threshold) continue;
    r.peaks.push_back(std::move(p));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Primitives and the Bohl-Bohr verdict

struct PrimitiveNet {
  GeneralizedFunction function;  // U_eps(x) = int_{x0}^x u_eps
  GeneralizedScalar linear;      // mean of u_eps: coefficient of the secular term x
  bool has_secular_term = false;
  bool symbolic = false;
};

inline PrimitiveNet gf_primitive(const GeneralizedFunction& u, double x0) {
  if (!std::isfinite(x0)) throw InvalidInput("primitive: non-finite base point");
  const EpsGrid& g = u.grid();
  if (u.is_symbolic()) {
    std::vector<PrimitiveResult> parts;
    std::vector<complex> lin;
    bool secular = false;
    for (const auto& s : u.slices()) {
      parts.push_back(primitive_exact(s, x0));
      lin.push_back(parts.back().linear_coefficient);
      secular = secular || !parts.back().is_almost_periodic();
    }
    PrimitiveNet r{GeneralizedFunction::zero(g), GeneralizedScalar(g, std::move(lin)), secular, true};
    if (!secular) {
      std::vector<TrigPoly> s;
      for (const auto& p : parts) s.push_back(p.periodic_part());
      r.function = GeneralizedFunction::symbolic(g, std::move(s)).with_sup_config(u.sup_config());
    } else {
      auto ps = std::make_shared<const std::vector<PrimitiveResult>>(std::move(parts));
      auto us = std::make_shared<const std::vector<TrigPoly>>(u.slices());
      r.function = GeneralizedFunction::callable(
                       g,
                       [ps, us, g](double e, double x, int k) {
                         auto i = g.index_of(e);
                         if (!i) throw InvalidInput("generalized function: eps not on grid");
                         if (k == 0) return (*ps)[*i].evaluate(x);
                         const auto& s = (*us)[*i];
                         return k == 1 ? s.evaluate(x) : derivative(s, k - 1).evaluate(x);
                       },
                       kUnboundedOrder, u.frequency_hint())
                       .with_sup_config(u.sup_config());
    }
    return r;
  }
  auto ev = u.evaluator();
  auto hint = u.frequency_hint();
  const int order = u.max_order() == kUnboundedOrder ? kUnboundedOrder : u.max_order() + 1;
  PrimitiveNet r{GeneralizedFunction::zero(g), GeneralizedScalar::constant(g, 0.0), false, false};
  r.function = GeneralizedFunction::callable(
                   g,
                   [ev, hint, x0](double e, double x, int k) -> complex {
                     if (k > 0) return ev(e, x, k - 1);
                     if (x == x0) return 0.0;
                     // breakpoints every four characteristic periods
                     const double piece = 4.0 * two_pi / std::max(std::abs(hint(e)), 1e-3);
                     const double lo = std::min(x0, x), hi = std::max(x0, x);
                     std::vector<double> pts{lo};
                     while (pts.back() + piece < hi) pts.push_back(pts.back() + piece);
                     pts.push_back(hi);
                     const auto res = quad::integrate_pieces([&](double t) { return ev(e, t, 0); }, pts, 1e-11 * (hi - lo));
                     return x > x0 ? res.value : -res.value;
                   },
                   order, hint)
                   .with_sup_config(u.sup_config());
  // Callable nets: the secular coefficient is estimated from the mean.
  const auto m = generalized_mean(u);
  r.linear = m.value;
  for (const auto& v : m.value.values())
    if (std::abs(v) > 1e-8) r.has_secular_term = true;
  return r;
}

enum class Boundedness { bounded, growing, inconclusive };

inline const char* to_string(Boundedness b) {
  switch (b) {
    case Boundedness::bounded: return "bounded";
    case Boundedness::growing: return "growing";
    default: return "inconclusive";
  }
}

struct BohlBohrOptions {
  double base_window = 64.0;  // W0; windows are [0, 2^r W0]
  int levels = 6;
  double grow_threshold = 0.1;
  double bounded_threshold = 0.01;
  std::size_t max_points = 200000;
  ClassifyOptions classify{};
};

struct SliceTrend {
  std::vector<double> sups;  // sup over [0, W_r] of |U_eps|
  double amplitude = 0.0;    // sup |u_eps| over the largest window
  double slope = 0.0;        // least-squares slope of sup vs W
  double slope_stderr = 0.0;
  double normalized_slope = 0.0;  // slope / amplitude
  Boundedness verdict = Boundedness::inconclusive;
};

struct BohlBohrReport {
  Boundedness verdict = Boundedness::inconclusive;
  std::vector<double> windows;
  std::vector<SliceTrend> slices;
  double trend_slope = 0.0;  // largest per-eps raw slope
  std::optional<Classification> primitive_classification;
  /// j >= 1: max over eps of | |U^(j)|_inf - |u^(j-1)|_inf | on sampled slices.
  std::vector<double> seminorm_transfer;
  bool almost_periodic = false;
  std::vector<std::string> caveats;
};

namespace detail {

inline void trend_fit(const std::vector<double>& w, SliceTrend& t) {
  const auto n = static_cast<double>(w.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    mx += w[i];
    my += t.sups[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sxx += (w[i] - mx) * (w[i] - mx);
    sxy += (w[i] - mx) * (t.sups[i] - my);
  }
  t.slope = sxy / sxx;
  double ss = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double r = t.sups[i] - (my + t.slope * (w[i] - mx));
    ss += r * r;
  }
  t.slope_stderr = w.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
}

}  // namespace detail

/// The primitive of u is almost periodic iff it is bounded. Boundedness is
/// judged per eps from the growth of sup |U_eps| over nested windows
/// [0, 2^r W0]; for symbolic nets the exact secular coefficient decides and
/// the numeric trend is reported alongside.
inline BohlBohrReport bohl_bohr_check(const GeneralizedFunction& u, double x0, const BohlBohrOptions& opt = {}) {
  if (!(opt.base_window > 0.0) || opt.levels < 2) throw InvalidInput("bohl-bohr: need W0 > 0 and at least 2 windows");
  const auto prim = gf_primitive(u, x0);
  BohlBohrReport r;
  for (int k = 0; k < opt.levels; ++k) r.windows.push_back(std::ldexp(opt.base_window, k));
  const double wmax = r.windows.back();
  bool any_growing = false, any_inconclusive = false;
  for (std::size_t i = 0; i < u.grid().size(); ++i) {
    SliceTrend t;
    const double freq = std::max(u.frequency_scale(i), 1e-3);
    const double mesh = std::max(two_pi / (kPointsPerPeriod * freq), wmax / static_cast<double>(opt.max_points));
    const auto n = static_cast<std::size_t>(std::ceil(wmax / mesh));
    std::size_t next = 0;
    double best = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
      const double x = std::min(wmax, static_cast<double>(j) * mesh);
      while (next < r.windows.size() && x > r.windows[next]) {
        t.sups.push_back(best);
        ++next;
      }
      best = std::max(best, std::abs(prim.function.evaluate(i, x)));
      t.amplitude = std::max(t.amplitude, std::abs(u.evaluate(i, x)));
    }
    while (t.sups.size() < r.windows.size()) t.sups.push_back(best);
    detail::trend_fit(r.windows, t);
    t.normalized_slope = t.amplitude > 0.0 ? t.slope / t.amplitude : 0.0;
    if (t.amplitude == 0.0 || t.normalized_slope < opt.bounded_threshold)
      t.verdict = Boundedness::bounded;
    else if (t.normalized_slope > opt.grow_threshold && t.slope - 2.0 * t.slope_stderr > 0.0)
      t.verdict = Boundedness::growing;
    else
      t.verdict = Boundedness::inconclusive;
    if (prim.symbolic) {
      const bool secular = prim.linear[i] != complex{};
      const Boundedness exact = secular ? Boundedness::growing : Boundedness::bounded;
      if (exact != t.verdict)
        r.caveats.push_back("eps=" + std::to_string(u.grid()[i]) + ": numeric trend says " + to_string(t.verdict) +
                            ", exact secular coefficient says " + to_string(exact));
      t.verdict = exact;
    }
    any_growing = any_growing || t.verdict == Boundedness::growing;
    any_inconclusive = any_inconclusive || t.verdict == Boundedness::inconclusive;
    r.trend_slope = std::max(r.trend_slope, t.slope);
    r.slices.push_back(std::move(t));
  }
  r.verdict = any_growing ? Boundedness::growing : (any_inconclusive ? Boundedness::inconclusive : Boundedness::bounded);
  if (r.verdict == Boundedness::bounded) {
    const ClassifyOptions& co = opt.classify;
    const auto U = prim.function;
    r.primitive_classification = classify(U, co);
    const auto dU = derivative_sups(U, co.k_max);
    const auto du = derivative_sups(u, std::max(co.k_max - 1, 0));
    for (int j = 1; j <= co.k_max; ++j) {
      double worst = 0.0;
      for (std::size_t i = 0; i < u.grid().size(); ++i) {
        const double a = dU.sampled[i][static_cast<std::size_t>(j)];
        const double b = du.sampled[i][static_cast<std::size_t>(j - 1)];
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, b));
      }
      r.seminorm_transfer.push_back(worst);
    }
    r.almost_periodic = r.primitive_classification->moderate();
  } else if (r.verdict == Boundedness::growing) {
    r.caveats.push_back("primitive is unbounded: not almost periodic");
  } else {
    r.caveats.push_back("window trend inconclusive; boundedness not certified");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Composition

/// F(z) = sum_k a_k z^k with coefficient nets a_0..a_d.
struct PolyRepresentative {
  std::vector<GeneralizedScalar> coefficients;

  int degree() const noexcept { return static_cast<int>(coefficients.size()) - 1; }
};

struct ComposeResult {
  GeneralizedFunction net;
  std::vector<std::string> warnings;
};

/// (F(u_eps))_eps by Horner's scheme on nets.
inline ComposeResult compose(const PolyRepresentative& F, const GeneralizedFunction& u,
                             const ClassifyOptions& opt = {}) {
  if (F.coefficients.empty()) throw InvalidInput("compose: polynomial needs at least one coefficient");
  ComposeResult r{GeneralizedFunction::zero(u.grid()), {}};
  for (std::size_t k = 0; k < F.coefficients.size(); ++k)
    if (!classify(F.coefficients[k], opt).moderate())
      r.warnings.push_back("coefficient a_" + std::to_string(k) + " is not moderate; the composition need not be");
  auto constant_net = [](const GeneralizedScalar& a) {
    std::vector<TrigPoly> s;
    for (const auto& v : a.values()) s.push_back(TrigPoly::constant(v));
    return GeneralizedFunction::symbolic(a.grid(), std::move(s));
  };
  GeneralizedFunction acc = constant_net(F.coefficients.back());
  for (std::size_t k = F.coefficients.size() - 1; k-- > 0;)
    acc = gf_add(gf_mul(acc, u), constant_net(F.coefficients[k]));
  r.net = acc.restricted(EpsGrid::intersect(acc.grid(), u.grid())).with_sup_config(u.sup_config());
  return r;
}

// ---------------------------------------------------------------------------
// Almost periods

struct AlmostPeriodOptions {
  double delta = 0.1;
  double search_window = 100.0;
  double probe_window = 10.0;
  double step = 0.0;       // 0: probe_window / 1e4
  double frequency = 1.0;  // sampling density for general slices
};

struct AlmostPeriodReport {
  double step = 0.0;
  std::size_t count = 0;                           // number of scan points tau that qualify
  std::vector<std::pair<double, double>> runs;     // maximal runs of consecutive qualifying tau
  std::vector<double> representatives;             // best tau in each run
  double max_gap = 0.0;                            // largest distance between consecutive qualifying tau
  double max_representative_gap = 0.0;
  bool found = false;
  bool certified = false;  // qualifying tau satisfy the bound on all of R, not just the probe window
  std::string note;
};

namespace detail {

template <class D>
AlmostPeriodReport scan_periods(D&& defect, std::size_t n, double step, double delta) {
  AlmostPeriodReport r;
  r.step = step;
  double last = -1.0, run_best = 0.0, run_best_tau = 0.0;
  bool in_run = false;
  for (std::size_t k = 0; k <= n; ++k) {
    const double tau = static_cast<double>(k) * step;
    const double d = defect(k, tau);
    if (d < delta) {
      ++r.count;
      if (last >= 0.0) r.max_gap = std::max(r.max_gap, tau - last);
      last = tau;
      if (!in_run) {
        r.runs.push_back({tau, tau});
        run_best = d;
        run_best_tau = tau;
        in_run = true;
      } else {
        r.runs.back().second = tau;
        if (d < run_best) {
          run_best = d;
          run_best_tau = tau;
        }
      }
    } else if (in_run) {
      r.representatives.push_back(run_best_tau);
      in_run = false;
    }
  }
  if (in_run) r.representatives.push_back(run_best_tau);
  for (std::size_t i = 1; i < r.representatives.size(); ++i)
    r.max_representative_gap = std::max(r.max_representative_gap, r.representatives[i] - r.representatives[i - 1]);
  r.found = r.count > 0;
  if (!r.found)
    r.note = "no delta-almost-period found in the search window: evidence against delta-almost-periodicity at this scale, not a disproof";
  return r;
}

inline void check_period_options(const AlmostPeriodOptions& o) {
  if (!(o.delta > 0.0) || !(o.search_window > 0.0) || !(o.probe_window > 0.0) || !(o.step >= 0.0))
    throw InvalidInput("almost-period test: delta and windows must be positive");
}

}  // namespace detail

/// Trigonometric polynomials: tau qualifies when sum |c| |e^{i lambda tau} - 1| < delta,
/// which bounds sup_x |f(x + tau) - f(x)| over the whole line.
inline AlmostPeriodReport almost_period_test(const TrigPoly& f, const AlmostPeriodOptions& o) {
  detail::check_period_options(o);
  const double step = o.step > 0.0 ? o.step : o.probe_window / 1e4;
  const auto n = static_cast<std::size_t>(std::floor(o.search_window / step));
  auto r = detail::scan_periods(
      [&](std::size_t, double tau) {
        double s = 0.0;
        for (const auto& t : f.terms()) s += 2.0 * std::abs(t.coefficient) * std::abs(std::sin(0.5 * t.frequency * tau));
        return s;
      },
      n, step, o.delta);
  r.certified = true;
  return r;
}

/// General slices: sup over the probe window [-P, P] of |f(x + tau) - f(x)|,
/// on a shared sample grid so each tau costs one pass over the probe points.
inline AlmostPeriodReport almost_period_test(const SliceFunction& f, const AlmostPeriodOptions& o) {
  detail::check_period_options(o);
  const double step = o.step > 0.0 ? o.step : o.probe_window / 1e4;
  const auto n = static_cast<std::size_t>(std::floor(o.search_window / step));
  const auto probe_n = static_cast<std::size_t>(std::ceil(2.0 * o.probe_window / step));
  const double mesh = two_pi / (kPointsPerPeriod * std::max(o.frequency, 1e-3));
  const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(mesh / step));
  std::vector<complex> v(probe_n + n + 1);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(-o.probe_window + static_cast<double>(j) * step);
  return detail::scan_periods(
      [&](std::size_t k, double) {
        double worst = 0.0;
        for (std::size_t j = 0; j <= probe_n; j += stride) {
          worst = std::max(worst, std::abs(v[j + k] - v[j]));
          if (worst >= o.delta) break;
        }
        return worst;
      },
      n, step, o.delta);
}

}  // namespace apgf
