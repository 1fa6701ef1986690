/// \file epsnet.hpp
/// Generalized functions as eps-nets of smooth almost periodic functions.
///
/// A net (u_eps) is moderate when every seminorm |u_eps|_{k,inf} grows at
/// most like eps^{-m}, and negligible when every seminorm decays faster than
/// every power eps^m. Both quantifiers range over infinitely many k, m and a
/// continuum of eps; here they are decided on a finite geometric grid for
/// k <= k_max and a finite m_max, so every verdict is a consistency
/// certificate at that level, not a proof.

#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apgf/error.hpp"
#include "apgf/sampling.hpp"
#include "apgf/trigpoly.hpp"

namespace apgf {

/// Strictly decreasing values in (0, 1].
class EpsGrid {
 public:
  EpsGrid() = default;
  explicit EpsGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InvalidInput("eps grid: empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double e = values_[i];
      if (!(e > 0.0) || !(e <= 1.0)) throw InvalidInput("eps grid: values must lie in (0, 1]");
      if (i > 0 && !(e < values_[i - 1])) throw InvalidInput("eps grid: values must be strictly decreasing");
    }
  }

  /// 2^{-first}, 2^{-first-1}, ..., 2^{-last}
  static EpsGrid geometric(int first, int last) {
    if (first < 0 || last < first) throw InvalidInput("eps grid: need 0 <= first <= last");
    std::vector<double> v;
    for (int p = first; p <= last; ++p) v.push_back(std::ldexp(1.0, -p));
    return EpsGrid(std::move(v));
  }

  static EpsGrid default_grid() { return geometric(3, 14); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  std::optional<std::size_t> index_of(double eps) const {
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (values_[i] == eps) return i;
    return std::nullopt;
  }

  static EpsGrid intersect(const EpsGrid& a, const EpsGrid& b) {
    std::vector<double> v;
    for (double e : a.values_)
      if (b.index_of(e)) v.push_back(e);
    if (v.empty()) throw InvalidInput("eps grids do not intersect");
    return EpsGrid(std::move(v));
  }

  friend bool operator==(const EpsGrid&, const EpsGrid&) = default;

 private:
  std::vector<double> values_;
};

/// A net of complex numbers over an eps grid: an element of E_M[C] or N[C]
/// once classified.
class GeneralizedScalar {
 public:
  GeneralizedScalar() = default;
  GeneralizedScalar(EpsGrid grid, std::vector<complex> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw InvalidInput("generalized scalar: grid/value size mismatch");
    for (const auto& v : values_)
      if (!is_finite(v)) throw InvalidInput("generalized scalar: non-finite value");
  }

  template <class F>
  static GeneralizedScalar from(const EpsGrid& grid, F&& f) {
    std::vector<complex> v;
    v.reserve(grid.size());
    for (double e : grid) v.emplace_back(f(e));
    return GeneralizedScalar(grid, std::move(v));
  }

  static GeneralizedScalar constant(const EpsGrid& grid, complex c) {
    return GeneralizedScalar(grid, std::vector<complex>(grid.size(), c));
  }

  const EpsGrid& grid() const noexcept { return grid_; }
  const std::vector<complex>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  complex operator[](std::size_t i) const { return values_[i]; }

  std::vector<double> abs_values() const {
    std::vector<double> a;
    a.reserve(values_.size());
    for (const auto& v : values_) a.push_back(std::abs(v));
    return a;
  }

  bool is_real() const {
    return std::all_of(values_.begin(), values_.end(), [](complex v) { return v.imag() == 0.0; });
  }

  GeneralizedScalar restricted(const EpsGrid& g) const {
    std::vector<complex> v;
    for (double e : g) {
      auto i = grid_.index_of(e);
      if (!i) throw InvalidInput("generalized scalar: eps not on grid");
      v.push_back(values_[*i]);
    }
    return GeneralizedScalar(g, std::move(v));
  }

  friend bool operator==(const GeneralizedScalar&, const GeneralizedScalar&) = default;

 private:
  EpsGrid grid_;
  std::vector<complex> values_;
};

namespace detail {
template <class Op>
GeneralizedScalar zip(const GeneralizedScalar& a, const GeneralizedScalar& b, Op op) {
  const EpsGrid g = EpsGrid::intersect(a.grid(), b.grid());
  const auto ra = a.restricted(g);
  const auto rb = b.restricted(g);
  std::vector<complex> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = op(ra[i], rb[i]);
  return GeneralizedScalar(g, std::move(v));
}
}  // namespace detail

inline GeneralizedScalar operator+(const GeneralizedScalar& a, const GeneralizedScalar& b) {
  return detail::zip(a, b, std::plus<>{});
}
inline GeneralizedScalar operator-(const GeneralizedScalar& a, const GeneralizedScalar& b) {
  return detail::zip(a, b, std::minus<>{});
}
inline GeneralizedScalar operator*(const GeneralizedScalar& a, const GeneralizedScalar& b) {
  return detail::zip(a, b, std::multiplies<>{});
}
inline GeneralizedScalar operator*(complex s, const GeneralizedScalar& a) {
  std::vector<complex> v(a.values());
  for (auto& x : v) x *= s;
  return GeneralizedScalar(a.grid(), std::move(v));
}

// ---------------------------------------------------------------------------
// Asymptotic fits

struct AsymptoticFit {
  double slope = 0.0;  // p in value ~ C eps^p
  double intercept = 0.0;
  double max_residual = 0.0;
  double slope_stderr = 0.0;
  std::vector<double> grid_used;
  std::vector<double> excluded;  // eps values dropped as zero or non-finite
  bool exactly_zero = false;
};

inline constexpr double kZeroFloor = 1e-300;

namespace detail {

inline AsymptoticFit least_squares_loglog(const std::vector<double>& eps, const std::vector<double>& val) {
  AsymptoticFit f;
  const auto n = static_cast<double>(eps.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    mx += std::log(eps[i]);
    my += std::log(val[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double dx = std::log(eps[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(val[i]) - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double r = std::log(val[i]) - (f.intercept + f.slope * std::log(eps[i]));
    f.max_residual = std::max(f.max_residual, std::abs(r));
    ss += r * r;
  }
  f.slope_stderr = eps.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
  f.grid_used = eps;
  return f;
}

}  // namespace detail

/// Least-squares slope of log(value) against log(eps). Zero (below 1e-300)
/// and non-finite values are excluded and recorded; an identically zero net
/// short-circuits to `exactly_zero`.
inline AsymptoticFit fit_order(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size()) throw InvalidInput("fit_order: size mismatch");
  std::vector<double> e, v, excluded;
  bool all_zero = true;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double a = std::abs(values[i]);
    if (std::isfinite(a) && a > kZeroFloor) {
      e.push_back(eps[i]);
      v.push_back(a);
      all_zero = false;
    } else {
      if (!std::isfinite(a)) all_zero = false;
      excluded.push_back(eps[i]);
    }
  }
  if (all_zero && !eps.empty()) {
    AsymptoticFit f;
    f.exactly_zero = true;
    f.slope = std::numeric_limits<double>::infinity();
    f.excluded = std::move(excluded);
    return f;
  }
  if (e.size() < 4) throw InsufficientData("fit_order: fewer than 4 usable grid points");
  AsymptoticFit f = detail::least_squares_loglog(e, v);
  f.excluded = std::move(excluded);
  return f;
}

// ---------------------------------------------------------------------------
// Generalized functions

/// (eps, x, derivative order) -> value.
using SliceEvaluator = std::function<complex(double, double, int)>;
/// eps -> characteristic angular frequency of the slice, for sampling.
using FrequencyHint = std::function<double(double)>;

inline constexpr int kUnboundedOrder = INT_MAX;

class GeneralizedFunction {
 public:
  /// Symbolic net from explicit slices aligned with the grid.
  static GeneralizedFunction symbolic(EpsGrid grid, std::vector<TrigPoly> slices) {
    if (slices.size() != grid.size()) throw InvalidInput("generalized function: slice count != grid size");
    GeneralizedFunction u;
    u.grid_ = std::move(grid);
    u.slices_ = std::make_shared<const std::vector<TrigPoly>>(std::move(slices));
    return u;
  }

  /// Symbolic net from an eps-parameterized trigonometric polynomial.
  template <class F>
    requires std::is_invocable_r_v<TrigPoly, F, double>
  static GeneralizedFunction symbolic(EpsGrid grid, F&& slice_at) {
    std::vector<TrigPoly> s;
    s.reserve(grid.size());
    for (double e : grid) s.push_back(slice_at(e));
    return symbolic(std::move(grid), std::move(s));
  }

  /// Constant net (f)_eps.
  static GeneralizedFunction constant(const TrigPoly& f, EpsGrid grid = EpsGrid::default_grid()) {
    std::vector<TrigPoly> s(grid.size(), f);
    return symbolic(std::move(grid), std::move(s));
  }

  static GeneralizedFunction zero(EpsGrid grid = EpsGrid::default_grid()) {
    return constant(TrigPoly{}, std::move(grid));
  }

  /// Callable net. `max_order` is the highest derivative the evaluator supports.
  static GeneralizedFunction callable(EpsGrid grid, SliceEvaluator eval, int max_order,
                                      FrequencyHint frequency = {}) {
    if (max_order < 0) throw InvalidInput("generalized function: negative declared order");
    if (!eval) throw InvalidInput("generalized function: empty evaluator");
    GeneralizedFunction u;
    u.grid_ = std::move(grid);
    u.eval_ = std::move(eval);
    u.max_order_ = max_order;
    u.frequency_ = frequency ? std::move(frequency) : FrequencyHint([](double) { return 1.0; });
    return u;
  }

  bool is_symbolic() const noexcept { return slices_ != nullptr; }
  const EpsGrid& grid() const noexcept { return grid_; }
  int max_order() const noexcept { return is_symbolic() ? kUnboundedOrder : max_order_; }

  const std::vector<TrigPoly>& slices() const {
    if (!slices_) throw InvalidInput("generalized function: callable net has no symbolic slices");
    return *slices_;
  }
  const TrigPoly& slice(std::size_t i) const { return slices().at(i); }

  /// u_eps^(k)(x) for eps = grid[i].
  complex evaluate(std::size_t i, double x, int k = 0) const {
    check_order(k);
    if (slices_) return k == 0 ? (*slices_)[i].evaluate(x) : derivative((*slices_)[i], k).evaluate(x);
    return eval_(grid_[i], x, k);
  }

  /// u_eps^(k)(x) for any eps on the grid.
  complex evaluate_at(double eps, double x, int k = 0) const {
    auto i = grid_.index_of(eps);
    if (!i) throw InvalidInput("generalized function: eps not on grid");
    return evaluate(*i, x, k);
  }

  /// Evaluator form, usable for any representation.
  SliceEvaluator evaluator() const {
    if (!slices_) return eval_;
    auto s = slices_;
    auto g = grid_;
    return [s, g](double eps, double x, int k) -> complex {
      auto i = g.index_of(eps);
      if (!i) throw InvalidInput("generalized function: eps not on grid");
      const auto& p = (*s)[*i];
      return k == 0 ? p.evaluate(x) : derivative(p, k).evaluate(x);
    };
  }

  double frequency_scale(std::size_t i) const {
    if (slices_) return (*slices_)[i].max_abs_frequency();
    return std::abs(frequency_(grid_[i]));
  }

  FrequencyHint frequency_hint() const {
    if (!slices_) return frequency_;
    auto s = slices_;
    auto g = grid_;
    return [s, g](double eps) {
      auto i = g.index_of(eps);
      return i ? (*s)[*i].max_abs_frequency() : 1.0;
    };
  }

  const SupConfig& sup_config() const noexcept { return sup_; }
  GeneralizedFunction with_sup_config(SupConfig cfg) const {
    GeneralizedFunction u = *this;
    u.sup_ = cfg;
    return u;
  }

  GeneralizedFunction restricted(const EpsGrid& g) const {
    if (g == grid_) return *this;
    GeneralizedFunction u = *this;
    u.grid_ = g;
    if (slices_) {
      std::vector<TrigPoly> s;
      for (double e : g) {
        auto i = grid_.index_of(e);
        if (!i) throw InvalidInput("generalized function: eps not on grid");
        s.push_back((*slices_)[*i]);
      }
      u.slices_ = std::make_shared<const std::vector<TrigPoly>>(std::move(s));
    }
    return u;
  }

  void check_order(int k) const {
    if (k < 0) throw InvalidInput("derivative order must be nonnegative");
    if (k > max_order())
      throw UnsupportedOrder("derivative order " + std::to_string(k) + " exceeds declared order " +
                             std::to_string(max_order()));
  }

 private:
  GeneralizedFunction() = default;

  EpsGrid grid_;
  std::shared_ptr<const std::vector<TrigPoly>> slices_;
  SliceEvaluator eval_;
  FrequencyHint frequency_;
  int max_order_ = 0;
  SupConfig sup_;
};

// ---------------------------------------------------------------------------
// Seminorms

/// sup_x |u_eps^(j)| per slice for j = 0..k_max.
struct DerivativeSups {
  EpsGrid grid;
  std::vector<std::vector<double>> sampled;  // [slice][j]
  std::vector<std::vector<double>> bound;    // symbolic only: |lambda|^j |c| sums
  std::vector<SampleSpec> specs;
};

inline DerivativeSups derivative_sups(const GeneralizedFunction& u, int k_max) {
  u.check_order(k_max);
  DerivativeSups d;
  d.grid = u.grid();
  const SupConfig& cfg = u.sup_config();
  for (std::size_t i = 0; i < u.grid().size(); ++i) {
    std::vector<double> s(static_cast<std::size_t>(k_max) + 1, 0.0);
    SampleSpec spec;
    if (u.is_symbolic()) {
      const TrigPoly& p = u.slice(i);
      std::vector<double> b(s.size(), 0.0);
      if (!p.is_zero()) {
        spec = resolve_window(cfg, p.min_frequency_gap(), p.max_abs_frequency());
        for (int j = 0; j <= k_max; ++j) {
          const TrigPoly dj = derivative(p, j);
          const auto ju = static_cast<std::size_t>(j);
          b[ju] = seminorm_bound(dj, 0);
          if (!dj.is_zero())
            s[ju] = std::min(b[ju], sampled_sup(dj, spec.lo, spec.hi, spec.mesh, cfg.refine));
        }
      }
      d.bound.push_back(std::move(b));
    } else {
      const double f = u.frequency_scale(i);
      spec = resolve_window(cfg, std::max(f, 1e-3), std::max(f, 1e-3));
      for (int j = 0; j <= k_max; ++j)
        s[static_cast<std::size_t>(j)] = sampled_sup([&](double x) { return u.evaluate(i, x, j); }, spec.lo,
                                                     spec.hi, spec.mesh, cfg.refine);
    }
    d.sampled.push_back(std::move(s));
    d.specs.push_back(spec);
  }
  return d;
}

struct SeminormNet {
  EpsGrid grid;
  int k = 0;
  std::vector<double> values;  // sampled |u_eps|_{k,inf}
  std::vector<double> bounds;  // symbolic nets: sum_{j<=k} sum_n |lambda|^j |c|
  std::vector<SampleSpec> specs;
};

namespace detail {
inline SeminormNet accumulate(const DerivativeSups& d, int k) {
  SeminormNet n;
  n.grid = d.grid;
  n.k = k;
  n.specs = d.specs;
  for (std::size_t i = 0; i < d.sampled.size(); ++i) {
    double s = 0.0, b = 0.0;
    for (int j = 0; j <= k; ++j) {
      s += d.sampled[i][static_cast<std::size_t>(j)];
      if (!d.bound.empty()) b += d.bound[i][static_cast<std::size_t>(j)];
    }
    n.values.push_back(s);
    if (!d.bound.empty()) n.bounds.push_back(b);
  }
  return n;
}
}  // namespace detail

/// |u_eps|_{k,inf} = sum_{j<=k} sup |u_eps^(j)| per eps.
inline SeminormNet seminorm_net(const GeneralizedFunction& u, int k) {
  return detail::accumulate(derivative_sups(u, k), k);
}

// ---------------------------------------------------------------------------
// Classification

enum class Verdict { negligible, moderate, neither, unknown };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::negligible: return "negligible";
    case Verdict::moderate: return "moderate";
    case Verdict::neither: return "neither";
    default: return "unknown";
  }
}

struct ClassifyOptions {
  int k_max = 2;
  int m_max = 8;
  /// A net whose fitted growth exceeds eps^{-cap} is not certified moderate.
  double moderate_order_cap = 50.0;
  double slope_tolerance = 1e-6;
};

struct OrderReport {
  int k = 0;
  std::vector<double> values;
  std::optional<AsymptoticFit> fit;
  std::optional<AsymptoticFit> tail_fit;  // smallest-eps half of the usable points
  bool all_finite = true;
  bool exactly_zero = false;
  bool eventually_zero = false;  // zero on (at least) the two smallest eps
  Verdict verdict = Verdict::unknown;
  std::string note;
};

/// Classify one positive net of seminorm values over the grid.
inline OrderReport classify_values(const EpsGrid& grid, std::vector<double> values, int k,
                                   const ClassifyOptions& opt) {
  OrderReport r;
  r.k = k;
  r.values = std::move(values);
  const auto& v = r.values;
  r.all_finite = std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
  if (!r.all_finite) {
    r.verdict = Verdict::neither;
    r.note = "non-finite seminorm on the grid (growth beyond double range)";
    return r;
  }
  auto is_zero = [](double a) { return std::abs(a) <= kZeroFloor; };
  r.exactly_zero = std::all_of(v.begin(), v.end(), is_zero);
  std::size_t trailing = 0;
  for (std::size_t i = v.size(); i-- > 0 && is_zero(v[i]);) ++trailing;
  r.eventually_zero = !r.exactly_zero && trailing >= 2;
  if (r.exactly_zero || r.eventually_zero) {
    r.verdict = Verdict::negligible;
    r.note = r.exactly_zero ? "exactly zero" : "exactly zero for the smallest eps";
    if (r.eventually_zero) {
      try {
        r.fit = fit_order(grid.values(), v);
      } catch (const InsufficientData&) {
      }
    }
    return r;
  }
  try {
    r.fit = fit_order(grid.values(), v);
  } catch (const InsufficientData&) {
    r.verdict = Verdict::unknown;
    r.note = "fewer than 4 nonzero grid points";
    return r;
  }
  const auto& used = r.fit->grid_used;
  const std::size_t tail_n = std::max<std::size_t>(4, used.size() / 2);
  {
    std::vector<double> te, tv;
    for (std::size_t i = used.size() - tail_n; i < used.size(); ++i) {
      te.push_back(used[i]);
      tv.push_back(v[*grid.index_of(used[i])]);
    }
    r.tail_fit = detail::least_squares_loglog(te, tv);
  }
  const double slope = std::min(r.fit->slope, r.tail_fit->slope);
  if (slope >= opt.m_max - opt.slope_tolerance) {
    r.verdict = Verdict::negligible;
  } else if (slope >= -opt.moderate_order_cap) {
    r.verdict = Verdict::moderate;
  } else {
    r.verdict = Verdict::neither;
    r.note = "growth faster than eps^-" + std::to_string(static_cast<int>(opt.moderate_order_cap));
  }
  return r;
}

struct Classification {
  Verdict verdict = Verdict::unknown;
  std::vector<OrderReport> orders;
  std::optional<int> witness_k;
  int k_max = 0;
  int m_max = 0;
  EpsGrid grid;
  std::vector<std::string> caveats;

  bool moderate() const noexcept { return verdict == Verdict::moderate || verdict == Verdict::negligible; }
  bool negligible() const noexcept { return verdict == Verdict::negligible; }
  std::vector<double> slopes() const {
    std::vector<double> s;
    for (const auto& o : orders) s.push_back(o.fit ? o.fit->slope : std::numeric_limits<double>::infinity());
    return s;
  }
};

namespace detail {
inline void summarize(Classification& c) {
  bool any_unknown = false, all_negligible = true;
  for (const auto& o : c.orders) {
    if (o.verdict == Verdict::neither && !c.witness_k) c.witness_k = o.k;
    if (o.verdict == Verdict::unknown) any_unknown = true;
    if (o.verdict != Verdict::negligible) all_negligible = false;
  }
  if (c.witness_k)
    c.verdict = Verdict::neither;
  else if (any_unknown)
    c.verdict = Verdict::unknown;
  else
    c.verdict = all_negligible ? Verdict::negligible : Verdict::moderate;
  c.caveats.push_back("verdict certified only for k <= " + std::to_string(c.k_max) + ", m_max = " +
                      std::to_string(c.m_max) + " on a " + std::to_string(c.grid.size()) + "-point eps grid");
  for (const auto& o : c.orders)
    if (o.fit && o.fit->max_residual > 0.5)
      c.caveats.push_back("k=" + std::to_string(o.k) + ": log-log fit residual " + std::to_string(o.fit->max_residual) +
                          " (not a clean power law)");
}
}  // namespace detail

inline Classification classify(const GeneralizedFunction& u, const ClassifyOptions& opt = {}) {
  Classification c;
  c.k_max = opt.k_max;
  c.m_max = opt.m_max;
  c.grid = u.grid();
  const DerivativeSups d = derivative_sups(u, opt.k_max);
  for (int k = 0; k <= opt.k_max; ++k)
    c.orders.push_back(classify_values(u.grid(), detail::accumulate(d, k).values, k, opt));
  detail::summarize(c);
  if (!u.is_symbolic())
    c.caveats.push_back("callable net: seminorms are sampled sups, so moderateness can be certified but not refuted");
  return c;
}

inline Classification classify(const GeneralizedScalar& s, const ClassifyOptions& opt = {}) {
  Classification c;
  c.k_max = 0;
  c.m_max = opt.m_max;
  c.grid = s.grid();
  c.orders.push_back(classify_values(s.grid(), s.abs_values(), 0, opt));
  detail::summarize(c);
  return c;
}

// ---------------------------------------------------------------------------
// Algebra

namespace detail {

template <class SymOp, class CallOp>
GeneralizedFunction binary(const GeneralizedFunction& u, const GeneralizedFunction& v, SymOp sym, CallOp call,
                           bool frequencies_add) {
  const EpsGrid g = EpsGrid::intersect(u.grid(), v.grid());
  const auto ur = u.restricted(g);
  const auto vr = v.restricted(g);
  if (ur.is_symbolic() && vr.is_symbolic()) {
    std::vector<TrigPoly> s;
    s.reserve(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) s.push_back(sym(ur.slice(i), vr.slice(i)));
    return GeneralizedFunction::symbolic(g, std::move(s)).with_sup_config(u.sup_config());
  }
  auto eu = ur.evaluator();
  auto ev = vr.evaluator();
  auto fu = ur.frequency_hint();
  auto fv = vr.frequency_hint();
  FrequencyHint f = frequencies_add ? FrequencyHint([fu, fv](double e) { return std::abs(fu(e)) + std::abs(fv(e)); })
                                    : FrequencyHint([fu, fv](double e) { return std::max(std::abs(fu(e)), std::abs(fv(e))); });
  return GeneralizedFunction::callable(
             g, [eu, ev, call](double e, double x, int k) { return call(eu, ev, e, x, k); },
             std::min(ur.max_order(), vr.max_order()), std::move(f))
      .with_sup_config(u.sup_config());
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

}  // namespace detail

inline GeneralizedFunction gf_add(const GeneralizedFunction& u, const GeneralizedFunction& v) {
  return detail::binary(
      u, v, [](const TrigPoly& a, const TrigPoly& b) { return add(a, b); },
      [](const SliceEvaluator& a, const SliceEvaluator& b, double e, double x, int k) { return a(e, x, k) + b(e, x, k); },
      false);
}

inline GeneralizedFunction gf_sub(const GeneralizedFunction& u, const GeneralizedFunction& v) {
  return detail::binary(
      u, v, [](const TrigPoly& a, const TrigPoly& b) { return subtract(a, b); },
      [](const SliceEvaluator& a, const SliceEvaluator& b, double e, double x, int k) { return a(e, x, k) - b(e, x, k); },
      false);
}

/// Slicewise product; callable operands differentiate by Leibniz.
inline GeneralizedFunction gf_mul(const GeneralizedFunction& u, const GeneralizedFunction& v) {
  return detail::binary(
      u, v, [](const TrigPoly& a, const TrigPoly& b) { return mul(a, b); },
      [](const SliceEvaluator& a, const SliceEvaluator& b, double e, double x, int k) {
        complex s{};
        for (int j = 0; j <= k; ++j) s += detail::binomial(k, j) * a(e, x, j) * b(e, x, k - j);
        return s;
      },
      true);
}

enum class GfOp { add, mul };

inline GeneralizedFunction gf_algebra(GfOp op, const GeneralizedFunction& u, const GeneralizedFunction& v) {
  return op == GfOp::add ? gf_add(u, v) : gf_mul(u, v);
}

/// Multiply slice eps by the scalar net value at eps.
inline GeneralizedFunction gf_scale(const GeneralizedFunction& u, const GeneralizedScalar& s) {
  const EpsGrid g = EpsGrid::intersect(u.grid(), s.grid());
  const auto ur = u.restricted(g);
  const auto sr = s.restricted(g);
  if (ur.is_symbolic()) {
    std::vector<TrigPoly> out;
    for (std::size_t i = 0; i < g.size(); ++i) out.push_back(scale(ur.slice(i), sr[i]));
    return GeneralizedFunction::symbolic(g, std::move(out)).with_sup_config(u.sup_config());
  }
  auto eu = ur.evaluator();
  return GeneralizedFunction::callable(
             g,
             [eu, sr, g](double e, double x, int k) {
               auto i = g.index_of(e);
               if (!i) throw InvalidInput("generalized function: eps not on grid");
               return sr[*i] * eu(e, x, k);
             },
             ur.max_order(), ur.frequency_hint())
      .with_sup_config(u.sup_config());
}

inline GeneralizedFunction gf_scale(const GeneralizedFunction& u, complex c) {
  return gf_scale(u, GeneralizedScalar::constant(u.grid(), c));
}

inline GeneralizedFunction gf_negate(const GeneralizedFunction& u) { return gf_scale(u, complex{-1.0, 0.0}); }

inline GeneralizedFunction gf_derivative(const GeneralizedFunction& u, int j) {
  if (j < 0) throw InvalidInput("gf_derivative: negative order");
  if (u.is_symbolic()) {
    std::vector<TrigPoly> s;
    for (const auto& p : u.slices()) s.push_back(derivative(p, j));
    return GeneralizedFunction::symbolic(u.grid(), std::move(s)).with_sup_config(u.sup_config());
  }
  u.check_order(j);
  auto eu = u.evaluator();
  return GeneralizedFunction::callable(
             u.grid(), [eu, j](double e, double x, int k) { return eu(e, x, k + j); }, u.max_order() - j,
             u.frequency_hint())
      .with_sup_config(u.sup_config());
}

/// (tau_{-h} u)_eps(x) = u_eps(x + h)
inline GeneralizedFunction gf_translate(const GeneralizedFunction& u, double h) {
  if (!std::isfinite(h)) throw InvalidInput("gf_translate: non-finite shift");
  if (u.is_symbolic()) {
    std::vector<TrigPoly> s;
    for (const auto& p : u.slices()) s.push_back(translate(p, h));
    return GeneralizedFunction::symbolic(u.grid(), std::move(s)).with_sup_config(u.sup_config());
  }
  auto eu = u.evaluator();
  return GeneralizedFunction::callable(
             u.grid(), [eu, h](double e, double x, int k) { return eu(e, x + h, k); }, u.max_order(),
             u.frequency_hint())
      .with_sup_config(u.sup_config());
}

struct EqualityReport {
  bool equal = false;
  Classification difference;
};

/// Equality in G_ap = M_ap / N_ap: the difference is negligible at (k_max, m_max).
inline EqualityReport gf_equal(const GeneralizedFunction& u, const GeneralizedFunction& v,
                               const ClassifyOptions& opt = {}) {
  EqualityReport r;
  r.difference = classify(gf_sub(u, v), opt);
  r.equal = r.difference.negligible();
  return r;
}

}  // namespace apgf
