/// \file trigpoly.hpp
/// Exact algebra of complex trigonometric polynomials
///
///     P(x) = sum_n c_n exp(i lambda_n x),   lambda_n real, c_n complex.
///
/// A TrigPoly is always normalized: frequencies strictly increasing, no zero
/// coefficients. Frequencies merge only on exact bit equality, so two terms at
/// nearby but distinct frequencies stay distinct.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "apgf/error.hpp"

namespace apgf {

using complex = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct Term {
  double frequency = 0.0;
  complex coefficient{};

  friend bool operator==(const Term&, const Term&) = default;
};

inline bool is_finite(complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// (i * lambda)^j computed without going through std::pow on complex values.
inline complex i_lambda_pow(double lambda, int j) {
  complex r{1.0, 0.0};
  const complex il{0.0, lambda};
  for (int n = 0; n < j; ++n) r *= il;
  return r;
}

class TrigPoly {
 public:
  TrigPoly() = default;

  /// Merges duplicate frequencies, drops zero coefficients, sorts ascending.
  static TrigPoly normalize(std::vector<Term> terms) {
    for (const auto& t : terms) {
      if (!std::isfinite(t.frequency) || !is_finite(t.coefficient))
        throw InvalidInput("TrigPoly: non-finite frequency or coefficient");
    }
    std::stable_sort(terms.begin(), terms.end(),
                     [](const Term& a, const Term& b) { return a.frequency < b.frequency; });
    std::vector<Term> merged;
    merged.reserve(terms.size());
    for (const auto& t : terms) {
      if (!merged.empty() && merged.back().frequency == t.frequency)
        merged.back().coefficient += t.coefficient;
      else
        merged.push_back(t);
    }
    std::erase_if(merged, [](const Term& t) { return t.coefficient == complex{}; });
    // -0.0 and +0.0 compare equal above; store the canonical +0.0.
    for (auto& t : merged)
      if (t.frequency == 0.0) t.frequency = 0.0;
    TrigPoly p;
    p.terms_ = std::move(merged);
    return p;
  }

  static TrigPoly constant(complex c) { return normalize({{0.0, c}}); }
  static TrigPoly exponential(double frequency, complex c = 1.0) {
    return normalize({{frequency, c}});
  }
  /// sin(w x) = (e^{iwx} - e^{-iwx}) / 2i
  static TrigPoly sine(double w, complex amplitude = 1.0) {
    const complex half_over_i = amplitude / complex{0.0, 2.0};
    return normalize({{w, half_over_i}, {-w, -half_over_i}});
  }
  static TrigPoly cosine(double w, complex amplitude = 1.0) {
    return normalize({{w, amplitude / 2.0}, {-w, amplitude / 2.0}});
  }

  std::span<const Term> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  complex operator()(double x) const { return evaluate(x); }

  complex evaluate(double x) const {
    if (!std::isfinite(x)) throw InvalidInput("TrigPoly::evaluate: non-finite x");
    complex s{};
    for (const auto& t : terms_) s += t.coefficient * std::polar(1.0, t.frequency * x);
    return s;
  }

  /// Values of P, P', ..., P^(k_max) at x, sharing one exponential per term.
  std::vector<complex> evaluate_derivatives(double x, int k_max) const {
    std::vector<complex> out(static_cast<std::size_t>(k_max) + 1);
    for (const auto& t : terms_) {
      complex v = t.coefficient * std::polar(1.0, t.frequency * x);
      const complex il{0.0, t.frequency};
      for (int j = 0; j <= k_max; ++j) {
        out[static_cast<std::size_t>(j)] += v;
        v *= il;
      }
    }
    return out;
  }

  double max_abs_frequency() const noexcept {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.frequency));
    return m;
  }

  /// Smallest |lambda| over nonzero frequencies; +inf if there are none.
  double min_nonzero_abs_frequency() const noexcept {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& t : terms_)
      if (t.frequency != 0.0) m = std::min(m, std::abs(t.frequency));
    return m;
  }

  /// Smallest gap between consecutive frequencies; +inf with fewer than two terms.
  double min_frequency_gap() const noexcept {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n < terms_.size(); ++n)
      g = std::min(g, terms_[n].frequency - terms_[n - 1].frequency);
    return g;
  }

  friend bool operator==(const TrigPoly&, const TrigPoly&) = default;

 private:
  std::vector<Term> terms_;
};

inline TrigPoly add(const TrigPoly& p, const TrigPoly& q) {
  std::vector<Term> t(p.terms().begin(), p.terms().end());
  t.insert(t.end(), q.terms().begin(), q.terms().end());
  return TrigPoly::normalize(std::move(t));
}

inline TrigPoly scale(const TrigPoly& p, complex s) {
  std::vector<Term> t(p.terms().begin(), p.terms().end());
  for (auto& term : t) term.coefficient *= s;
  return TrigPoly::normalize(std::move(t));
}

inline TrigPoly negate(const TrigPoly& p) { return scale(p, -1.0); }

inline TrigPoly subtract(const TrigPoly& p, const TrigPoly& q) { return add(p, negate(q)); }

inline TrigPoly mul(const TrigPoly& p, const TrigPoly& q) {
  std::vector<Term> t;
  t.reserve(p.size() * q.size());
  for (const auto& a : p.terms())
    for (const auto& b : q.terms())
      t.push_back({a.frequency + b.frequency, a.coefficient * b.coefficient});
  return TrigPoly::normalize(std::move(t));
}

inline TrigPoly power(const TrigPoly& p, int n) {
  if (n < 0) throw InvalidInput("TrigPoly power: negative exponent");
  TrigPoly r = TrigPoly::constant(1.0);
  TrigPoly base = p;
  while (n > 0) {
    if (n & 1) r = mul(r, base);
    n >>= 1;
    if (n > 0) base = mul(base, base);
  }
  return r;
}

inline TrigPoly derivative(const TrigPoly& p, int j) {
  if (j < 0) throw InvalidInput("derivative: negative order");
  std::vector<Term> t(p.terms().begin(), p.terms().end());
  for (auto& term : t) term.coefficient *= i_lambda_pow(term.frequency, j);
  return TrigPoly::normalize(std::move(t));
}

/// (tau_{-h} P)(x) = P(x + h)
inline TrigPoly translate(const TrigPoly& p, double h) {
  if (!std::isfinite(h)) throw InvalidInput("translate: non-finite shift");
  std::vector<Term> t(p.terms().begin(), p.terms().end());
  for (auto& term : t) term.coefficient *= std::polar(1.0, term.frequency * h);
  return TrigPoly::normalize(std::move(t));
}

inline complex mean_exact(const TrigPoly& p) {
  for (const auto& t : p.terms())
    if (t.frequency == 0.0) return t.coefficient;
  return {};
}

inline complex bohr_coefficient_exact(const TrigPoly& p, double lambda) {
  if (!std::isfinite(lambda)) throw InvalidInput("bohr coefficient: non-finite frequency");
  for (const auto& t : p.terms())
    if (t.frequency == lambda) return t.coefficient;
  return {};
}

inline std::vector<double> spectrum_exact(const TrigPoly& p) {
  std::vector<double> s;
  s.reserve(p.size());
  for (const auto& t : p.terms()) s.push_back(t.frequency);
  return s;
}

/// sum_{j<=k} sum_n |lambda_n|^j |c_n|, an upper bound for |P|_{k,inf}.
inline double seminorm_bound(const TrigPoly& p, int k) {
  if (k < 0) throw InvalidInput("seminorm_bound: negative order");
  double s = 0.0;
  for (const auto& t : p.terms()) {
    const double a = std::abs(t.coefficient);
    const double l = std::abs(t.frequency);
    double lj = 1.0;
    for (int j = 0; j <= k; ++j) {
      s += lj * a;
      lj *= l;
    }
  }
  return s;
}

struct PrimitiveResult {
  TrigPoly oscillatory;
  complex linear_coefficient{};
  complex constant{};
  /// min |lambda| over the integrated terms; conditioning of the 1/(i lambda) division.
  double min_abs_frequency = std::numeric_limits<double>::infinity();

  bool is_almost_periodic() const noexcept { return linear_coefficient == complex{}; }

  complex evaluate(double x) const {
    return oscillatory.evaluate(x) + linear_coefficient * x + constant;
  }

  /// j-th derivative of the reassembled primitive at x.
  complex evaluate_derivative(double x, int j) const {
    if (j == 0) return evaluate(x);
    complex v = derivative(oscillatory, j).evaluate(x);
    if (j == 1) v += linear_coefficient;
    return v;
  }

  /// The bounded part oscillatory + constant as a single TrigPoly.
  TrigPoly periodic_part() const { return add(oscillatory, TrigPoly::constant(constant)); }
};

/// Primitive vanishing at x0: oscillatory terms c/(i lambda) e^{i lambda x},
/// the mean multiplying x, and the constant fixing U(x0) = 0.
inline PrimitiveResult primitive_exact(const TrigPoly& p, double x0) {
  if (!std::isfinite(x0)) throw InvalidInput("primitive: non-finite base point");
  PrimitiveResult r;
  std::vector<Term> osc;
  for (const auto& t : p.terms()) {
    if (t.frequency == 0.0) {
      r.linear_coefficient = t.coefficient;
    } else {
      osc.push_back({t.frequency, t.coefficient / complex{0.0, t.frequency}});
      r.min_abs_frequency = std::min(r.min_abs_frequency, std::abs(t.frequency));
    }
  }
  r.oscillatory = TrigPoly::normalize(std::move(osc));
  r.constant = -(r.oscillatory.evaluate(x0) + r.linear_coefficient * x0);
  return r;
}

}  // namespace apgf
