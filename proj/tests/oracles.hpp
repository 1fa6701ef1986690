// Independent reference computations for the test suites. Nothing here calls
// into the code paths it is used to check.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "apgf/trigpoly.hpp"

namespace oracle {

using cplx = std::complex<double>;

/// sum c e^{i lambda x} with cos/sin written out.
inline cplx direct_sum(const std::vector<std::pair<double, cplx>>& terms, double x) {
  cplx s{};
  for (const auto& [l, c] : terms) s += c * cplx{std::cos(l * x), std::sin(l * x)};
  return s;
}

/// Composite Simpson on [a, b] with n (even) panels.
template <class F>
auto simpson(F&& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  auto s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * (h / 3.0);
}

/// Brute-force max |f| on a uniform grid (no refinement).
template <class F>
double grid_max(F&& f, double a, double b, int n) {
  double m = 0.0;
  for (int i = 0; i <= n; ++i) m = std::max(m, std::abs(f(a + (b - a) * i / n)));
  return m;
}

/// Central difference of g at x.
template <class F>
auto central_diff(F&& g, double x, double h) {
  return (g(x + h) - g(x - h)) / (2.0 * h);
}

/// E[X^k] for X ~ N(0, s^2): (k-1)!! s^k for even k.
inline double gaussian_moment(int k, double s) {
  if (k % 2) return 0.0;
  double r = 1.0;
  for (int n = k - 1; n > 1; n -= 2) r *= n;
  return r * std::pow(s, k);
}

/// Random normalized trigonometric polynomial with `n` terms, frequencies
/// drawn from a lattice of spacing 0.25 (plus an irrational shift) in
/// [-fmax, fmax], coefficients uniform in the unit square.
class TrigPolyGen {
 public:
  explicit TrigPolyGen(std::uint64_t seed) : rng_(seed) {}

  /// `irrational` adds a sqrt(2)/8 shift to ~30% of the frequencies; with it
  /// off all frequencies are dyadic, so frequency sums are exact in binary.
  apgf::TrigPoly operator()(int n, double fmax = 4.0, bool irrational = true) {
    std::uniform_int_distribution<int> lat(-static_cast<int>(fmax * 4), static_cast<int>(fmax * 4));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::bernoulli_distribution irr(0.3);
    std::vector<apgf::Term> t;
    for (int i = 0; i < n; ++i) {
      double f = 0.25 * lat(rng_);
      if (irr(rng_) && irrational) f += std::sqrt(2.0) / 8.0;
      t.push_back({f, {u(rng_), u(rng_)}});
    }
    return apgf::TrigPoly::normalize(std::move(t));
  }

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace oracle
