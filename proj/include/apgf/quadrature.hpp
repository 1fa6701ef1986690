/// \file quadrature.hpp
/// Adaptive Gauss-Kronrod (7/15) integration of real or complex integrands
/// and Gauss-Hermite nodes for Gaussian-weighted moments.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <type_traits>
#include <utility>
#include <vector>

#include "apgf/error.hpp"

namespace apgf::quad {

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  bool converged = true;
};

namespace detail {

// Kronrod 15-point abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights at the odd-indexed nodes.
inline constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F, class T>
std::pair<T, double> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kron = fc * kWk[7];
  T gauss = fc * kWg[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = h * kXk[i];
    const T s = f(c - dx) + f(c + dx);
    kron += s * kWk[i];
    if (i % 2 == 1) gauss += s * kWg[i / 2];
  }
  kron *= h;
  gauss *= h;
  return {kron, std::abs(kron - gauss)};
}

}  // namespace detail

/// Integral of f over [a, b] to absolute tolerance `tol`. Globally adaptive:
/// the interval with the largest error estimate is bisected until the total
/// estimate meets `tol`, reaches the roundoff floor, or `max_intervals` is hit.
template <class F>
auto integrate(F f, double a, double b, double tol = 1e-10, std::size_t max_intervals = 4096) {
  using T = std::decay_t<decltype(f(a))>;
  Result<T> out;
  if (a == b) return out;
  if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidInput("integrate: non-finite bounds");
  struct Piece {
    double a, b;
    T value;
    double error;
  };
  auto worse = [](const Piece& x, const Piece& y) { return x.error < y.error; };
  std::vector<Piece> heap;
  {
    auto [v, e] = detail::gk15<F, T>(f, a, b);
    heap.push_back({a, b, v, e});
  }
  double total_err = heap.front().error;
  double magnitude = std::abs(heap.front().value);
  while (heap.size() < max_intervals) {
    if (total_err <= tol || total_err <= 1e-15 * magnitude) break;
    std::pop_heap(heap.begin(), heap.end(), worse);
    const Piece w = heap.back();
    heap.pop_back();
    const double m = 0.5 * (w.a + w.b);
    if (!(m > w.a && m < w.b)) {
      heap.push_back(w);
      std::push_heap(heap.begin(), heap.end(), worse);
      break;
    }
    auto [lv, le] = detail::gk15<F, T>(f, w.a, m);
    auto [rv, re] = detail::gk15<F, T>(f, m, w.b);
    heap.push_back({w.a, m, lv, le});
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back({m, w.b, rv, re});
    std::push_heap(heap.begin(), heap.end(), worse);
    total_err += le + re - w.error;
    magnitude += std::abs(lv) + std::abs(rv) - std::abs(w.value);
  }
  total_err = 0.0;
  magnitude = 0.0;
  for (const auto& p : heap) {
    out.value += p.value;
    total_err += p.error;
    magnitude += std::abs(p.value);
  }
  out.error = total_err;
  out.converged = total_err <= tol || total_err <= 1e-15 * magnitude;
  return out;
}

/// Integral over [a, b] split at the given interior breakpoints.
template <class F>
auto integrate_pieces(F f, std::vector<double> points, double tol = 1e-10) {
  using T = std::decay_t<decltype(f(points.front()))>;
  Result<T> out;
  const double per = tol / static_cast<double>(std::max<std::size_t>(1, points.size() - 1));
  for (std::size_t i = 1; i < points.size(); ++i) {
    auto r = integrate(f, points[i - 1], points[i], per);
    out.value += r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
  }
  return out;
}

/// Gauss-Hermite nodes and weights for weight exp(-t^2), by Golub-Welsch:
/// eigen-decomposition of the Jacobi matrix with implicit QL.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussHermite(int n) : nodes(static_cast<std::size_t>(n)), weights(static_cast<std::size_t>(n)) {
    if (n < 1) throw InvalidInput("GaussHermite: need at least one node");
    const auto N = static_cast<std::size_t>(n);
    std::vector<double> d(N, 0.0), e(N, 0.0), z(N, 0.0);
    for (std::size_t i = 1; i < N; ++i) e[i - 1] = std::sqrt(0.5 * static_cast<double>(i));
    z[0] = 1.0;  // first row of the eigenvector matrix
    for (std::size_t l = 0; l < N; ++l) {
      for (int iter = 0;; ++iter) {
        std::size_t m = l;
        for (; m + 1 < N; ++m) {
          const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
          if (std::abs(e[m]) <= 1e-16 * dd) break;
        }
        if (m == l) break;
        if (iter > 60) throw ConstructionError("GaussHermite: QL iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? r : -r));
        double s = 1.0, c = 1.0, p = 0.0;
        std::size_t i = m;
        bool underflow = false;
        while (i-- > l) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    }
    std::vector<std::size_t> order(N);
    for (std::size_t i = 0; i < N; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    for (std::size_t i = 0; i < N; ++i) {
      nodes[i] = d[order[i]];
      weights[i] = sqrt_pi * z[order[i]] * z[order[i]];
    }
  }

  /// E[g(X)] for X ~ N(0, s^2).
  template <class F>
  double gaussian_expectation(F&& g, double s) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      acc += weights[i] * g(std::numbers::sqrt2 * s * nodes[i]);
    return acc / std::sqrt(std::numbers::pi);
  }
};

}  // namespace apgf::quad
