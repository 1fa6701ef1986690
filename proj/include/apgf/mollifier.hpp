/// \file mollifier.hpp
/// Mollifiers: even, rapidly decreasing kernels with unit integral and
/// vanishing higher moments, together with their scaled nets
///
///     rho_eps(x) = rho(x / eps) / eps.
///
/// Two families are provided.
///
/// - gaussian-comb: rho = sum_j c_j g_{s_j}, with g_s the centered Gaussian
///   density of standard deviation s. The c_j solve the even moment system
///   int rho = 1, int x^{2r} rho = 0 for 2r <= N, so moments 1..N vanish and
///   the first nonzero moment is of order N+1 (or N+2 for odd N).
///   Derivatives and transform are closed form.
///
/// - bandlimited-bump: rho^ is identically 1 on [-a, a] and vanishes outside
///   [-b, b], with the e^{-1/t} smooth step in between. Every derivative of
///   rho^ vanishes at 0, so every moment k >= 1 vanishes. rho and its
///   derivatives are evaluated by trapezoid inverse transform on a cached
///   frequency grid.

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "apgf/error.hpp"
#include "apgf/quadrature.hpp"

namespace apgf {

inline constexpr int kMollifierMaxOrder = 8;
inline constexpr int kDefaultMomentCheck = 10;

namespace detail {

inline double double_factorial_odd(int k) {  // (k-1)!! for even k >= 0
  double r = 1.0;
  for (int n = k - 1; n > 1; n -= 2) r *= n;
  return r;
}

inline const quad::GaussHermite& gauss_hermite_200() {
  static const quad::GaussHermite gh(200);
  return gh;
}

/// Probabilists' Hermite polynomial He_k(t).
inline double hermite_he(int k, double t) {
  double h0 = 1.0;
  if (k == 0) return h0;
  double h1 = t;
  for (int n = 1; n < k; ++n) {
    const double h2 = t * h1 - n * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

/// Solve the dense system a x = b by partial-pivot elimination.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double scale = 0.0;
    for (std::size_t r = col; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
      for (std::size_t c = col; c < n; ++c) scale = std::max(scale, std::abs(a[r][c]));
    }
    if (!(std::abs(a[piv][col]) > 1e-13 * scale))
      throw ConstructionError("mollifier: singular moment system (duplicate scales?)");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Smooth step 0 -> 1 on [0, 1] built from psi(t) = exp(-1/t).
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double p = std::exp(-1.0 / t);
  const double q = std::exp(-1.0 / (1.0 - t));
  return p / (p + q);
}

}  // namespace detail

struct GaussianComb {
  int moment_order = 0;
  std::vector<double> coefficients;
  std::vector<double> scales;
};

struct BandlimitedBump {
  double plateau = 1.0;  // a
  double support = 2.0;  // b
  int moment_check = kDefaultMomentCheck;
};

class ScaledMollifier;

class Mollifier {
 public:
  /// Default scales 1, 2, ..., floor(N/2)+1.
  static Mollifier gaussian_comb(int moment_order) {
    if (moment_order < 0) throw InvalidInput("gaussian comb: negative moment order");
    std::vector<double> scales(static_cast<std::size_t>(moment_order / 2 + 1));
    for (std::size_t j = 0; j < scales.size(); ++j) scales[j] = static_cast<double>(j + 1);
    return gaussian_comb(moment_order, std::move(scales));
  }

  /// Explicit scales; one per even moment constraint 0, 2, ..., 2*floor(N/2).
  static Mollifier gaussian_comb(int moment_order, std::vector<double> scales) {
    if (moment_order < 0) throw InvalidInput("gaussian comb: negative moment order");
    const std::size_t r = static_cast<std::size_t>(moment_order / 2 + 1);
    if (scales.size() != r)
      throw InvalidInput("gaussian comb: need floor(N/2)+1 scales");
    for (double s : scales)
      if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("gaussian comb: scales must be positive");
    // sum_j c_j (s_j^2)^r = delta_{r0}; the (2r-1)!! factor of the Gaussian
    // moments is common to each row and drops out.
    std::vector<std::vector<double>> a(r, std::vector<double>(r));
    std::vector<double> rhs(r, 0.0);
    rhs[0] = 1.0;
    for (std::size_t row = 0; row < r; ++row)
      for (std::size_t j = 0; j < r; ++j) a[row][j] = std::pow(scales[j] * scales[j], static_cast<double>(row));
    GaussianComb g;
    g.moment_order = moment_order;
    g.coefficients = detail::solve_dense(std::move(a), std::move(rhs));
    g.scales = std::move(scales);
    Mollifier m(std::move(g));
    m.verify_moments();
    return m;
  }

  static Mollifier bandlimited(double plateau, double support, int moment_check = kDefaultMomentCheck) {
    if (!(plateau > 0.0) || !std::isfinite(support) || !(plateau < support))
      throw InvalidInput("bandlimited mollifier: need 0 < a < b");
    if (moment_check < 0) throw InvalidInput("bandlimited mollifier: negative moment check order");
    Mollifier m(BandlimitedBump{plateau, support, moment_check});
    m.build_grid();
    m.verify_moments();
    return m;
  }

  bool is_gaussian_comb() const noexcept { return std::holds_alternative<GaussianComb>(family_); }
  bool is_bandlimited() const noexcept { return std::holds_alternative<BandlimitedBump>(family_); }
  const GaussianComb& comb() const { return std::get<GaussianComb>(family_); }
  const BandlimitedBump& bump() const { return std::get<BandlimitedBump>(family_); }

  /// Highest k for which int x^k rho = 0 is guaranteed.
  int certified_moment_order() const {
    if (is_gaussian_comb()) {
      const int n = comb().moment_order;
      return n % 2 == 0 ? n + 1 : n;  // odd moments vanish by symmetry
    }
    return bump().moment_check;
  }

  /// Decay order of f * rho_eps - f guaranteed by the vanishing moments.
  int diagram_decay_order() const { return certified_moment_order() + 1; }

  /// k-th derivative of rho at x.
  double eval(int k, double x) const {
    if (k < 0 || k > kMollifierMaxOrder)
      throw UnsupportedOrder("mollifier eval: derivative order " + std::to_string(k) +
                             " exceeds " + std::to_string(kMollifierMaxOrder));
    if (is_gaussian_comb()) {
      const auto& g = comb();
      const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
      double acc = 0.0;
      for (std::size_t j = 0; j < g.scales.size(); ++j) {
        const double s = g.scales[j];
        const double t = x / s;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        acc += g.coefficients[j] * std::pow(s, -(k + 1)) * sign * detail::hermite_he(k, t) *
               norm * std::exp(-0.5 * t * t);
      }
      return acc;
    }
    // (1/pi) int_0^b rho^(xi) xi^k cos(xi x + k pi/2) dxi
    double acc = 0.0;
    for (std::size_t i = 0; i < grid_xi_.size(); ++i) {
      const double xi = grid_xi_[i];
      const double ph = xi * x;
      double trig = 0.0;
      switch (k % 4) {
        case 0: trig = std::cos(ph); break;
        case 1: trig = -std::sin(ph); break;
        case 2: trig = -std::cos(ph); break;
        default: trig = std::sin(ph); break;
      }
      acc += grid_w_[i] * std::pow(xi, k) * trig;
    }
    return acc;
  }

  double operator()(double x) const { return eval(0, x); }

  /// rho^(xi) = int rho(x) e^{-i xi x} dx; real because rho is even.
  double fourier(double xi) const {
    if (!std::isfinite(xi)) throw InvalidInput("mollifier fourier: non-finite frequency");
    if (is_gaussian_comb()) {
      const auto& g = comb();
      double acc = 0.0;
      for (std::size_t j = 0; j < g.scales.size(); ++j)
        acc += g.coefficients[j] * std::exp(-0.5 * g.scales[j] * g.scales[j] * xi * xi);
      return acc;
    }
    const auto& b = bump();
    return 1.0 - detail::smooth_step((std::abs(xi) - b.plateau) / (b.support - b.plateau));
  }

  /// 1 - rho^(xi), computed without cancellation near xi = 0.
  double fourier_deficit(double xi) const {
    if (!std::isfinite(xi)) throw InvalidInput("mollifier fourier: non-finite frequency");
    if (is_gaussian_comb()) {
      const auto& g = comb();
      double acc = 0.0;
      for (std::size_t j = 0; j < g.scales.size(); ++j)
        acc -= g.coefficients[j] * std::expm1(-0.5 * g.scales[j] * g.scales[j] * xi * xi);
      return acc - unit_mass_residual_;
    }
    const auto& b = bump();
    return detail::smooth_step((std::abs(xi) - b.plateau) / (b.support - b.plateau));
  }

  /// int x^k rho(x) dx. Closed form for gaussian-comb; for bandlimited,
  /// i^{-k} times the k-th finite-difference derivative of rho^ at 0 on a
  /// stencil inside the plateau.
  double moment(int k) const {
    if (k < 0) throw InvalidInput("moment: negative order");
    if (k % 2 == 1) return 0.0;
    if (is_gaussian_comb()) {
      const auto& g = comb();
      double acc = 0.0;
      for (std::size_t j = 0; j < g.scales.size(); ++j)
        acc += g.coefficients[j] * std::pow(g.scales[j], k);
      return acc * detail::double_factorial_odd(k);
    }
    if (k == 0) return fourier(0.0);
    // Forward difference of order k with step h; all stencil points in [0, a].
    const double h = bump().plateau / static_cast<double>(k + 1);
    double acc = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
      acc += sign * binom * fourier(j * h);
      binom = binom * (k - j) / (j + 1);
    }
    const double deriv = acc / std::pow(h, k);
    // int x^k rho = i^k rho^(k)(0); for even k, i^k = (-1)^{k/2}.
    return ((k / 2) % 2 == 0 ? 1.0 : -1.0) * deriv;
  }

  /// int x^k rho(x) dx by quadrature, independent of the closed forms:
  /// Gauss-Hermite (200 nodes) per Gaussian component, or trapezoid in x on
  /// [-L, L] for the bandlimited family. The bandlimited kernel decays only
  /// like exp(-c sqrt|x|), so x-space quadrature resolves k = 0 and the odd
  /// moments; even k >= 2 must go through moment().
  double moment_by_quadrature(int k) const {
    if (k < 0) throw InvalidInput("moment: negative order");
    if (is_gaussian_comb()) {
      const auto& g = comb();
      const auto& gh = detail::gauss_hermite_200();
      double acc = 0.0;
      for (std::size_t j = 0; j < g.scales.size(); ++j)
        acc += g.coefficients[j] *
               gh.gaussian_expectation([k](double x) { return std::pow(x, k); }, g.scales[j]);
      return acc;
    }
    if (k % 2 == 0 && k > 0)
      throw UnsupportedOrder("bandlimited x-space quadrature only resolves k = 0 and odd k");
    const double L = decay_radius();
    const double h = 0.05 / bump().support;
    const auto n = static_cast<std::size_t>(std::ceil(L / h));
    double acc = k == 0 ? 0.5 * eval(0, 0.0) : 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double x = static_cast<double>(i) * h;
      const double rx = eval(0, x);
      acc += 0.5 * (std::pow(x, k) * rx + std::pow(-x, k) * rx);
    }
    return 2.0 * acc * h;
  }

  /// Radius beyond which |rho| is negligible for x-space quadrature.
  double decay_radius() const {
    if (is_gaussian_comb()) {
      double smax = 0.0;
      for (double s : comb().scales) smax = std::max(smax, s);
      return 40.0 * smax;
    }
    return 400.0 / (bump().support - bump().plateau);
  }

  ScaledMollifier scale(double eps) const;

  /// "gaussian:N" or "bandlimited:a,b".
  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    if (is_gaussian_comb())
      os << "gaussian:" << comb().moment_order;
    else
      os << "bandlimited:" << bump().plateau << "," << bump().support;
    return os.str();
  }

  const std::vector<double>& frequency_grid() const noexcept { return grid_xi_; }

 private:
  explicit Mollifier(GaussianComb g) : family_(std::move(g)) {
    double s = 0.0;
    for (double c : comb().coefficients) s += c;
    unit_mass_residual_ = s - 1.0;
  }
  explicit Mollifier(BandlimitedBump b) : family_(b) {}

  void build_grid() {
    const auto& b = bump();
    const double hmax = std::min(0.01, (b.support - b.plateau) / 50.0);
    const auto n = static_cast<std::size_t>(std::ceil(b.support / hmax));
    const double h = b.support / static_cast<double>(n);
    grid_xi_.resize(n);
    grid_w_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = static_cast<double>(i) * h;
      grid_xi_[i] = xi;
      grid_w_[i] = fourier(xi) * h * (i == 0 ? 0.5 : 1.0) / std::numbers::pi;
    }
  }

  void verify_moments() const {
    if (is_gaussian_comb()) {
      const int n = comb().moment_order;
      if (std::abs(moment_by_quadrature(0) - 1.0) > 1e-10)
        throw ConstructionError("gaussian comb: unit integral check failed");
      double fact = 1.0;
      for (int k = 1; k <= n; ++k) {
        fact *= k;
        if (std::abs(moment_by_quadrature(k)) > 1e-10 * (1.0 + fact))
          throw ConstructionError("gaussian comb: moment " + std::to_string(k) + " does not vanish");
      }
      return;
    }
    if (fourier(0.0) != 1.0) throw ConstructionError("bandlimited: unit integral check failed");
    for (int k = 1; k <= bump().moment_check; ++k)
      if (moment(k) != 0.0)
        throw ConstructionError("bandlimited: moment " + std::to_string(k) + " does not vanish");
  }

  std::variant<GaussianComb, BandlimitedBump> family_;
  double unit_mass_residual_ = 0.0;
  std::vector<double> grid_xi_;
  std::vector<double> grid_w_;
};

/// rho_eps for a fixed eps > 0.
class ScaledMollifier {
 public:
  ScaledMollifier(Mollifier base, double eps) : base_(std::move(base)), eps_(eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput("mollifier scale: eps must be positive");
  }

  double eps() const noexcept { return eps_; }
  /// rho_eps^(k)(x) = eps^{-(k+1)} rho^(k)(x / eps)
  double eval(int k, double x) const { return std::pow(eps_, -(k + 1)) * base_.eval(k, x / eps_); }
  double operator()(double x) const { return eval(0, x); }
  /// rho_eps^(xi) = rho^(eps xi)
  double fourier(double xi) const { return base_.fourier(eps_ * xi); }

 private:
  Mollifier base_;
  double eps_;
};

inline ScaledMollifier Mollifier::scale(double eps) const { return ScaledMollifier(*this, eps); }

/// Parse "gaussian:N" or "bandlimited:a,b".
inline Mollifier parse_mollifier(std::string_view spec) {
  auto num = [&](std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
      throw InvalidInput("mollifier spec: bad number '" + std::string(s) + "'");
    return v;
  };
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw InvalidInput("mollifier spec: expected family:params");
  const auto family = spec.substr(0, colon);
  const auto params = spec.substr(colon + 1);
  if (family == "gaussian") {
    const double n = num(params);
    if (n != std::floor(n) || n < 0) throw InvalidInput("mollifier spec: gaussian order must be a nonnegative integer");
    return Mollifier::gaussian_comb(static_cast<int>(n));
  }
  if (family == "bandlimited") {
    const auto comma = params.find(',');
    if (comma == std::string_view::npos) throw InvalidInput("mollifier spec: bandlimited needs a,b");
    return Mollifier::bandlimited(num(params.substr(0, comma)), num(params.substr(comma + 1)));
  }
  throw InvalidInput("mollifier spec: unknown family '" + std::string(family) + "'");
}

}  // namespace apgf
