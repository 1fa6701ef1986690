/// \file distribution.hpp
/// Almost periodic distributions T = sum_j f_j^(j) with trigonometric
/// polynomial components, integrable distributions v = sum_i f_i^(i) with
/// closed-form decaying profiles, smoothing by test functions, the embeddings
/// i_ap and sigma_ap, and convolution of nets with integrable distributions.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "apgf/epsnet.hpp"
#include "apgf/error.hpp"
#include "apgf/mollifier.hpp"
#include "apgf/quadrature.hpp"
#include "apgf/trigpoly.hpp"

namespace apgf {

struct ApComponent {
  int order = 0;
  TrigPoly f;

  friend bool operator==(const ApComponent&, const ApComponent&) = default;
};

/// T = sum_j f_j^(j), components sorted by order, orders distinct.
class ApDistribution {
 public:
  ApDistribution() = default;
  explicit ApDistribution(std::vector<ApComponent> components) : components_(std::move(components)) {
    std::sort(components_.begin(), components_.end(),
              [](const ApComponent& a, const ApComponent& b) { return a.order < b.order; });
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if (components_[i].order < 0) throw InvalidInput("distribution: negative derivative order");
      if (i > 0 && components_[i].order == components_[i - 1].order)
        throw InvalidInput("distribution: duplicate derivative order " + std::to_string(components_[i].order));
    }
  }

  /// The regular distribution given by f.
  static ApDistribution function(TrigPoly f) { return ApDistribution({{0, std::move(f)}}); }

  const std::vector<ApComponent>& components() const noexcept { return components_; }
  bool empty() const noexcept { return components_.empty(); }
  int max_order() const noexcept { return components_.empty() ? 0 : components_.back().order; }

  /// T' : every component order goes up by one.
  ApDistribution derivative(int j = 1) const {
    if (j < 0) throw InvalidInput("distribution: negative derivative order");
    auto c = components_;
    for (auto& x : c) x.order += j;
    return ApDistribution(std::move(c));
  }

  /// sum_j f_j^(j) collapsed to a single trigonometric polynomial.
  TrigPoly collapse() const {
    TrigPoly s;
    for (const auto& c : components_) s = add(s, apgf::derivative(c.f, c.order));
    return s;
  }

  friend bool operator==(const ApDistribution&, const ApDistribution&) = default;

 private:
  std::vector<ApComponent> components_;
};

/// a T1 + b T2 with components of equal order merged.
inline ApDistribution combine(complex a, const ApDistribution& t1, complex b, const ApDistribution& t2) {
  std::vector<ApComponent> out;
  auto put = [&](int order, const TrigPoly& f) {
    for (auto& c : out)
      if (c.order == order) {
        c.f = add(c.f, f);
        return;
      }
    out.push_back({order, f});
  };
  for (const auto& c : t1.components()) put(c.order, scale(c.f, a));
  for (const auto& c : t2.components()) put(c.order, scale(c.f, b));
  return ApDistribution(std::move(out));
}

// ---------------------------------------------------------------------------
// Test functions

/// phi(x) = N exp(-1/(1 - t^2)), t = (x - center)/radius, with N chosen so
/// that the integral equals `mass`.
class TestFunction {
 public:
  static TestFunction bump(double center = 0.0, double radius = 1.0, double mass = 1.0) {
    if (!std::isfinite(center) || !(radius > 0.0) || !std::isfinite(radius) || !std::isfinite(mass))
      throw InvalidInput("test function: need finite center, positive radius, finite mass");
    TestFunction t;
    t.center_ = center;
    t.radius_ = radius;
    t.norm_ = 1.0;
    const double raw = quad::integrate([&](double x) { return t.eval(x); }, center - radius, center + radius, 1e-14).value;
    t.norm_ = mass / raw;
    t.mass_ = mass;
    return t;
  }

  double center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  double mass() const noexcept { return mass_; }
  double support_lo() const noexcept { return center_ - radius_; }
  double support_hi() const noexcept { return center_ + radius_; }

  double eval(double x) const {
    const double t = (x - center_) / radius_;
    if (!(std::abs(t) < 1.0)) return 0.0;
    return norm_ * std::exp(-1.0 / (1.0 - t * t));
  }
  double operator()(double x) const { return eval(x); }

  /// int phi(y) e^{-i lambda y} dy over the support.
  complex transform(double lambda) const {
    return quad::integrate([&](double y) { return eval(y) * std::polar(1.0, -lambda * y); }, support_lo(), support_hi(),
                           1e-13 * std::max(1.0, std::abs(mass_)))
        .value;
  }

 private:
  double center_ = 0.0;
  double radius_ = 1.0;
  double norm_ = 1.0;
  double mass_ = 1.0;
};

/// T * phi = sum_j f_j * phi^(j): term c e^{i lambda x} of f_j becomes
/// c (i lambda)^j phi^(lambda) e^{i lambda x}.
inline TrigPoly smooth_with_test(const ApDistribution& t, const TestFunction& phi) {
  std::vector<Term> out;
  for (const auto& c : t.components())
    for (const auto& term : c.f.terms())
      out.push_back({term.frequency, term.coefficient * i_lambda_pow(term.frequency, c.order) * phi.transform(term.frequency)});
  return TrigPoly::normalize(std::move(out));
}

/// M(T): the mean of the order-0 component; derivatives have zero mean.
inline complex distribution_mean(const ApDistribution& t) {
  for (const auto& c : t.components())
    if (c.order == 0) return mean_exact(c.f);
  return {};
}

// ---------------------------------------------------------------------------
// Embeddings

/// i_ap(T) = (T * rho_eps)_eps, slice eps: sum c (i lambda)^j rho^(eps lambda) e^{i lambda x}.
inline GeneralizedFunction embed_iap(const ApDistribution& t, const Mollifier& rho,
                                     EpsGrid grid = EpsGrid::default_grid()) {
  return GeneralizedFunction::symbolic(std::move(grid), [&](double eps) {
    std::vector<Term> out;
    for (const auto& c : t.components())
      for (const auto& term : c.f.terms())
        out.push_back({term.frequency,
                       term.coefficient * i_lambda_pow(term.frequency, c.order) * rho.fourier(eps * term.frequency)});
    return TrigPoly::normalize(std::move(out));
  });
}

/// sigma_ap(f) = (f)_eps.
inline GeneralizedFunction embed_sigma(const TrigPoly& f, EpsGrid grid = EpsGrid::default_grid()) {
  return GeneralizedFunction::constant(f, std::move(grid));
}

struct DiagramReport {
  GeneralizedFunction defect;
  Classification classification;
  /// Largest eps below which the defect vanishes identically, when known in
  /// closed form (bandlimited plateau, or a constant f).
  std::optional<double> exact_zero_below;
  /// Decay order the mollifier can certify (N+1 for a gaussian comb of order N).
  int certified_order = 0;
};

/// (f * rho_eps - f)_eps with slices -sum c (1 - rho^(eps lambda)) e^{i lambda x}.
inline DiagramReport diagram_defect(const TrigPoly& f, const Mollifier& rho, EpsGrid grid = EpsGrid::default_grid(),
                                    const ClassifyOptions& opt = {}) {
  auto defect = GeneralizedFunction::symbolic(std::move(grid), [&](double eps) {
    std::vector<Term> out;
    for (const auto& term : f.terms())
      out.push_back({term.frequency, -term.coefficient * rho.fourier_deficit(eps * term.frequency)});
    return TrigPoly::normalize(std::move(out));
  });
  DiagramReport r{defect, classify(defect, opt), std::nullopt, rho.diagram_decay_order()};
  const double lmax = f.max_abs_frequency();
  if (lmax == 0.0)
    r.exact_zero_below = 1.0;
  else if (rho.is_bandlimited())
    r.exact_zero_below = rho.bump().plateau / lmax;
  return r;
}

// ---------------------------------------------------------------------------
// Integrable distributions

enum class ProfileKind { gaussian, exponential };

/// Integrable profile with closed-form L1 norm and Fourier transform.
///   gaussian:    A / (sigma sqrt(2 pi)) exp(-(x - mu)^2 / (2 sigma^2))
///   exponential: A (kappa / 2) exp(-kappa |x - mu|)
/// In both cases the integral is A and the L1 norm is |A|.
struct Profile {
  ProfileKind kind = ProfileKind::gaussian;
  double amplitude = 1.0;
  double center = 0.0;
  double width = 1.0;  // sigma, or kappa for the exponential

  static Profile gaussian(double amplitude = 1.0, double center = 0.0, double sigma = 1.0) {
    Profile p{ProfileKind::gaussian, amplitude, center, sigma};
    p.validate();
    return p;
  }
  static Profile exponential(double amplitude = 1.0, double center = 0.0, double kappa = 1.0) {
    Profile p{ProfileKind::exponential, amplitude, center, kappa};
    p.validate();
    return p;
  }

  void validate() const {
    if (!std::isfinite(amplitude) || !std::isfinite(center) || !(width > 0.0) || !std::isfinite(width))
      throw InvalidInput("profile: need finite amplitude and center, positive width");
  }

  double l1_norm() const noexcept { return std::abs(amplitude); }

  double eval(double x) const {
    const double d = x - center;
    if (kind == ProfileKind::gaussian)
      return amplitude / (width * std::sqrt(2.0 * std::numbers::pi)) * std::exp(-0.5 * d * d / (width * width));
    return amplitude * 0.5 * width * std::exp(-width * std::abs(d));
  }

  /// f^(k)(x); for the exponential profile k >= 1 is taken away from the kink.
  double eval_derivative(double x, int k) const {
    if (k < 0) throw InvalidInput("profile: negative derivative order");
    if (kind == ProfileKind::gaussian) {
      const double t = (x - center) / width;
      return eval(x) * std::pow(-1.0 / width, k) * detail::hermite_he(k, t);
    }
    const double d = x - center;
    const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    return k == 0 ? eval(x) : eval(x) * std::pow(-width * s, k);
  }

  /// f^(lambda) = int f(x) e^{-i lambda x} dx.
  complex fourier(double lambda) const {
    const complex shift = std::polar(1.0, -lambda * center);
    if (kind == ProfileKind::gaussian) return amplitude * shift * std::exp(-0.5 * width * width * lambda * lambda);
    return amplitude * shift * (width * width / (width * width + lambda * lambda));
  }

  /// Radius around the center outside which the tail mass is below 1e-12 of
  /// the L1 norm.
  double truncation_radius() const {
    if (kind == ProfileKind::exponential) return -std::log(1e-12) / width;
    double z = 1.0;
    while (std::erfc(z / std::numbers::sqrt2) > 1e-12) z += 0.01;
    return z * width;
  }

  std::string describe() const {
    return std::string(kind == ProfileKind::gaussian ? "gaussian" : "exponential") + "(" + std::to_string(amplitude) +
           ", " + std::to_string(center) + ", " + std::to_string(width) + ")";
  }

  friend bool operator==(const Profile&, const Profile&) = default;
};

struct IntegrableComponent {
  int order = 0;
  Profile f;
};

/// v = sum_i f_i^(i) with f_i in L1.
class IntegrableDistribution {
 public:
  IntegrableDistribution() = default;
  explicit IntegrableDistribution(std::vector<IntegrableComponent> components) : components_(std::move(components)) {
    for (const auto& c : components_) {
      if (c.order < 0) throw InvalidInput("integrable distribution: negative derivative order");
      c.f.validate();
    }
  }

  static IntegrableDistribution profile(Profile f, int order = 0) { return IntegrableDistribution({{order, f}}); }

  const std::vector<IntegrableComponent>& components() const noexcept { return components_; }
  int max_order() const noexcept {
    int m = 0;
    for (const auto& c : components_) m = std::max(m, c.order);
    return m;
  }

  /// v^(lambda) = sum (i lambda)^i f_i^(lambda)
  complex fourier(double lambda) const {
    complex s{};
    for (const auto& c : components_) s += i_lambda_pow(lambda, c.order) * c.f.fourier(lambda);
    return s;
  }

 private:
  std::vector<IntegrableComponent> components_;
};

enum class ConvolvePath { automatic, symbolic, quadrature };

struct ConvolutionResult {
  GeneralizedFunction net;
  bool symbolic = false;
  std::vector<std::string> warnings;
  /// Quadrature calls that did not reach tolerance (quadrature path only;
  /// updated as the net is evaluated).
  std::shared_ptr<std::atomic<long>> unconverged = std::make_shared<std::atomic<long>>(0);
};

/// (u_eps * v)_eps. Derivatives of v are moved onto u:
///   (u * f_i^(i))^(j) = u^(i+j) * f_i.
inline ConvolutionResult convolve_integrable(const GeneralizedFunction& u, const IntegrableDistribution& v,
                                             ConvolvePath path = ConvolvePath::automatic) {
  const int l = v.max_order();
  if (u.max_order() < l)
    throw UnsupportedOrder("convolve: net supports derivatives up to " + std::to_string(u.max_order()) +
                           ", distribution needs " + std::to_string(l));
  ConvolutionResult r{GeneralizedFunction::zero(u.grid()), false, {}};
  const bool sym = path == ConvolvePath::symbolic || (path == ConvolvePath::automatic && u.is_symbolic());
  if (sym) {
    if (!u.is_symbolic()) throw InvalidInput("convolve: symbolic path needs a symbolic net");
    std::vector<TrigPoly> slices;
    for (const auto& p : u.slices()) {
      std::vector<Term> out;
      for (const auto& t : p.terms()) out.push_back({t.frequency, t.coefficient * v.fourier(t.frequency)});
      slices.push_back(TrigPoly::normalize(std::move(out)));
    }
    r.net = GeneralizedFunction::symbolic(u.grid(), std::move(slices)).with_sup_config(u.sup_config());
    r.symbolic = true;
    return r;
  }

  struct Piece {
    int order;
    Profile f;
    std::vector<double> breaks;
  };
  std::vector<Piece> pieces;
  for (const auto& c : v.components()) {
    const double R = c.f.truncation_radius();
    std::vector<double> b{c.f.center - R};
    if (c.f.kind == ProfileKind::exponential) b.push_back(c.f.center);
    b.push_back(c.f.center + R);
    pieces.push_back({c.order, c.f, std::move(b)});
  }
  r.warnings.push_back("quadrature path: profiles truncated where the tail mass drops below 1e-12 of the L1 norm");
  auto ev = u.evaluator();
  auto bad = r.unconverged;
  const int max_order = u.max_order() == kUnboundedOrder ? kUnboundedOrder : u.max_order() - l;
  r.net = GeneralizedFunction::callable(
              u.grid(),
              [ev, pieces, bad](double eps, double x, int j) {
                complex total{};
                for (const auto& p : pieces) {
                  auto integrand = [&](double y) { return ev(eps, x - y, p.order + j) * p.f.eval(y); };
                  double scale = 0.0;
                  for (double y : p.breaks) scale = std::max(scale, std::abs(ev(eps, x - y, p.order + j)));
                  scale = std::max(scale, std::abs(ev(eps, x - p.f.center, p.order + j)));
                  const double tol = 1e-12 * p.f.l1_norm() * std::max(scale, 1e-300);
                  auto res = quad::integrate_pieces(integrand, p.breaks, tol);
                  if (!res.converged) ++*bad;
                  total += res.value;
                }
                return total;
              },
              max_order, u.frequency_hint())
              .with_sup_config(u.sup_config());
  return r;
}

}  // namespace apgf
