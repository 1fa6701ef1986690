#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "apgf/epsnet.hpp"
#include "oracles.hpp"

using apgf::complex;
using apgf::EpsGrid;
using apgf::GeneralizedFunction;
using apgf::GeneralizedScalar;
using apgf::TrigPoly;
using apgf::Verdict;

namespace {

GeneralizedFunction scaled_sine(double power) {
  return GeneralizedFunction::symbolic(EpsGrid::default_grid(),
                                       [=](double e) { return TrigPoly::sine(1.0, std::pow(e, power)); });
}

GeneralizedFunction fast_sine() {
  return GeneralizedFunction::symbolic(EpsGrid::default_grid(), [](double e) { return TrigPoly::sine(1.0 / e); });
}

std::vector<double> eps_values() { return EpsGrid::default_grid().values(); }

}  // namespace

TEST(EpsGrid, Validation) {
  EXPECT_THROW(EpsGrid({0.5, 0.5}), apgf::InvalidInput);
  EXPECT_THROW(EpsGrid({0.5, 0.7}), apgf::InvalidInput);
  EXPECT_THROW(EpsGrid({2.0, 0.5}), apgf::InvalidInput);
  EXPECT_THROW(EpsGrid({0.5, 0.0}), apgf::InvalidInput);
  const auto g = EpsGrid::default_grid();
  ASSERT_EQ(g.size(), 12u);
  EXPECT_EQ(g[0], 0.125);
  EXPECT_EQ(g[11], std::ldexp(1.0, -14));
}

TEST(EpsGrid, Intersection) {
  const auto a = EpsGrid::geometric(3, 8);
  const auto b = EpsGrid::geometric(6, 12);
  EXPECT_EQ(EpsGrid::intersect(a, b), EpsGrid::geometric(6, 8));
  EXPECT_THROW(EpsGrid::intersect(EpsGrid::geometric(1, 3), EpsGrid::geometric(4, 6)), apgf::InvalidInput);
}

TEST(SeminormNet, ConstantSine) {
  const auto u = GeneralizedFunction::constant(TrigPoly::sine(1.0));
  const auto n = apgf::seminorm_net(u, 0);
  for (double v : n.values) EXPECT_NEAR(v, 1.0, 1e-4);
}

TEST(SeminormNet, PowerScaledSine) {
  const auto n = apgf::seminorm_net(scaled_sine(-3.0), 0);
  const auto e = eps_values();
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_NEAR(n.values[i] / std::pow(e[i], -3.0), 1.0, 1e-4);
}

TEST(SeminormNet, FastSineFirstOrder) {
  // |sin(x/eps)|_{1,inf} = sup|sin| + sup|eps^-1 cos| = 1 + 1/eps; the second
  // term alone is checked against a brute-force grid sup.
  const auto u = fast_sine();
  const auto n = apgf::seminorm_net(u, 1);
  const auto d = apgf::derivative_sups(u, 1);
  const auto e = eps_values();
  for (std::size_t i = 0; i < e.size(); ++i) {
    EXPECT_NEAR(n.values[i] / (1.0 + 1.0 / e[i]), 1.0, 1e-3);
    const double brute = oracle::grid_max([&](double x) { return std::cos(x / e[i]) / e[i]; }, 0.0, 7.0 * e[i], 20000);
    EXPECT_NEAR(d.sampled[i][1] / brute, 1.0, 1e-3);
  }
}

TEST(SeminormNet, CallableRequiresDeclaredOrder) {
  const auto u = GeneralizedFunction::callable(
      EpsGrid::default_grid(), [](double, double x, int) { return complex{std::sin(x), 0.0}; }, 1);
  EXPECT_NO_THROW(apgf::seminorm_net(u, 1));
  EXPECT_THROW(apgf::seminorm_net(u, 2), apgf::UnsupportedOrder);
}

TEST(SeminormNet, SampledNeverExceedsBound) {
  oracle::TrigPolyGen gen(11);
  for (int c = 0; c < 10; ++c) {
    const auto p = gen(gen.integer(1, 5));
    const auto n = apgf::seminorm_net(GeneralizedFunction::constant(p, EpsGrid::geometric(3, 6)), 2);
    for (std::size_t i = 0; i < n.values.size(); ++i) EXPECT_LE(n.values[i], n.bounds[i] * (1 + 1e-12));
  }
}

TEST(FitOrder, Examples) {
  const auto e = eps_values();
  std::vector<double> a, b, c;
  for (double x : e) {
    a.push_back(std::pow(x, -3.0));
    b.push_back(7.0);
    c.push_back(std::exp(-1.0 / x));
  }
  EXPECT_NEAR(apgf::fit_order(e, a).slope, -3.0, 0.01);
  EXPECT_NEAR(apgf::fit_order(e, b).slope, 0.0, 0.01);
  // e^{-1/eps} underflows for the smallest eps; the remaining points give a
  // slope above 50, as does the endpoint secant over the representable range.
  const auto fc = apgf::fit_order(e, c);
  EXPECT_GT(fc.slope, 50.0);
  EXPECT_FALSE(fc.excluded.empty());
  const double last = fc.grid_used.back();
  const double secant = (-1.0 / last + 1.0 / e.front()) / (std::log(last) - std::log(e.front()));
  EXPECT_GT(secant, 50.0);
}

TEST(FitOrder, InsufficientAndZero) {
  EXPECT_THROW(apgf::fit_order({0.5, 0.25, 0.125}, {1.0, 2.0, 3.0}), apgf::InsufficientData);
  EXPECT_THROW(apgf::fit_order({0.5, 0.25, 0.125, 0.0625, 0.03125}, {1.0, 0.0, 3.0, 0.0, 2.0}),
               apgf::InsufficientData);
  const auto z = apgf::fit_order({0.5, 0.25, 0.125, 0.0625}, {0.0, 0.0, 0.0, 0.0});
  EXPECT_TRUE(z.exactly_zero);
}

TEST(FitOrder, ResidualOfExactPowerLawIsTiny) {
  const auto e = eps_values();
  std::vector<double> v;
  for (double x : e) v.push_back(3.5 * std::pow(x, 2.5));
  const auto f = apgf::fit_order(e, v);
  EXPECT_NEAR(f.slope, 2.5, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.5), 1e-10);
  EXPECT_LT(f.max_residual, 1e-10);
}

TEST(Classify, PowerGrowthIsModerate) {
  const auto c = apgf::classify(scaled_sine(-3.0), {.k_max = 2});
  EXPECT_EQ(c.verdict, Verdict::moderate);
  EXPECT_FALSE(c.negligible());
  ASSERT_EQ(c.orders.size(), 3u);
  for (double s : c.slopes()) EXPECT_NEAR(s, -3.0, 0.01);
}

TEST(Classify, ExponentiallySmallIsNegligible) {
  const auto u = GeneralizedFunction::symbolic(
      EpsGrid::default_grid(), [](double e) { return TrigPoly::sine(1.0, std::exp(-1.0 / e)); });
  const auto c = apgf::classify(u, {.k_max = 2, .m_max = 10});
  EXPECT_EQ(c.verdict, Verdict::negligible);
  EXPECT_TRUE(c.moderate());
}

TEST(Classify, ExponentiallyLargeIsNeither) {
  const auto u = GeneralizedFunction::symbolic(EpsGrid::default_grid(), [](double e) {
    return TrigPoly::sine(1.0, std::min(std::exp(1.0 / e), std::numeric_limits<double>::max()));
  });
  const auto c = apgf::classify(u);
  EXPECT_EQ(c.verdict, Verdict::neither);
  ASSERT_TRUE(c.witness_k.has_value());
  EXPECT_EQ(*c.witness_k, 0);
}

TEST(Classify, ExponentialGrowthOnCoarseGridIsNeither) {
  // Finite values throughout, so the verdict comes from the slope cap.
  const EpsGrid g({0.05, 0.04, 0.03, 0.025, 0.02, 0.015, 0.0125, 0.01});
  const auto u = GeneralizedFunction::symbolic(g, [](double e) { return TrigPoly::sine(1.0, std::exp(1.0 / e)); });
  const auto c = apgf::classify(u);
  EXPECT_EQ(c.verdict, Verdict::neither);
  EXPECT_EQ(c.witness_k.value(), 0);
}

TEST(Classify, CaveatsRecordCertificateLevel) {
  const auto c = apgf::classify(scaled_sine(-1.0));
  ASSERT_FALSE(c.caveats.empty());
  EXPECT_NE(c.caveats.front().find("k <= 2"), std::string::npos);
}

TEST(Classify, ScalarNets) {
  const auto g = EpsGrid::default_grid();
  EXPECT_EQ(apgf::classify(GeneralizedScalar::from(g, [](double e) { return complex{1.0 / e, 0.0}; })).verdict,
            Verdict::moderate);
  EXPECT_EQ(apgf::classify(GeneralizedScalar::from(g, [](double e) { return complex{std::pow(e, 9.0), 0.0}; })).verdict,
            Verdict::negligible);
  EXPECT_EQ(apgf::classify(GeneralizedScalar::constant(g, 0.0)).verdict, Verdict::negligible);
}

TEST(Algebra, Examples) {
  const auto g = EpsGrid::default_grid();
  const auto a = GeneralizedFunction::symbolic(g, [](double e) { return TrigPoly::constant(1.0 / e); });
  const auto b = GeneralizedFunction::symbolic(g, [](double e) { return TrigPoly::constant(e); });
  const auto p = apgf::gf_mul(a, b);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(p.slice(i), TrigPoly::constant(1.0));

  const auto d = apgf::gf_derivative(fast_sine(), 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double e = g[i];
    EXPECT_EQ(d.slice(i), apgf::scale(TrigPoly::cosine(1.0 / e), 1.0 / e));
  }

  const auto u = scaled_sine(-2.0);
  const auto z = apgf::gf_add(u, apgf::gf_negate(u));
  for (const auto& s : z.slices()) EXPECT_TRUE(s.is_zero());
  const auto c = apgf::classify(z);
  EXPECT_EQ(c.verdict, Verdict::negligible);
  EXPECT_TRUE(c.orders[0].exactly_zero);
}

TEST(Algebra, GridIntersection) {
  const auto u = GeneralizedFunction::constant(TrigPoly::sine(1.0), EpsGrid::geometric(3, 8));
  const auto v = GeneralizedFunction::constant(TrigPoly::cosine(1.0), EpsGrid::geometric(6, 12));
  EXPECT_EQ(apgf::gf_add(u, v).grid(), EpsGrid::geometric(6, 8));
  const auto w = GeneralizedFunction::constant(TrigPoly::cosine(1.0), EpsGrid::geometric(10, 12));
  EXPECT_THROW(apgf::gf_mul(u, w), apgf::InvalidInput);
}

TEST(Algebra, MixedOperandsBecomeCallable) {
  const auto g = EpsGrid::geometric(3, 8);
  const auto sym = GeneralizedFunction::symbolic(g, [](double e) { return TrigPoly::sine(1.0 / e); });
  const auto call = GeneralizedFunction::callable(
      g, [](double e, double x, int k) { return complex{std::pow(1.0 / e, k) * std::cos(x / e + k * std::numbers::pi / 2), 0.0}; },
      4, [](double e) { return 1.0 / e; });
  const auto p = apgf::gf_mul(sym, call);
  EXPECT_FALSE(p.is_symbolic());
  EXPECT_EQ(p.max_order(), 4);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double e = g[i];
    const double x = 0.37;
    // sin(x/e) cos(x/e) = sin(2x/e)/2
    EXPECT_NEAR(p.evaluate(i, x, 0).real(), 0.5 * std::sin(2 * x / e), 1e-12);
    EXPECT_NEAR(p.evaluate(i, x, 1).real() * e, std::cos(2 * x / e), 1e-10);
  }
  EXPECT_THROW(apgf::gf_derivative(call, 5), apgf::UnsupportedOrder);
  EXPECT_EQ(apgf::gf_derivative(call, 3).max_order(), 1);
}

TEST(Algebra, TranslateShiftsArgument) {
  const auto u = fast_sine();
  const auto t = apgf::gf_translate(u, 0.3);
  for (std::size_t i = 0; i < u.grid().size(); ++i)
    EXPECT_NEAR(t.evaluate(i, 1.1).real(), std::sin(1.4 / u.grid()[i]), 1e-9);
}

TEST(GfEqual, Examples) {
  const auto g = EpsGrid::default_grid();
  const auto u = GeneralizedFunction::constant(TrigPoly::sine(1.0), g);
  EXPECT_TRUE(apgf::gf_equal(u, u).equal);
  const auto v = GeneralizedFunction::symbolic(
      g, [](double e) { return apgf::add(TrigPoly::sine(1.0), TrigPoly::constant(std::exp(-1.0 / e))); });
  EXPECT_TRUE(apgf::gf_equal(u, v, {.m_max = 10}).equal);
  const auto w = GeneralizedFunction::symbolic(
      g, [](double e) { return apgf::add(TrigPoly::sine(1.0), TrigPoly::constant(e * e)); });
  const auto r = apgf::gf_equal(u, w, {.m_max = 3});
  EXPECT_FALSE(r.equal);
  EXPECT_NEAR(r.difference.slopes()[0], 2.0, 1e-9);
}

// Random symbolic families. Negligible: eps^m P with m in [14, 20], or
// e^{-1/eps} P. Moderate: eps^{-m'} Q with m' <= 3 and frequencies up to
// 1/eps, so that every derivative order up to 2 keeps the product slope >= 9.
class Families {
 public:
  explicit Families(std::uint64_t seed) : gen_(seed) {}

  GeneralizedFunction negligible() {
    const auto p = gen_(gen_.integer(1, 4));
    if (gen_.integer(0, 3) == 0)
      return GeneralizedFunction::symbolic(EpsGrid::default_grid(),
                                           [p](double e) { return apgf::scale(p, std::exp(-1.0 / e)); });
    const int m = gen_.integer(14, 20);
    return GeneralizedFunction::symbolic(EpsGrid::default_grid(),
                                         [p, m](double e) { return apgf::scale(p, std::pow(e, m)); });
  }

  GeneralizedFunction moderate() {
    const auto q = gen_(gen_.integer(1, 4));
    const int m = gen_.integer(0, 3);
    const bool fast = gen_.integer(0, 1) == 1;
    return GeneralizedFunction::symbolic(EpsGrid::default_grid(), [q, m, fast](double e) {
      std::vector<apgf::Term> t(q.terms().begin(), q.terms().end());
      for (auto& x : t) {
        if (fast) x.frequency /= e;
        x.coefficient *= std::pow(e, -m);
      }
      return TrigPoly::normalize(std::move(t));
    });
  }

  oracle::TrigPolyGen& gen() { return gen_; }

 private:
  oracle::TrigPolyGen gen_;
};

TEST(Properties, IdealProperty) {
  Families f(2024);
  for (int c = 0; c < 50; ++c) {
    const auto n = f.negligible();
    const auto m = f.moderate();
    ASSERT_TRUE(apgf::classify(n).negligible()) << c;
    const auto r = apgf::classify(apgf::gf_mul(n, m));
    EXPECT_EQ(r.verdict, Verdict::negligible) << "case " << c;
  }
}

TEST(Properties, SubalgebraClosure) {
  Families f(77);
  for (int c = 0; c < 20; ++c) {
    const auto u = f.moderate();
    const auto v = f.moderate();
    EXPECT_TRUE(apgf::classify(apgf::gf_add(u, v)).moderate()) << c;
    EXPECT_TRUE(apgf::classify(apgf::gf_mul(u, v)).moderate()) << c;
  }
}

TEST(Properties, LeibnizOnNets) {
  Families f(5);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-10.0, 10.0);
  for (int c = 0; c < 10; ++c) {
    const auto u = f.moderate();
    const auto v = f.moderate();
    const auto lhs = apgf::gf_derivative(apgf::gf_mul(u, v), 1);
    const auto rhs = apgf::gf_add(apgf::gf_mul(apgf::gf_derivative(u, 1), v), apgf::gf_mul(u, apgf::gf_derivative(v, 1)));
    for (std::size_t i = 0; i < u.grid().size(); i += 3) {
      const double x = ux(rng);
      const complex a = lhs.evaluate(i, x);
      const complex b = rhs.evaluate(i, x);
      EXPECT_LE(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(a))) << c << " " << i;
    }
  }
}

TEST(Properties, EqualityIsAnEquivalenceOnCorpus) {
  Families f(31);
  std::vector<GeneralizedFunction> corpus;
  for (int c = 0; c < 4; ++c) {
    const auto m = f.moderate();
    corpus.push_back(m);
    corpus.push_back(apgf::gf_add(m, f.negligible()));
  }
  for (std::size_t a = 0; a < corpus.size(); ++a) {
    EXPECT_TRUE(apgf::gf_equal(corpus[a], corpus[a]).equal);
    for (std::size_t b = 0; b < corpus.size(); ++b)
      EXPECT_EQ(apgf::gf_equal(corpus[a], corpus[b]).equal, apgf::gf_equal(corpus[b], corpus[a]).equal);
  }
  for (std::size_t a = 0; a + 1 < corpus.size(); a += 2) {
    const auto third = apgf::gf_add(corpus[a], f.negligible());
    ASSERT_TRUE(apgf::gf_equal(corpus[a], corpus[a + 1]).equal);
    ASSERT_TRUE(apgf::gf_equal(corpus[a + 1], third).equal);
    EXPECT_TRUE(apgf::gf_equal(corpus[a], third).equal);
  }
  // distinct moderate representatives differ
  EXPECT_FALSE(apgf::gf_equal(corpus[0], corpus[2]).equal);
}

TEST(Properties, SeminormSubmultiplicativity) {
  oracle::TrigPolyGen gen(99);
  const EpsGrid g = EpsGrid::geometric(3, 6);
  for (int c = 0; c < 15; ++c) {
    const auto p = gen(gen.integer(1, 4));
    const auto q = gen(gen.integer(1, 4));
    const auto u = GeneralizedFunction::symbolic(g, [p](double e) { return apgf::scale(p, 1.0 / e); });
    const auto v = GeneralizedFunction::constant(q, g);
    const auto uv = apgf::gf_mul(u, v);
    for (int k = 0; k <= 3; ++k) {
      const auto nu = apgf::seminorm_net(u, k);
      const auto nv = apgf::seminorm_net(v, k);
      const auto nuv = apgf::seminorm_net(uv, k);
      for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_LE(nuv.values[i], std::ldexp(1.0, k) * nu.values[i] * nv.values[i] * (1 + 1e-9)) << c << " " << k;
    }
  }
}
