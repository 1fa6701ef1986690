#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "apgf/expr.hpp"
#include "corpus.hpp"
#include "oracles.hpp"

namespace ex = apgf::expr;
using apgf::complex;
using apgf::EpsGrid;
using apgf::TrigPoly;
using ex::Op;

namespace {

// plain recursive evaluation, independent of the jet code
complex direct_eval(const ex::Node& n, double eps, double x) {
  switch (n.op) {
    case Op::number: return n.value;
    case Op::imag: return {0.0, 1.0};
    case Op::x: return x;
    case Op::eps: return eps;
    case Op::neg: return -direct_eval(*n.lhs, eps, x);
    case Op::add: return direct_eval(*n.lhs, eps, x) + direct_eval(*n.rhs, eps, x);
    case Op::sub: return direct_eval(*n.lhs, eps, x) - direct_eval(*n.rhs, eps, x);
    case Op::mul: return direct_eval(*n.lhs, eps, x) * direct_eval(*n.rhs, eps, x);
    case Op::div: return direct_eval(*n.lhs, eps, x) / direct_eval(*n.rhs, eps, x);
    case Op::pow: {
      complex r = 1.0;
      const complex b = direct_eval(*n.lhs, eps, x);
      for (int k = 0; k < std::abs(n.exponent); ++k) r *= b;
      return n.exponent < 0 ? 1.0 / r : r;
    }
    case Op::call: {
      const complex a = direct_eval(*n.lhs, eps, x);
      switch (n.func) {
        case ex::Func::sin: return std::sin(a);
        case ex::Func::cos: return std::cos(a);
        case ex::Func::exp: return std::exp(a);
        default: return std::sqrt(a);
      }
    }
  }
  return {};
}

// random trees over the whole grammar
ex::NodePtr random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 11);
  std::uniform_real_distribution<double> val(0.0, 100.0);
  if (depth == 0 || pick(rng) < 3) {
    switch (pick(rng) % 4) {
      case 0: return ex::number(val(rng));
      case 1: return ex::leaf(Op::imag);
      case 2: return ex::leaf(Op::eps);
      default: return ex::leaf(Op::x);
    }
  }
  auto sub = [&] { return random_tree(rng, depth - 1); };
  switch (pick(rng)) {
    case 0: return ex::unary(Op::neg, sub());
    case 1: return ex::binary(Op::add, sub(), sub());
    case 2: return ex::binary(Op::sub, sub(), sub());
    case 3: return ex::binary(Op::mul, sub(), sub());
    case 4: return ex::binary(Op::div, sub(), sub());
    case 5: return ex::power(sub(), pick(rng) - 6);
    default: return ex::call(static_cast<ex::Func>(pick(rng) % 4), sub());
  }
}

}  // namespace

TEST(Parse, Structure) {
  const auto a = ex::parse("-x^2");
  ASSERT_EQ(a->op, Op::neg);
  EXPECT_EQ(a->lhs->op, Op::pow);
  EXPECT_EQ(a->lhs->exponent, 2);

  const auto b = ex::parse("2*-x");
  ASSERT_EQ(b->op, Op::mul);
  EXPECT_EQ(b->rhs->op, Op::neg);

  const auto c = ex::parse("x - x - x");
  ASSERT_EQ(c->op, Op::sub);
  EXPECT_EQ(c->lhs->op, Op::sub);

  const auto d = ex::parse("eps^-2");
  ASSERT_EQ(d->op, Op::pow);
  EXPECT_EQ(d->exponent, -2);

  const auto e = ex::parse("1 + 2 * 3");
  ASSERT_EQ(e->op, Op::add);
  EXPECT_EQ(e->rhs->op, Op::mul);

  const auto f = ex::parse("  sin ( 2.5e-1 )\t");
  ASSERT_EQ(f->op, Op::call);
  EXPECT_EQ(f->lhs->value, 0.25);
  EXPECT_EQ(f->offset, 2u);
}

TEST(Parse, Errors) {
  struct Case {
    const char* text;
    std::size_t offset;
    const char* expected;
  };
  const Case cases[] = {
      {"sin(", 4, "number"},  {"1 +", 3, "'x'"},      {"2 * y", 4, "'eps'"},   {"x^2.5", 2, "integer"},
      {"x^", 2, "integer"},   {"(x", 2, "')'"},       {"sin x", 4, "'('"},     {"3 4", 2, "end of input"},
      {"1e999", 0, "number"}, {"x^(2)", 2, "integer"}, {"", 0, "'('"},        {"x $ 1", 2, "'+'"},
      {".", 0, "number"},     {"x^99999", 2, "integer"},
  };
  for (const auto& c : cases) {
    try {
      ex::parse(c.text);
      ADD_FAILURE() << c.text;
    } catch (const apgf::SyntaxError& e) {
      EXPECT_EQ(e.offset(), c.offset) << c.text << ": " << e.what();
      EXPECT_NE(std::find(e.expected().begin(), e.expected().end(), c.expected), e.expected().end()) << c.text;
    }
  }
}

TEST(Print, Format) {
  EXPECT_EQ(ex::print(ex::parse("eps^-2 * sin(x) + exp(i*sqrt(2)*x)")),
            "(((eps^-2) * sin(x)) + exp(((i * sqrt(2)) * x)))");
  EXPECT_EQ(ex::print(ex::parse("0.1")), "0.1");
  EXPECT_EQ(ex::print(ex::parse("1e-5")), "1e-05");
  EXPECT_EQ(ex::print(ex::parse("-x^2")), "(-(x^2))");
  EXPECT_THROW(ex::number(-1.0), apgf::InvalidInput);
  EXPECT_THROW(ex::number(std::nan("")), apgf::InvalidInput);
}

TEST(Print, RoundTripCorpus) {
  const auto all = corpus::all();
  EXPECT_GE(all.size(), 40u);
  for (const auto& s : all) {
    const auto a = ex::parse(s);
    const auto text = ex::print(a);
    const auto b = ex::parse(text);
    EXPECT_TRUE(ex::same(a, b)) << s << " -> " << text;
    EXPECT_EQ(ex::print(b), text);
  }
}

TEST(Print, RoundTripRandomTrees) {
  std::mt19937_64 rng(31);
  for (int c = 0; c < 500; ++c) {
    const auto a = random_tree(rng, 5);
    EXPECT_TRUE(ex::same(ex::parse(ex::print(a)), a)) << ex::print(a);
  }
}

TEST(Lower, Examples) {
  const auto g = EpsGrid::default_grid();
  const auto a = ex::lower("eps^-2 * sin(x) + exp(i*sqrt(2)*x)");
  ASSERT_TRUE(a.symbolic);
  const auto spec = apgf::gen_spectrum(*a.gen);
  ASSERT_EQ(spec.frequencies.size(), 3u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& s = a.net.slice(i);
    EXPECT_EQ(apgf::bohr_coefficient_exact(s, 1.0), complex(0.0, -0.5 / (g[i] * g[i])));
    EXPECT_EQ(apgf::bohr_coefficient_exact(s, -1.0), complex(0.0, 0.5 / (g[i] * g[i])));
    EXPECT_EQ(apgf::bohr_coefficient_exact(s, std::sqrt(2.0)), complex(1.0));
  }

  const auto b = ex::lower("sin(x)");
  ASSERT_TRUE(b.symbolic);
  EXPECT_EQ(b.net.slice(0), TrigPoly::normalize({{1.0, complex(0.0, -0.5)}, {-1.0, complex(0.0, 0.5)}}));

  const auto c = ex::lower("sin(x)^2");
  ASSERT_TRUE(c.symbolic);
  EXPECT_EQ(c.net.slice(3), TrigPoly::normalize({{0.0, 0.5}, {2.0, -0.25}, {-2.0, -0.25}}));

  const auto d = ex::lower("exp(sin(x))");
  EXPECT_FALSE(d.symbolic);
  EXPECT_EQ(d.declared_order, 8);
  EXPECT_EQ(d.net.max_order(), 8);
  EXPECT_THROW(d.net.evaluate(0, 1.0, 9), apgf::UnsupportedOrder);

  const auto e = ex::lower("sin(x/eps)");
  ASSERT_TRUE(e.symbolic);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(e.net.slice(i).max_abs_frequency(), 1.0 / g[i]);

  const auto z = ex::lower("sin(x) - sin(x)");
  ASSERT_TRUE(z.symbolic);
  for (const auto& s : z.net.slices()) EXPECT_EQ(s.size(), 0u);
}

TEST(Lower, Rejections) {
  for (const auto& s : corpus::kRejected) EXPECT_THROW(ex::lower(s), apgf::InvalidInput) << s;
  EXPECT_THROW(ex::lower("1/(eps - eps)"), apgf::InvalidInput);
  EXPECT_THROW(ex::lower("sin(x)/(1 + sin(x))"), apgf::InvalidInput);
}

TEST(Lower, FragmentMatchesCorpus) {
  for (const auto& s : corpus::kFragment) EXPECT_TRUE(ex::lower(s).symbolic) << s;
  for (const auto& s : corpus::kCallable) EXPECT_FALSE(ex::lower(s).symbolic) << s;
}

TEST(Lower, SymbolicAndCallableAgree) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> ux(-20.0, 20.0);
  const auto g = EpsGrid::default_grid();
  std::uniform_int_distribution<std::size_t> ui(0, g.size() - 1);
  for (const auto& s : corpus::kFragment) {
    const auto sym = ex::lower(s);
    const auto num = ex::lower(s, {g, true, 8});
    ASSERT_FALSE(num.symbolic);
    for (int p = 0; p < 50; ++p) {
      const std::size_t i = ui(rng);
      const double x = ux(rng);
      for (int k = 0; k <= 2; ++k) {
        const complex a = sym.net.evaluate(i, x, k), b = num.net.evaluate(i, x, k);
        EXPECT_LE(std::abs(a - b), 1e-9 * std::max(1.0, std::abs(a))) << s << " eps=" << g[i] << " x=" << x << " k=" << k;
      }
    }
  }
}

TEST(Lower, CallableMatchesDirectEvaluation) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> ux(-5.0, 5.0);
  const auto g = EpsGrid::geometric(3, 6);
  for (const auto& s : corpus::kCallable) {
    const auto ast = ex::parse(s);
    const auto l = ex::lower(ast, {g, false, 8});
    for (int p = 0; p < 10; ++p) {
      const std::size_t i = static_cast<std::size_t>(p) % g.size();
      const double x = ux(rng);
      const complex v = direct_eval(*ast, g[i], x);
      EXPECT_LE(std::abs(l.net.evaluate(i, x) - v), 1e-13 * std::max(1.0, std::abs(v))) << s;
      // derivatives against central differences of the order below
      for (int k = 1; k <= 3; ++k) {
        const double h = 1e-4 * g[i];
        auto f = [&](double t) { return l.net.evaluate(i, t, k - 1); };
        const complex fd = oracle::central_diff(f, x, h);
        EXPECT_LE(std::abs(l.net.evaluate(i, x, k) - fd), 1e-5 * std::max(1.0, std::abs(fd)) / (g[i] * g[i])) << s << " k=" << k;
      }
    }
  }
}

TEST(Lower, JetsOfHighOrder) {
  // d^8/dx^8 sin(2x) = 256 sin(2x), d^8 exp(i x) = exp(i x)
  const double x = 0.37;
  EXPECT_NEAR(std::abs(ex::evaluate(ex::parse("sin(2*x)"), 0.1, x, 8) - 256.0 * std::sin(2 * x)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(ex::evaluate(ex::parse("exp(i*x)"), 0.1, x, 8) - std::polar(1.0, x)), 0.0, 1e-13);
  // (1 + x^2)^(-1) at 0: derivatives 0, -2, 0, 24
  const auto r = ex::parse("(1 + x^2)^-1");
  EXPECT_NEAR(std::abs(ex::evaluate(r, 0.1, 0.0, 2) + 2.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(ex::evaluate(r, 0.1, 0.0, 4) - 24.0), 0.0, 1e-12);
  // sqrt(1 + x): third derivative 3/8 at 0
  EXPECT_NEAR(std::abs(ex::evaluate(ex::parse("sqrt(1 + x)"), 0.1, 0.0, 3) - 0.375), 0.0, 1e-14);
}

TEST(Lower, ScalarsAndTrigPolys) {
  const auto g = EpsGrid::geometric(3, 5);
  const auto s = ex::lower_scalar(ex::parse("1/eps + sqrt(2)"), g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(s[i], complex(1.0 / g[i] + std::sqrt(2.0)));
  EXPECT_THROW(ex::lower_scalar(ex::parse("x"), g), apgf::InvalidInput);

  const auto p = ex::as_trigpoly(ex::lower("5 + sin(x)"));
  EXPECT_EQ(apgf::mean_exact(p), complex(5.0));
  EXPECT_THROW(ex::as_trigpoly(ex::lower("eps*sin(x)")), apgf::InvalidInput);
  EXPECT_THROW(ex::as_trigpoly(ex::lower("exp(sin(x))")), apgf::InvalidInput);
}
