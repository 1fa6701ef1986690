/// \file expr.hpp
/// A small expression language for eps-dependent functions of x.
///
///   expr  := term (('+' | '-') term)*
///   term  := unary (('*' | '/') unary)*
///   unary := '-' unary | power
///   power := base ('^' ['-'] digits)?
///   base  := number | 'i' | 'x' | 'eps' | func '(' expr ')' | '(' expr ')'
///   func  := 'sin' | 'cos' | 'exp' | 'sqrt'
///
/// so -x^2 is -(x^2). Expressions in the exponential-polynomial fragment
/// lower to a symbolic GenTrigPoly; the rest lower to a callable net whose
/// derivatives come from Taylor jets.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "apgf/analysis.hpp"
#include "apgf/error.hpp"

namespace apgf::expr {

enum class Op { number, imag, x, eps, neg, add, sub, mul, div, pow, call };
enum class Func { sin, cos, exp, sqrt };

inline const char* to_string(Func f) {
  switch (f) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::exp: return "exp";
    default: return "sqrt";
  }
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::number;
  double value = 0.0;  // number literal, finite and >= 0
  int exponent = 0;
  Func func = Func::sin;
  NodePtr lhs, rhs;
  std::size_t offset = 0;  // byte offset in the source, 0 for built nodes
};

inline NodePtr leaf(Op op, std::size_t offset = 0) { return std::make_shared<const Node>(Node{op, 0.0, 0, Func::sin, {}, {}, offset}); }

inline NodePtr number(double v, std::size_t offset = 0) {
  if (!std::isfinite(v) || v < 0.0 || std::signbit(v)) throw InvalidInput("expression: number literals are finite and nonnegative");
  return std::make_shared<const Node>(Node{Op::number, v, 0, Func::sin, {}, {}, offset});
}

inline NodePtr unary(Op op, NodePtr a, std::size_t offset = 0) {
  return std::make_shared<const Node>(Node{op, 0.0, 0, Func::sin, std::move(a), {}, offset});
}

inline NodePtr binary(Op op, NodePtr a, NodePtr b, std::size_t offset = 0) {
  return std::make_shared<const Node>(Node{op, 0.0, 0, Func::sin, std::move(a), std::move(b), offset});
}

inline NodePtr power(NodePtr a, int n, std::size_t offset = 0) {
  return std::make_shared<const Node>(Node{Op::pow, 0.0, n, Func::sin, std::move(a), {}, offset});
}

inline NodePtr call(Func f, NodePtr a, std::size_t offset = 0) {
  return std::make_shared<const Node>(Node{Op::call, 0.0, 0, f, std::move(a), {}, offset});
}

/// Structural equality; source offsets are ignored.
inline bool same(const NodePtr& a, const NodePtr& b) {
  if (!a || !b) return !a && !b;
  if (a->op != b->op) return false;
  switch (a->op) {
    case Op::number: return a->value == b->value;
    case Op::pow: return a->exponent == b->exponent && same(a->lhs, b->lhs);
    case Op::call: return a->func == b->func && same(a->lhs, b->lhs);
    default: return same(a->lhs, b->lhs) && same(a->rhs, b->rhs);
  }
}

inline bool contains_x(const NodePtr& n) {
  if (!n) return false;
  return n->op == Op::x || contains_x(n->lhs) || contains_x(n->rhs);
}

inline std::size_t node_count(const NodePtr& n) { return n ? 1 + node_count(n->lhs) + node_count(n->rhs) : 0; }

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

/// Fully parenthesized; parse(print(e)) is structurally equal to e.
inline std::string print(const NodePtr& n) {
  switch (n->op) {
    case Op::number: return format_double(n->value);
    case Op::imag: return "i";
    case Op::x: return "x";
    case Op::eps: return "eps";
    case Op::neg: return "(-" + print(n->lhs) + ")";
    case Op::pow: return "(" + print(n->lhs) + "^" + std::to_string(n->exponent) + ")";
    case Op::call: return std::string(to_string(n->func)) + "(" + print(n->lhs) + ")";
    default: break;
  }
  const char* sym = n->op == Op::add ? " + " : n->op == Op::sub ? " - " : n->op == Op::mul ? " * " : " / ";
  return "(" + print(n->lhs) + sym + print(n->rhs) + ")";
}

inline constexpr int kMaxExponent = 1000;

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse() {
    auto e = expr();
    skip();
    if (pos_ != s_.size()) fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"}, "unexpected input");
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  static std::vector<std::string> operand() {
    return {"number", "'x'", "'eps'", "'i'", "'sin'", "'cos'", "'exp'", "'sqrt'", "'('", "'-'"};
  }

  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& msg) const {
    throw SyntaxError(pos_, std::move(expected), msg);
  }

  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static bool digit(char c) { return c >= '0' && c <= '9'; }
  static bool alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      skip();
      const std::size_t at = pos_;
      if (eat('+'))
        lhs = binary(Op::add, lhs, term(), at);
      else if (eat('-'))
        lhs = binary(Op::sub, lhs, term(), at);
      else
        return lhs;
    }
  }

  NodePtr term() {
    auto lhs = unary_();
    for (;;) {
      skip();
      const std::size_t at = pos_;
      if (eat('*'))
        lhs = binary(Op::mul, lhs, unary_(), at);
      else if (eat('/'))
        lhs = binary(Op::div, lhs, unary_(), at);
      else
        return lhs;
    }
  }

  NodePtr unary_() {
    skip();
    const std::size_t at = pos_;
    if (eat('-')) return unary(Op::neg, unary_(), at);
    return power_();
  }

  NodePtr power_() {
    auto b = base();
    skip();
    const std::size_t at = pos_;
    if (!eat('^')) return b;
    skip();
    const std::size_t start = pos_;
    bool negative = false;
    if (pos_ < s_.size() && s_[pos_] == '-') {
      negative = true;
      ++pos_;
    }
    const std::size_t digits = pos_;
    while (pos_ < s_.size() && digit(s_[pos_])) ++pos_;
    if (pos_ == digits) {
      pos_ = digits;
      fail({"integer"}, "exponent must be an integer literal");
    }
    if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E')) {
      pos_ = start;
      fail({"integer"}, "non-integer exponent");
    }
    int n = 0;
    auto [p, ec] = std::from_chars(s_.data() + digits, s_.data() + pos_, n);
    if (ec != std::errc{} || n > kMaxExponent) {
      pos_ = start;
      fail({"integer"}, "exponent out of range");
    }
    return power(b, negative ? -n : n, at);
  }

  NodePtr base() {
    skip();
    const std::size_t at = pos_;
    if (pos_ >= s_.size()) fail(operand(), "unexpected end of input");
    const char c = s_[pos_];
    if (digit(c) || c == '.') return number_();
    if (alpha(c)) {
      while (pos_ < s_.size() && (alpha(s_[pos_]) || digit(s_[pos_]))) ++pos_;
      const std::string_view id = s_.substr(at, pos_ - at);
      if (id == "x") return leaf(Op::x, at);
      if (id == "eps") return leaf(Op::eps, at);
      if (id == "i") return leaf(Op::imag, at);
      std::optional<Func> f;
      if (id == "sin") f = Func::sin;
      if (id == "cos") f = Func::cos;
      if (id == "exp") f = Func::exp;
      if (id == "sqrt") f = Func::sqrt;
      if (!f) {
        pos_ = at;
        fail(operand(), "unknown identifier '" + std::string(id) + "'");
      }
      if (!eat('(')) fail({"'('"}, std::string("expected '(' after ") + to_string(*f));
      auto arg = expr();
      if (!eat(')')) fail({"')'", "'+'", "'-'", "'*'", "'/'"}, "expected ')'");
      return call(*f, arg, at);
    }
    if (c == '(') {
      ++pos_;
      auto e = expr();
      if (!eat(')')) fail({"')'", "'+'", "'-'", "'*'", "'/'"}, "expected ')'");
      return e;
    }
    fail(operand(), "unexpected character");
  }

  NodePtr number_() {
    const std::size_t at = pos_;
    while (pos_ < s_.size() && digit(s_[pos_])) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && digit(s_[pos_])) ++pos_;
    }
    if (pos_ - at == 1 && s_[at] == '.') {
      pos_ = at;
      fail({"number"}, "malformed number");
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) ++q;
      if (q < s_.size() && digit(s_[q])) {
        pos_ = q;
        while (pos_ < s_.size() && digit(s_[pos_])) ++pos_;
      }
    }
    double v = 0.0;
    std::string text(s_.substr(at, pos_ - at));
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(v)) {
      pos_ = at;
      fail({"number"}, "number out of range");
    }
    return number(v, at);
  }
};

}  // namespace detail

inline NodePtr parse(std::string_view text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Taylor jets: truncated power series in x, used for callable nets.

namespace detail {

using Jet = std::vector<complex>;

inline Jet jet_mul(const Jet& a, const Jet& b) {
  Jet r(a.size());
  for (std::size_t n = 0; n < a.size(); ++n)
    for (std::size_t j = 0; j <= n; ++j) r[n] += a[j] * b[n - j];
  return r;
}

inline Jet jet_div(const Jet& a, const Jet& b) {
  if (b[0] == complex{}) throw InvalidInput("expression: division by zero");
  Jet q(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    complex s = a[n];
    for (std::size_t j = 1; j <= n; ++j) s -= b[j] * q[n - j];
    q[n] = s / b[0];
  }
  return q;
}

inline Jet jet_pow(Jet a, int n) {
  Jet r(a.size());
  r[0] = 1.0;
  const bool inv = n < 0;
  unsigned m = static_cast<unsigned>(inv ? -n : n);
  while (m) {
    if (m & 1u) r = jet_mul(r, a);
    m >>= 1u;
    if (m) a = jet_mul(a, a);
  }
  if (!inv) return r;
  Jet one(a.size());
  one[0] = 1.0;
  return jet_div(one, r);
}

inline Jet jet_call(Func f, const Jet& a) {
  const std::size_t K = a.size();
  Jet r(K);
  if (f == Func::exp) {
    r[0] = std::exp(a[0]);
    for (std::size_t n = 1; n < K; ++n) {
      complex s{};
      for (std::size_t j = 1; j <= n; ++j) s += static_cast<double>(j) * a[j] * r[n - j];
      r[n] = s / static_cast<double>(n);
    }
    return r;
  }
  if (f == Func::sqrt) {
    r[0] = std::sqrt(a[0]);
    if (K > 1 && r[0] == complex{}) throw InvalidInput("expression: sqrt is not differentiable at 0");
    for (std::size_t n = 1; n < K; ++n) {
      complex s = a[n];
      for (std::size_t j = 1; j < n; ++j) s -= r[j] * r[n - j];
      r[n] = s / (2.0 * r[0]);
    }
    return r;
  }
  Jet s(K), c(K);
  s[0] = std::sin(a[0]);
  c[0] = std::cos(a[0]);
  for (std::size_t n = 1; n < K; ++n) {
    complex ss{}, cc{};
    for (std::size_t j = 1; j <= n; ++j) {
      ss += static_cast<double>(j) * a[j] * c[n - j];
      cc -= static_cast<double>(j) * a[j] * s[n - j];
    }
    s[n] = ss / static_cast<double>(n);
    c[n] = cc / static_cast<double>(n);
  }
  return f == Func::sin ? s : c;
}

inline Jet jet(const Node& n, double eps, double x, std::size_t K) {
  Jet r(K);
  switch (n.op) {
    case Op::number: r[0] = n.value; return r;
    case Op::imag: r[0] = complex{0.0, 1.0}; return r;
    case Op::eps: r[0] = eps; return r;
    case Op::x:
      r[0] = x;
      if (K > 1) r[1] = 1.0;
      return r;
    case Op::neg:
      r = jet(*n.lhs, eps, x, K);
      for (auto& v : r) v = -v;
      return r;
    case Op::pow: return jet_pow(jet(*n.lhs, eps, x, K), n.exponent);
    case Op::call: return jet_call(n.func, jet(*n.lhs, eps, x, K));
    default: break;
  }
  const Jet a = jet(*n.lhs, eps, x, K), b = jet(*n.rhs, eps, x, K);
  switch (n.op) {
    case Op::add:
      for (std::size_t k = 0; k < K; ++k) r[k] = a[k] + b[k];
      return r;
    case Op::sub:
      for (std::size_t k = 0; k < K; ++k) r[k] = a[k] - b[k];
      return r;
    case Op::mul: return jet_mul(a, b);
    default: return jet_div(a, b);
  }
}

}  // namespace detail

/// k-th x-derivative of the expression at (eps, x).
inline complex evaluate(const NodePtr& e, double eps, double x, int k = 0) {
  if (k < 0) throw UnsupportedOrder("expression: negative derivative order");
  const auto j = detail::jet(*e, eps, x, static_cast<std::size_t>(k) + 1);
  double fact = 1.0;
  for (int m = 2; m <= k; ++m) fact *= m;
  return fact * j[static_cast<std::size_t>(k)];
}

// ---------------------------------------------------------------------------
// Lowering

struct LowerOptions {
  EpsGrid grid = EpsGrid::default_grid();
  bool force_callable = false;
  int callable_order = 8;
};

struct Lowered {
  GeneralizedFunction net = GeneralizedFunction::zero();
  bool symbolic = false;
  std::optional<GenTrigPoly> gen;
  int declared_order = 0;
  std::vector<std::string> notes;
};

namespace detail {

struct Scalar {
  GeneralizedScalar v;
};
struct Affine {  // a x + b
  GeneralizedScalar a, b;
};
struct Poly {
  GenTrigPoly p;
};
struct Opaque {
  std::vector<double> hint;
};
using Value = std::variant<Scalar, Affine, Poly, Opaque>;

inline const char* kNotAp = "x occurs outside the argument of sin, cos or exp, so the expression is not almost periodic";

class Lowerer {
 public:
  explicit Lowerer(EpsGrid g) : g_(std::move(g)) {}

  Value lower(const Node& n) {
    switch (n.op) {
      case Op::number: return Scalar{cst(n.value)};
      case Op::imag: return Scalar{cst(complex{0.0, 1.0})};
      case Op::eps: return Scalar{GeneralizedScalar::from(g_, [](double e) { return complex{e, 0.0}; })};
      case Op::x: return Affine{cst(1.0), cst(0.0)};
      case Op::neg: return scale(lower(*n.lhs), -1.0);
      case Op::add: return add(lower(*n.lhs), lower(*n.rhs));
      case Op::sub: return add(lower(*n.lhs), scale(lower(*n.rhs), -1.0));
      case Op::mul: return mul(lower(*n.lhs), lower(*n.rhs));
      case Op::div: {
        auto d = lower(*n.rhs);
        if (!std::holds_alternative<Scalar>(d)) throw InvalidInput("expression: division by an expression containing x");
        return mul(lower(*n.lhs), Scalar{inverse(std::get<Scalar>(d).v)});
      }
      case Op::pow: return pow(lower(*n.lhs), n.exponent);
      case Op::call: return apply(n.func, lower(*n.lhs));
    }
    throw InvalidInput("expression: malformed tree");
  }

  GeneralizedScalar cst(complex c) const { return GeneralizedScalar::constant(g_, c); }

  GenTrigPoly poly(const Scalar& s) const { return GenTrigPoly({{cst(0.0), s.v}}); }

  std::vector<double> hint(const Value& v) const {
    std::vector<double> h(g_.size(), 0.0);
    if (auto* p = std::get_if<Poly>(&v)) {
      for (const auto& t : p->p.terms())
        for (std::size_t i = 0; i < g_.size(); ++i) h[i] = std::max(h[i], std::abs(t.frequency[i].real()));
    } else if (auto* o = std::get_if<Opaque>(&v)) {
      h = o->hint;
    }
    return h;
  }

  static GenTrigPoly prune(const GenTrigPoly& p) {
    std::vector<GenTerm> t;
    for (const auto& x : p.terms()) {
      const auto& c = x.coefficient.values();
      if (std::any_of(c.begin(), c.end(), [](complex z) { return z != complex{}; })) t.push_back(x);
    }
    return GenTrigPoly(std::move(t));
  }

 private:
  EpsGrid g_;

  GeneralizedScalar inverse(const GeneralizedScalar& s) const {
    std::vector<complex> v;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == complex{}) throw InvalidInput("expression: division by zero at eps=" + format_double(g_[i]));
      v.push_back(1.0 / s[i]);
    }
    return GeneralizedScalar(g_, std::move(v));
  }

  template <class F>
  GeneralizedScalar map(const GeneralizedScalar& s, F f) const {
    std::vector<complex> v;
    for (std::size_t i = 0; i < s.size(); ++i) v.push_back(f(s[i]));
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!is_finite(v[i])) throw InvalidInput("expression: non-finite value at eps=" + format_double(g_[i]));
    return GeneralizedScalar(g_, std::move(v));
  }

  static std::optional<Scalar> as_scalar(const Poly& p) {
    std::optional<GeneralizedScalar> s;
    for (const auto& t : p.p.terms()) {
      const auto& f = t.frequency.values();
      if (std::any_of(f.begin(), f.end(), [](complex z) { return z != complex{}; })) return std::nullopt;
      s = s ? *s + t.coefficient : t.coefficient;
    }
    if (!s) return std::nullopt;
    return Scalar{*s};
  }

  Value scale(const Value& v, complex c) {
    if (auto* s = std::get_if<Scalar>(&v)) return Scalar{c * s->v};
    if (auto* a = std::get_if<Affine>(&v)) return Affine{c * a->a, c * a->b};
    if (auto* p = std::get_if<Poly>(&v)) return Poly{gen_scale(p->p, cst(c))};
    return v;
  }

  Value add(const Value& u, const Value& v) {
    if (auto* s = std::get_if<Scalar>(&u)) {
      if (auto* t = std::get_if<Scalar>(&v)) return Scalar{s->v + t->v};
      if (auto* a = std::get_if<Affine>(&v)) return Affine{a->a, a->b + s->v};
      if (auto* p = std::get_if<Poly>(&v)) return Poly{gen_add(poly(*s), p->p)};
      return v;
    }
    if (auto* a = std::get_if<Affine>(&u)) {
      if (auto* b = std::get_if<Affine>(&v)) return Affine{a->a + b->a, a->b + b->b};
      if (std::holds_alternative<Scalar>(v)) return add(v, u);
      throw InvalidInput(std::string("expression: ") + kNotAp);
    }
    if (std::holds_alternative<Scalar>(v) || std::holds_alternative<Affine>(v)) return add(v, u);
    if (auto* p = std::get_if<Poly>(&u))
      if (auto* q = std::get_if<Poly>(&v)) return Poly{gen_add(p->p, q->p)};
    auto h = hint(u), k = hint(v);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::max(h[i], k[i]);
    return Opaque{h};
  }

  Value mul(const Value& u, const Value& v) {
    if (auto* s = std::get_if<Scalar>(&u)) {
      if (auto* t = std::get_if<Scalar>(&v)) return Scalar{s->v * t->v};
      if (auto* a = std::get_if<Affine>(&v)) return Affine{s->v * a->a, s->v * a->b};
      if (auto* p = std::get_if<Poly>(&v)) return Poly{gen_scale(p->p, s->v)};
      return v;
    }
    if (std::holds_alternative<Scalar>(v)) return mul(v, u);
    if (std::holds_alternative<Affine>(u) || std::holds_alternative<Affine>(v))
      throw InvalidInput(std::string("expression: ") + kNotAp);
    if (auto* p = std::get_if<Poly>(&u))
      if (auto* q = std::get_if<Poly>(&v)) return Poly{gen_mul(p->p, q->p)};
    auto h = hint(u), k = hint(v);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += k[i];
    return Opaque{h};
  }

  Value pow(const Value& v, int n) {
    if (auto* s = std::get_if<Scalar>(&v)) {
      return Scalar{map(s->v, [n](complex z) {
        complex r{1.0, 0.0}, b = z;
        unsigned m = static_cast<unsigned>(n < 0 ? -n : n);
        while (m) {
          if (m & 1u) r *= b;
          m >>= 1u;
          if (m) b *= b;
        }
        return n < 0 ? 1.0 / r : r;
      })};
    }
    if (n < 0) throw InvalidInput("expression: division by an expression containing x");
    if (n == 0) return Scalar{cst(1.0)};
    if (std::holds_alternative<Affine>(v)) {
      if (n == 1) return v;
      throw InvalidInput(std::string("expression: ") + kNotAp);
    }
    if (auto* p = std::get_if<Poly>(&v)) {
      GenTrigPoly r = poly(Scalar{cst(1.0)}), b = p->p;
      unsigned m = static_cast<unsigned>(n);
      while (m) {
        if (m & 1u) r = prune(gen_mul(r, b));
        m >>= 1u;
        if (m) b = prune(gen_mul(b, b));
      }
      return Poly{r};
    }
    auto h = hint(v);
    for (auto& x : h) x *= n;
    return Opaque{h};
  }

  Value apply(Func f, const Value& v) {
    if (auto* s = std::get_if<Scalar>(&v)) {
      return Scalar{map(s->v, [f](complex z) {
        switch (f) {
          case Func::sin: return std::sin(z);
          case Func::cos: return std::cos(z);
          case Func::exp: return std::exp(z);
          default: return std::sqrt(z);
        }
      })};
    }
    if (auto* a = std::get_if<Affine>(&v)) {
      if (f == Func::sqrt) throw InvalidInput(std::string("expression: ") + kNotAp);
      const complex I{0.0, 1.0};
      if (f == Func::exp) {
        for (const auto& z : a->a.values())
          if (z.real() != 0.0)
            throw InvalidInput("expression: exp of a non-imaginary multiple of x grows exponentially, so it is not almost periodic");
        const auto lam = map(a->a, [](complex z) { return complex{z.imag(), 0.0}; });
        return Poly{GenTrigPoly({{lam, map(a->b, [](complex z) { return std::exp(z); })}})};
      }
      if (!a->a.is_real())
        throw InvalidInput(std::string("expression: ") + to_string(f) +
                           " of a complex multiple of x is unbounded, so it is not almost periodic");
      const auto up = map(a->b, [I](complex z) { return std::exp(I * z); });
      const auto down = map(a->b, [I](complex z) { return std::exp(-I * z); });
      const complex cu = f == Func::sin ? 1.0 / (2.0 * I) : complex{0.5, 0.0};
      const complex cd = f == Func::sin ? -1.0 / (2.0 * I) : complex{0.5, 0.0};
      return Poly{GenTrigPoly({{a->a, cu * up}, {-1.0 * a->a, cd * down}})};
    }
    if (auto* p = std::get_if<Poly>(&v)) {
      if (auto s = as_scalar(*p)) return apply(f, *s);
      auto h = hint(v);
      std::vector<double> amp(g_.size(), 0.0);
      for (const auto& t : p->p.terms())
        for (std::size_t i = 0; i < g_.size(); ++i) amp[i] += std::abs(t.coefficient[i]);
      for (std::size_t i = 0; i < h.size(); ++i) h[i] *= std::max(1.0, amp[i]);
      return Opaque{h};
    }
    return v;
  }
};

}  // namespace detail

/// Lower an expression to a net on `opt.grid`.
inline Lowered lower(const NodePtr& e, const LowerOptions& opt = {}) {
  detail::Lowerer L(opt.grid);
  const auto v = L.lower(*e);
  if (std::holds_alternative<detail::Affine>(v)) throw InvalidInput(std::string("expression: ") + detail::kNotAp);
  Lowered r;
  std::optional<GenTrigPoly> gen;
  if (auto* s = std::get_if<detail::Scalar>(&v)) gen = detail::Lowerer::prune(L.poly(*s));
  if (auto* p = std::get_if<detail::Poly>(&v)) gen = detail::Lowerer::prune(p->p);

  if (gen && !opt.force_callable) {
    r.symbolic = true;
    r.declared_order = kUnboundedOrder;
    r.net = gen->terms().empty() ? GeneralizedFunction::zero(opt.grid) : gen->realize();
    r.gen = std::move(gen);
    return r;
  }
  if (!gen) r.notes.push_back("outside the exponential-polynomial fragment: lowered to a callable net");
  auto h = L.hint(v);
  const EpsGrid g = opt.grid;
  auto hint = std::make_shared<const std::vector<double>>(std::move(h));
  const int order = opt.callable_order;
  r.symbolic = false;
  r.declared_order = order;
  r.net = GeneralizedFunction::callable(
      g, [e](double eps, double x, int k) { return evaluate(e, eps, x, k); }, order,
      [hint, g](double eps) {
        auto i = g.index_of(eps);
        const double f = i ? (*hint)[*i] : *std::max_element(hint->begin(), hint->end());
        return std::max(f, 1e-6);
      });
  return r;
}

inline Lowered lower(std::string_view text, const LowerOptions& opt = {}) { return lower(parse(text), opt); }

/// An x-free expression as a scalar net.
inline GeneralizedScalar lower_scalar(const NodePtr& e, const EpsGrid& grid) {
  if (contains_x(e)) throw InvalidInput("expression: a scalar must not depend on x");
  detail::Lowerer L(grid);
  return std::get<detail::Scalar>(L.lower(*e)).v;
}

/// An eps-independent symbolic expression as a single trigonometric polynomial.
inline TrigPoly as_trigpoly(const Lowered& l) {
  if (!l.symbolic) throw InvalidInput("expression: a trigonometric polynomial in x is required");
  const auto& s = l.net.slices();
  for (const auto& p : s)
    if (!(p == s.front())) throw InvalidInput("expression: must not depend on eps here");
  return s.front();
}

}  // namespace apgf::expr
