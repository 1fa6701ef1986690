/// \file cli.hpp
/// Command-line driver: `run` parses arguments, executes one analysis and
/// writes a report. Exit codes: 0 success, 1 analysis inconclusive, 2 input
/// error.

#pragma once

#include "CLI11.hpp"

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "apgf/analysis.hpp"
#include "apgf/distribution.hpp"
#include "apgf/expr.hpp"
#include "apgf/mollifier.hpp"
#include "apgf/report.hpp"

namespace apgf::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kSchema = "apgf.report/1";
inline constexpr const char* kErrorSchema = "apgf.error/1";
inline constexpr std::uint64_t kDefaultSeed = 20240611;

enum ExitCode { ok = 0, inconclusive = 1, input_error = 2 };

using report::json;

/// "A:B" for the geometric grid 2^-A..2^-B, or a comma list of eps values.
inline EpsGrid parse_grid(std::string_view text) {
  auto num = [](std::string_view s, auto& v) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw InvalidInput("grid: bad number '" + std::string(s) + "'");
  };
  if (auto c = text.find(':'); c != std::string_view::npos) {
    int a = 0, b = 0;
    num(text.substr(0, c), a);
    num(text.substr(c + 1), b);
    return EpsGrid::geometric(a, b);
  }
  std::vector<double> v;
  std::size_t start = 0;
  for (;;) {
    const auto c = text.find(',', start);
    double e = 0.0;
    num(text.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start), e);
    v.push_back(e);
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return EpsGrid(std::move(v));
}

inline std::pair<double, double> parse_range(std::string_view text) {
  const auto c = text.find(',');
  if (c == std::string_view::npos) throw InvalidInput("range: expected lo,hi");
  double lo = 0.0, hi = 0.0;
  auto a = std::from_chars(text.data(), text.data() + c, lo);
  auto b = std::from_chars(text.data() + c + 1, text.data() + text.size(), hi);
  if (a.ec != std::errc{} || a.ptr != text.data() + c || b.ec != std::errc{} || b.ptr != text.data() + text.size())
    throw InvalidInput("range: bad number in '" + std::string(text) + "'");
  return {lo, hi};
}

/// "gaussian" or "exponential", optionally followed by ":amplitude,center,width".
inline Profile parse_profile(std::string_view text) {
  const auto c = text.find(':');
  const auto kind = text.substr(0, c);
  double p[3] = {1.0, 0.0, 1.0};
  if (c != std::string_view::npos) {
    std::size_t start = c + 1;
    for (int k = 0; k < 3; ++k) {
      const auto e = text.find(',', start);
      const auto part = text.substr(start, e == std::string_view::npos ? std::string_view::npos : e - start);
      auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), p[k]);
      if (ec != std::errc{} || ptr != part.data() + part.size())
        throw InvalidInput("profile: bad number '" + std::string(part) + "'");
      if (e == std::string_view::npos) {
        if (k != 2) throw InvalidInput("profile: expected amplitude,center,width");
        break;
      }
      if (k == 2) throw InvalidInput("profile: too many parameters");
      start = e + 1;
    }
  }
  if (kind == "gaussian") return Profile::gaussian(p[0], p[1], p[2]);
  if (kind == "exponential") return Profile::exponential(p[0], p[1], p[2]);
  throw InvalidInput("profile: unknown kind '" + std::string(kind) + "'");
}

struct Settings {
  std::string grid;
  double window = 1e4;
  double mesh = 0.0;
  int kmax = 2;
  int mmax = 8;
  std::string out = "json";
  std::uint64_t seed = kDefaultSeed;

  // command options
  std::vector<std::string> exprs;
  std::string lambda = "1";
  std::string averaging = "cesaro";
  std::string range = "-5,5";
  double step = 0.1;
  double threshold = 1e-3;
  std::string mollifier = "gaussian:3";
  int derivative = 0;
  std::string profile = "gaussian";
  std::string path = "auto";
  double x0 = 0.0;
  double base_window = 64.0;
  int levels = 6;
  std::string poly;
  double delta = 0.1;
  double search = 100.0;
  double probe = 10.0;
  double scan_step = 0.0;
  double eps = 0.0;
  int cases = 100;
  bool callable = false;
};

struct Report {
  json input = json::object();
  json options = json::object();
  json results = json::object();
  std::vector<std::string> caveats;
  report::Table table;
  int exit_code = ok;
};

namespace detail {

struct Context {
  Settings s;
  EpsGrid grid;
  ClassifyOptions copt;

  expr::Lowered lower(Report& r, const std::string& text) const {
    auto ast = expr::parse(text);
    expr::LowerOptions lo;
    lo.grid = grid;
    lo.force_callable = s.callable;
    auto l = expr::lower(ast, lo);
    if (s.mesh > 0.0) {
      SupConfig c = l.net.sup_config();
      c.mesh = s.mesh;
      l.net = l.net.with_sup_config(c);
    }
    r.input["expressions"].push_back(text);
    r.input["parsed"].push_back(expr::print(ast));
    r.input["lowering"].push_back(l.symbolic ? "symbolic" : "callable");
    for (const auto& n : l.notes) r.caveats.push_back(n);
    return l;
  }

  expr::Lowered lower_one(Report& r) const {
    if (s.exprs.size() != 1) throw InvalidInput("expected exactly one expression");
    return lower(r, s.exprs[0]);
  }
};

inline void flag_unknown(Report& r, const Classification& c) {
  for (const auto& cv : c.caveats) r.caveats.push_back(cv);
  if (c.verdict == Verdict::unknown) r.exit_code = inconclusive;
}

inline Report cmd_classify(const Context& ctx) {
  Report r;
  const auto l = ctx.lower_one(r);
  const auto c = classify(l.net, ctx.copt);
  r.results["declared_order"] = l.symbolic ? json(nullptr) : json(l.declared_order);
  r.results["classification"] = report::classification_json(c);
  r.table = report::seminorm_table(c);
  flag_unknown(r, c);
  return r;
}

inline Report cmd_equal(const Context& ctx) {
  Report r;
  if (ctx.s.exprs.size() != 2) throw InvalidInput("equal: expected two expressions");
  const auto a = ctx.lower(r, ctx.s.exprs[0]);
  const auto b = ctx.lower(r, ctx.s.exprs[1]);
  const auto e = gf_equal(a.net, b.net, ctx.copt);
  r.results["equal"] = e.equal;
  r.results["difference"] = report::classification_json(e.difference);
  r.table = report::seminorm_table(e.difference);
  flag_unknown(r, e.difference);
  return r;
}

inline Averaging parse_averaging(const std::string& a) {
  if (a == "plain") return Averaging::plain;
  if (a == "cesaro") return Averaging::cesaro;
  throw InvalidInput("averaging: expected plain or cesaro");
}

inline void mean_results(Report& r, const GeneralizedMean& m) {
  r.results["value"] = report::scalar_json(m.value);
  r.results["exact"] = m.exact;
  json b = json::array();
  for (const auto& x : m.error_bounds) b.push_back(x ? json(*x) : json(nullptr));
  r.results["error_bounds"] = std::move(b);
  r.results["classification"] = report::classification_json(m.classification);
  r.table = report::Table({"eps", "re", "im"});
  for (std::size_t i = 0; i < m.value.size(); ++i) r.table.add({m.value.grid()[i], m.value[i].real(), m.value[i].imag()});
  flag_unknown(r, m.classification);
}

inline Report cmd_mean(const Context& ctx) {
  Report r;
  const auto l = ctx.lower_one(r);
  r.options["averaging"] = ctx.s.averaging;
  mean_results(r, generalized_mean(l.net, {ctx.s.window, parse_averaging(ctx.s.averaging), ctx.copt}));
  return r;
}

inline Report cmd_bohr(const Context& ctx) {
  Report r;
  const auto l = ctx.lower_one(r);
  const auto lam_ast = expr::parse(ctx.s.lambda);
  const auto lam = expr::lower_scalar(lam_ast, ctx.grid);
  r.options["lambda"] = expr::print(lam_ast);
  r.options["averaging"] = ctx.s.averaging;
  r.results["lambda"] = report::scalar_json(lam);
  mean_results(r, bohr_transform(l.net, lam, {ctx.s.window, parse_averaging(ctx.s.averaging), ctx.copt}));
  return r;
}

inline Report cmd_spectrum(const Context& ctx) {
  Report r;
  const auto l = ctx.lower_one(r);
  SpectrumOptions o;
  std::tie(o.lo, o.hi) = parse_range(ctx.s.range);
  o.step = ctx.s.step;
  o.threshold = ctx.s.threshold;
  o.window = ctx.s.window;
  o.classify = ctx.copt;
  r.options["range"] = {o.lo, o.hi};
  r.options["step"] = o.step;
  r.options["threshold"] = o.threshold;
  const auto sc = spectrum_scan(l.net, o);
  json peaks = json::array();
  r.table = report::Table({"frequency", "re", "im", "verdict"});
  for (const auto& p : sc.peaks) {
    peaks.push_back({{"frequency", p.frequency},
                     {"reference_value", report::complex_json(p.reference_value)},
                     {"coefficient", report::scalar_json(p.coefficient)},
                     {"classification", report::classification_json(p.classification)}});
    r.table.add({p.frequency, p.reference_value.real(), p.reference_value.imag(), to_string(p.classification.verdict)});
    if (p.classification.verdict == Verdict::unknown) r.exit_code = inconclusive;
  }
  r.results["reference_eps"] = sc.reference_eps;
  r.results["coarse_window"] = sc.coarse_window;
  r.results["window"] = sc.window;
  r.results["peaks"] = std::move(peaks);
  if (l.gen) {
    const auto g = gen_spectrum(*l.gen, ctx.copt);
    json f = json::array();
    for (const auto& s : g.frequencies) f.push_back(report::scalar_json(s));
    r.results["exact_spectrum"] = {{"frequencies", std::move(f)}, {"notes", g.notes}};
  }
  for (const auto& w : sc.warnings) r.caveats.push_back(w);
  return r;
}

inline Report cmd_embed(const Context& ctx) {
  Report r;
  const auto l = ctx.lower_one(r);
  const auto f = expr::as_trigpoly(l);
  const auto rho = parse_mollifier(ctx.s.mollifier);
  if (ctx.s.derivative < 0) throw InvalidInput("embed: negative derivative order");
  r.options["mollifier"] = rho.describe();
  r.options["derivative"] = ctx.s.derivative;
  const ApDistribution t({{ctx.s.derivative, f}});
  auto u = embed_iap(t, rho, ctx.grid);
  if (ctx.s.mesh > 0.0) u = u.with_sup_config({0.0, ctx.s.mesh, 20000, true});
  const auto c = classify(u, ctx.copt);
  r.results["certified_decay_order"] = rho.diagram_decay_order();
  r.results["net"] = report::net_json(u);
  r.results["classification"] = report::classification_json(c);
  r.table = report::seminorm_table(c);
  flag_unknown(r, c);
  return r;
}

inline Report cmd_diagram(const Context& ctx) {
  Report r;
  const auto l = ctx.lower_one(r);
  const auto f = expr::as_trigpoly(l);
  const auto rho = parse_mollifier(ctx.s.mollifier);
  r.options["mollifier"] = rho.describe();
  const auto d = diagram_defect(f, rho, ctx.grid, ctx.copt);
  r.results["exact_zero_below"] = d.exact_zero_below ? json(*d.exact_zero_below) : json(nullptr);
  r.results["certified_order"] = d.certified_order;
  r.results["classification"] = report::classification_json(d.classification);
  r.table = report::Table({"eps", "defect_sup"});
  const auto& sups = d.classification.orders.front().values;
  for (std::size_t i = 0; i < sups.size(); ++i) r.table.add({ctx.grid[i], sups[i]});
  flag_unknown(r, d.classification);
  return r;
}

inline Report cmd_convolve(const Context& ctx) {
  Report r;
  const auto l = ctx.lower_one(r);
  const auto prof = parse_profile(ctx.s.profile);
  if (ctx.s.derivative < 0) throw InvalidInput("convolve: negative derivative order");
  ConvolvePath path = ConvolvePath::automatic;
  if (ctx.s.path == "symbolic") path = ConvolvePath::symbolic;
  else if (ctx.s.path == "quadrature") path = ConvolvePath::quadrature;
  else if (ctx.s.path != "auto") throw InvalidInput("convolve: path must be auto, symbolic or quadrature");
  r.options["profile"] = prof.describe();
  r.options["derivative"] = ctx.s.derivative;
  r.options["path"] = ctx.s.path;
  const auto w = convolve_integrable(l.net, IntegrableDistribution::profile(prof, ctx.s.derivative), path);
  auto copt = ctx.copt;
  copt.k_max = std::min(copt.k_max, w.net.max_order());
  const auto c = classify(w.net, copt);
  r.results["symbolic"] = w.symbolic;
  r.results["net"] = report::net_json(w.net);
  r.results["classification"] = report::classification_json(c);
  r.results["unconverged_quadratures"] = static_cast<long>(*w.unconverged);
  for (const auto& x : w.warnings) r.caveats.push_back(x);
  if (*w.unconverged > 0) r.caveats.push_back("some quadratures did not reach tolerance");
  r.table = report::seminorm_table(c);
  flag_unknown(r, c);
  return r;
}

inline Report cmd_primitive(const Context& ctx) {
  Report r;
  const auto l = ctx.lower_one(r);
  r.options["x0"] = ctx.s.x0;
  const auto p = gf_primitive(l.net, ctx.s.x0);
  r.results["has_secular_term"] = p.has_secular_term;
  r.results["linear_coefficient"] = report::scalar_json(p.linear);
  r.results["exact"] = p.symbolic;
  if (p.function.is_symbolic()) r.results["primitive"] = report::net_json(p.function);
  if (!p.has_secular_term) {
    auto copt = ctx.copt;
    if (!p.function.is_symbolic()) copt.k_max = std::min(copt.k_max, p.function.max_order());
    const auto c = classify(p.function, copt);
    r.results["classification"] = report::classification_json(c);
    flag_unknown(r, c);
  } else {
    r.results["classification"] = nullptr;
    r.caveats.push_back("the primitive has a secular term, so it is not almost periodic");
  }
  r.table = report::Table({"eps", "linear_re", "linear_im"});
  for (std::size_t i = 0; i < p.linear.size(); ++i) r.table.add({p.linear.grid()[i], p.linear[i].real(), p.linear[i].imag()});
  return r;
}

inline Report cmd_bohlbohr(const Context& ctx) {
  Report r;
  const auto l = ctx.lower_one(r);
  BohlBohrOptions o;
  o.base_window = ctx.s.base_window;
  o.levels = ctx.s.levels;
  o.classify = ctx.copt;
  r.options["x0"] = ctx.s.x0;
  r.options["base_window"] = o.base_window;
  r.options["levels"] = o.levels;
  const auto b = bohl_bohr_check(l.net, ctx.s.x0, o);
  r.results["verdict"] = to_string(b.verdict);
  r.results["trend_slope"] = b.trend_slope;
  r.results["windows"] = b.windows;
  json slices = json::array();
  r.table = report::Table({"eps", "window", "sup"});
  for (std::size_t i = 0; i < b.slices.size(); ++i) {
    const auto& t = b.slices[i];
    slices.push_back({{"eps", l.net.grid()[i]},
                      {"sups", t.sups},
                      {"amplitude", t.amplitude},
                      {"slope", t.slope},
                      {"slope_stderr", t.slope_stderr},
                      {"normalized_slope", t.normalized_slope},
                      {"verdict", to_string(t.verdict)}});
    for (std::size_t k = 0; k < t.sups.size(); ++k) r.table.add({l.net.grid()[i], b.windows[k], t.sups[k]});
  }
  r.results["slices"] = std::move(slices);
  r.results["primitive_classification"] =
      b.primitive_classification ? report::classification_json(*b.primitive_classification) : json(nullptr);
  r.results["seminorm_transfer"] = b.seminorm_transfer;
  r.results["almost_periodic"] = b.almost_periodic;
  for (const auto& c : b.caveats) r.caveats.push_back(c);
  if (b.verdict == Boundedness::inconclusive) r.exit_code = inconclusive;
  return r;
}

inline Report cmd_compose(const Context& ctx) {
  Report r;
  const auto l = ctx.lower_one(r);
  if (ctx.s.poly.empty()) throw InvalidInput("compose: --poly a0,a1,... is required");
  PolyRepresentative F;
  json coeffs = json::array();
  std::size_t start = 0;
  for (;;) {
    const auto c = ctx.s.poly.find(',', start);
    const auto part = ctx.s.poly.substr(start, c == std::string::npos ? std::string::npos : c - start);
    const auto ast = expr::parse(part);
    F.coefficients.push_back(expr::lower_scalar(ast, ctx.grid));
    coeffs.push_back(expr::print(ast));
    if (c == std::string::npos) break;
    start = c + 1;
  }
  r.options["poly"] = std::move(coeffs);
  const auto res = compose(F, l.net, ctx.copt);
  auto copt = ctx.copt;
  if (!res.net.is_symbolic()) copt.k_max = std::min(copt.k_max, res.net.max_order());
  const auto c = classify(res.net, copt);
  r.results["net"] = report::net_json(res.net);
  r.results["classification"] = report::classification_json(c);
  for (const auto& w : res.warnings) r.caveats.push_back(w);
  r.table = report::seminorm_table(c);
  flag_unknown(r, c);
  return r;
}

inline Report cmd_aptest(const Context& ctx) {
  Report r;
  const auto l = ctx.lower_one(r);
  const double eps = ctx.s.eps > 0.0 ? ctx.s.eps : ctx.grid[0];
  const auto i = ctx.grid.index_of(eps);
  if (!i) throw InvalidInput("aptest: --eps must be a grid value");
  AlmostPeriodOptions o;
  o.delta = ctx.s.delta;
  o.search_window = ctx.s.search;
  o.probe_window = ctx.s.probe;
  o.step = ctx.s.scan_step;
  o.frequency = l.net.frequency_scale(*i);
  r.options["eps"] = eps;
  r.options["delta"] = o.delta;
  r.options["search_window"] = o.search_window;
  r.options["probe_window"] = o.probe_window;
  AlmostPeriodReport a;
  if (l.symbolic) {
    a = almost_period_test(l.net.slice(*i), o);
  } else {
    const auto u = l.net;
    const std::size_t k = *i;
    a = almost_period_test(SliceFunction([u, k](double x) { return u.evaluate(k, x); }), o);
  }
  json runs = json::array();
  for (const auto& [lo, hi] : a.runs) runs.push_back({lo, hi});
  r.results["step"] = a.step;
  r.results["count"] = a.count;
  r.results["runs"] = std::move(runs);
  r.results["representatives"] = a.representatives;
  r.results["max_gap"] = a.max_gap;
  r.results["max_representative_gap"] = a.max_representative_gap;
  r.results["found"] = a.found;
  r.results["certified"] = a.certified;
  if (!a.note.empty()) r.caveats.push_back(a.note);
  r.table = report::Table({"run_start", "run_end", "representative"});
  for (std::size_t k = 0; k < a.runs.size(); ++k) r.table.add({a.runs[k].first, a.runs[k].second, a.representatives[k]});
  if (!a.found) r.exit_code = inconclusive;
  return r;
}

// --- seeded property suite -------------------------------------------------

inline TrigPoly random_poly(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<int> n(1, 4);
  std::vector<Term> t;
  for (int k = n(rng); k > 0; --k) t.push_back({std::ldexp(std::round(std::ldexp(u(rng), 8)), -8), {u(rng), u(rng)}});
  return TrigPoly::normalize(std::move(t));
}

inline expr::NodePtr random_ast(std::mt19937_64& rng, int depth) {
  using namespace expr;
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_real_distribution<double> val(0.0, 10.0);
  if (depth == 0 || pick(rng) < 3) {
    switch (pick(rng) % 4) {
      case 0: return number(val(rng));
      case 1: return leaf(Op::imag);
      case 2: return leaf(Op::eps);
      default: return leaf(Op::x);
    }
  }
  switch (pick(rng)) {
    case 0: return unary(Op::neg, random_ast(rng, depth - 1));
    case 1: return binary(Op::add, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 2: return binary(Op::sub, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 3: return binary(Op::mul, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 4: return binary(Op::div, random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    case 5: return power(random_ast(rng, depth - 1), static_cast<int>(pick(rng)) - 4);
    default: return call(static_cast<Func>(pick(rng) % 4), random_ast(rng, depth - 1));
  }
}

/// A random member of the exponential-polynomial fragment.
inline expr::NodePtr random_fragment(std::mt19937_64& rng) {
  using namespace expr;
  std::uniform_int_distribution<int> pick(0, 5);
  std::uniform_real_distribution<double> val(0.25, 3.0);
  auto scalar = [&]() -> NodePtr {
    switch (pick(rng) % 3) {
      case 0: return number(val(rng));
      case 1: return power(leaf(Op::eps), pick(rng) % 3 - 1);
      default: return binary(Op::mul, leaf(Op::imag), number(val(rng)));
    }
  };
  auto atom = [&]() -> NodePtr {
    auto lin = binary(Op::mul, number(val(rng)), leaf(Op::x));
    switch (pick(rng) % 4) {
      case 0: return call(Func::sin, lin);
      case 1: return call(Func::cos, binary(Op::add, lin, scalar()));
      case 2: return call(Func::exp, binary(Op::mul, leaf(Op::imag), lin));
      default: return call(Func::sin, binary(Op::div, leaf(Op::x), leaf(Op::eps)));
    }
  };
  NodePtr e = binary(Op::mul, scalar(), atom());
  for (int k = pick(rng) % 3; k > 0; --k) {
    NodePtr t = binary(Op::mul, scalar(), pick(rng) % 2 ? power(atom(), 1 + pick(rng) % 3) : binary(Op::mul, atom(), atom()));
    e = binary(pick(rng) % 2 ? Op::add : Op::sub, e, t);
  }
  return e;
}

inline Report cmd_props(const Context& ctx) {
  Report r;
  std::mt19937_64 rng(ctx.s.seed);
  const int n = ctx.s.cases;
  if (n <= 0) throw InvalidInput("props: --cases must be positive");
  r.options["cases"] = n;
  std::uniform_real_distribution<double> ux(-10.0, 10.0);
  std::uniform_int_distribution<std::size_t> ui(0, ctx.grid.size() - 1);
  struct Tally {
    const char* name;
    int failures = 0;
  };
  Tally ring{"trigpoly_ring_laws"}, leibniz{"trigpoly_leibniz"}, round{"parse_print_round_trip"},
      agree{"symbolic_callable_agreement"};
  for (int c = 0; c < n; ++c) {
    const auto p = random_poly(rng), q = random_poly(rng), s = random_poly(rng);
    const double x = ux(rng);
    const auto lhs = mul(p, add(q, s)), rhs = add(mul(p, q), mul(p, s));
    const double scale = 1.0 + std::abs(lhs(x));
    if (!(add(p, q) == add(q, p)) || std::abs(lhs(x) - rhs(x)) > 1e-12 * scale ||
        std::abs(mul(p, q)(x) - mul(q, p)(x)) > 1e-12 * scale)
      ++ring.failures;
    const auto d = derivative(mul(p, q), 1)(x), dd = add(mul(derivative(p, 1), q), mul(p, derivative(q, 1)))(x);
    if (std::abs(d - dd) > 1e-10 * (1.0 + std::abs(d))) ++leibniz.failures;

    const auto ast = random_ast(rng, 4);
    if (!expr::same(expr::parse(expr::print(ast)), ast)) ++round.failures;

    const auto frag = random_fragment(rng);
    expr::LowerOptions lo;
    lo.grid = ctx.grid;
    const auto sym = expr::lower(frag, lo);
    lo.force_callable = true;
    const auto num = expr::lower(frag, lo);
    for (int k = 0; k < 5; ++k) {
      const std::size_t i = ui(rng);
      const double y = ux(rng);
      const complex a = sym.net.evaluate(i, y), b = num.net.evaluate(i, y);
      if (!sym.symbolic || std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) {
        ++agree.failures;
        break;
      }
    }
  }
  json props = json::array();
  r.table = report::Table({"property", "cases", "failures"});
  for (const auto* t : {&ring, &leibniz, &round, &agree}) {
    props.push_back({{"property", t->name}, {"cases", n}, {"failures", t->failures}});
    r.table.add({t->name, n, t->failures});
    if (t->failures) r.exit_code = inconclusive;
  }
  r.results["properties"] = std::move(props);
  return r;
}

inline json error_json(const std::string& kind, const std::string& message) {
  return {{"schema", kErrorSchema}, {"error", kind}, {"message", message}};
}

}  // namespace detail

/// Run one command. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Almost periodic generalized functions: classification, means, spectra and embeddings", "apgf"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_option("--grid", s.grid, "eps grid: A:B for 2^-A..2^-B, or a comma list (default 3:14, or $APGF_GRID)");
  app.add_option("--window", s.window, "averaging window X for means, Bohr transforms and spectra")->check(CLI::PositiveNumber);
  app.add_option("--mesh", s.mesh, "sampling mesh for sup seminorms (default: 20 points per period)")->check(CLI::NonNegativeNumber);
  app.add_option("--kmax", s.kmax, "highest derivative order classified")->check(CLI::NonNegativeNumber);
  app.add_option("--mmax", s.mmax, "negligibility certificate order")->check(CLI::NonNegativeNumber);
  app.add_option("--out", s.out, "report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", s.seed, "seed for randomized suites");
  app.add_flag("--callable", s.callable, "force the callable lowering");

  auto expr1 = [&](CLI::App* c) { c->add_option("expr", s.exprs, "expression in x and eps")->required()->expected(1); };
  auto* classify_cmd = app.add_subcommand("classify", "moderate / negligible / neither");
  expr1(classify_cmd);
  auto* equal_cmd = app.add_subcommand("equal", "equality in the quotient algebra");
  equal_cmd->add_option("expr", s.exprs, "two expressions")->required()->expected(2);
  auto* mean_cmd = app.add_subcommand("mean", "generalized mean value");
  expr1(mean_cmd);
  mean_cmd->add_option("--averaging", s.averaging, "plain or cesaro");
  auto* bohr_cmd = app.add_subcommand("bohr", "generalized Bohr transform");
  expr1(bohr_cmd);
  bohr_cmd->add_option("--lambda", s.lambda, "frequency: a real scalar expression in eps")->required();
  bohr_cmd->add_option("--averaging", s.averaging, "plain or cesaro");
  auto* spectrum_cmd = app.add_subcommand("spectrum", "numeric spectrum scan");
  expr1(spectrum_cmd);
  spectrum_cmd->add_option("--range", s.range, "lo,hi");
  spectrum_cmd->add_option("--step", s.step, "coarse frequency step");
  spectrum_cmd->add_option("--threshold", s.threshold, "smallest reported coefficient modulus");
  auto* embed_cmd = app.add_subcommand("embed", "mollifier embedding of the distribution f^(j)");
  expr1(embed_cmd);
  embed_cmd->add_option("--mollifier", s.mollifier, "gaussian:N or bandlimited:a,b");
  embed_cmd->add_option("--derivative", s.derivative, "distributional derivative order j");
  auto* diagram_cmd = app.add_subcommand("diagram", "defect f * rho_eps - f");
  expr1(diagram_cmd);
  diagram_cmd->add_option("--mollifier", s.mollifier, "gaussian:N or bandlimited:a,b");
  auto* convolve_cmd = app.add_subcommand("convolve", "convolution with an integrable profile (or its derivative)");
  expr1(convolve_cmd);
  convolve_cmd->add_option("--profile", s.profile, "gaussian or exponential[:amplitude,center,width]");
  convolve_cmd->add_option("--derivative", s.derivative, "derivative order of the profile");
  convolve_cmd->add_option("--path", s.path, "auto, symbolic or quadrature");
  auto* primitive_cmd = app.add_subcommand("primitive", "primitive net from x0");
  expr1(primitive_cmd);
  primitive_cmd->add_option("--x0", s.x0, "base point");
  auto* bb_cmd = app.add_subcommand("bohlbohr", "bounded primitive criterion");
  expr1(bb_cmd);
  bb_cmd->add_option("--x0", s.x0, "base point");
  bb_cmd->add_option("--base-window", s.base_window, "smallest window W0");
  bb_cmd->add_option("--levels", s.levels, "number of doubling windows");
  auto* compose_cmd = app.add_subcommand("compose", "polynomial composition F(u)");
  expr1(compose_cmd);
  compose_cmd->add_option("--poly", s.poly, "coefficients a0,a1,...: scalar expressions in eps")->required();
  auto* ap_cmd = app.add_subcommand("aptest", "delta-almost periods of one slice");
  expr1(ap_cmd);
  ap_cmd->add_option("--delta", s.delta, "tolerance");
  ap_cmd->add_option("--search", s.search, "search window for tau");
  ap_cmd->add_option("--probe", s.probe, "probe window for x (uncertified slices)");
  ap_cmd->add_option("--step", s.scan_step, "tau step (default probe / 1e4)");
  ap_cmd->add_option("--eps", s.eps, "grid value of the slice (default: largest eps)");
  auto* props_cmd = app.add_subcommand("props", "seeded property suite");
  props_cmd->add_option("--cases", s.cases, "cases per property");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << detail::error_json("usage", e.what()).dump() << "\n";
    return input_error;
  }

  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  Report r;
  try {
    detail::Context ctx;
    ctx.s = s;
    if (s.grid.empty())
      if (const char* env = std::getenv("APGF_GRID")) ctx.s.grid = env;
    ctx.grid = ctx.s.grid.empty() ? EpsGrid::default_grid() : parse_grid(ctx.s.grid);
    ctx.copt.k_max = s.kmax;
    ctx.copt.m_max = s.mmax;
    if (name == "classify") r = detail::cmd_classify(ctx);
    else if (name == "equal") r = detail::cmd_equal(ctx);
    else if (name == "mean") r = detail::cmd_mean(ctx);
    else if (name == "bohr") r = detail::cmd_bohr(ctx);
    else if (name == "spectrum") r = detail::cmd_spectrum(ctx);
    else if (name == "embed") r = detail::cmd_embed(ctx);
    else if (name == "diagram") r = detail::cmd_diagram(ctx);
    else if (name == "convolve") r = detail::cmd_convolve(ctx);
    else if (name == "primitive") r = detail::cmd_primitive(ctx);
    else if (name == "bohlbohr") r = detail::cmd_bohlbohr(ctx);
    else if (name == "compose") r = detail::cmd_compose(ctx);
    else if (name == "aptest") r = detail::cmd_aptest(ctx);
    else r = detail::cmd_props(ctx);

    json config = {{"grid", report::grid_json(ctx.grid)},
                   {"window", s.window},
                   {"mesh", s.mesh > 0.0 ? json(s.mesh) : json(nullptr)},
                   {"kmax", s.kmax},
                   {"mmax", s.mmax},
                   {"seed", s.seed},
                   {"callable", s.callable}};
    for (auto& [k, v] : r.options.items()) config[k] = v;
    if (s.out == "csv") {
      r.table.write(out);
      for (const auto& c : r.caveats) err << "caveat: " << c << "\n";
    } else {
      json env = {{"schema", kSchema}, {"command", name},        {"input", r.input},
                  {"config", config},  {"results", r.results},  {"caveats", r.caveats},
                  {"version", kVersion}};
      out << env.dump(2) << "\n";
    }
    return r.exit_code;
  } catch (const SyntaxError& e) {
    auto j = detail::error_json("syntax", e.what());
    j["offset"] = e.offset();
    j["expected"] = e.expected();
    err << j.dump() << "\n";
    return input_error;
  } catch (const InsufficientData& e) {
    err << detail::error_json("insufficient_data", e.what()).dump() << "\n";
    return inconclusive;
  } catch (const UnsupportedOrder& e) {
    err << detail::error_json("unsupported_order", e.what()).dump() << "\n";
    return input_error;
  } catch (const Error& e) {
    err << detail::error_json("invalid_input", e.what()).dump() << "\n";
    return input_error;
  }
}

}  // namespace apgf::cli
