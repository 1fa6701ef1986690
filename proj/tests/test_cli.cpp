#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "apgf/cli.hpp"

using apgf::cli::run;
using json = nlohmann::ordered_json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
  json report() const { return json::parse(out); }
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, SpectrumExample) {
  const auto o = call({"spectrum", "2*exp(i*x) + (3-i)*exp(i*sqrt(2)*x) + 0.5", "--range", "-5,5", "--grid", "3:8"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto r = o.report();
  EXPECT_EQ(r["schema"], "apgf.report/1");
  EXPECT_EQ(r["command"], "spectrum");
  EXPECT_EQ(r["input"]["lowering"][0], "symbolic");
  const auto& peaks = r["results"]["peaks"];
  ASSERT_EQ(peaks.size(), 3u);
  const double expected[] = {0.0, 1.0, std::sqrt(2.0)};
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(peaks[k]["frequency"].get<double>(), expected[k], 1e-6);
  EXPECT_EQ(r["results"]["exact_spectrum"]["frequencies"].size(), 3u);
}

TEST(Cli, ClassifyExample) {
  const auto o = call({"classify", "eps^-3 * sin(x)", "--kmax", "2"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto c = o.report()["results"]["classification"];
  EXPECT_EQ(c["verdict"], "moderate");
  ASSERT_EQ(c["orders"].size(), 3u);
  for (const auto& ord : c["orders"]) EXPECT_NEAR(ord["fit"]["slope"].get<double>(), -3.0, 1e-6);
}

TEST(Cli, DiagramExample) {
  const auto o = call({"diagram", "sin(3*x)", "--mollifier", "bandlimited:1,2"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto r = o.report();
  EXPECT_DOUBLE_EQ(r["results"]["exact_zero_below"].get<double>(), 1.0 / 3.0);
  EXPECT_EQ(r["results"]["classification"]["verdict"], "negligible");
  for (double v : r["results"]["classification"]["orders"][0]["seminorms"].get<std::vector<double>>()) EXPECT_EQ(v, 0.0);
}

TEST(Cli, SyntaxErrorsExitTwo) {
  const auto o = call({"classify", "sin("});
  EXPECT_EQ(o.code, 2);
  EXPECT_TRUE(o.out.empty());
  const auto e = json::parse(o.err);
  EXPECT_EQ(e["schema"], "apgf.error/1");
  EXPECT_EQ(e["error"], "syntax");
  EXPECT_EQ(e["offset"], 4);
  EXPECT_FALSE(e["expected"].empty());

  EXPECT_EQ(call({"classify", "x*sin(x)"}).code, 2);
  EXPECT_EQ(call({"classify", "1/sin(x)"}).code, 2);
  EXPECT_EQ(call({"nosuch"}).code, 2);
  EXPECT_EQ(call({"classify"}).code, 2);
  EXPECT_EQ(call({"classify", "sin(x)", "--out", "xml"}).code, 2);
  EXPECT_EQ(call({"classify", "sin(x)", "--grid", "5:3"}).code, 2);
  EXPECT_EQ(call({"embed", "sin(x)", "--mollifier", "box:1"}).code, 2);
  EXPECT_EQ(call({"embed", "eps*sin(x)"}).code, 2);
  EXPECT_EQ(call({"bohr", "sin(x)", "--lambda", "x"}).code, 2);
  EXPECT_EQ(call({"convolve", "exp(sin(x))", "--derivative", "9"}).code, 2);
}

TEST(Cli, ReportsAreDeterministic) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"classify", "exp(sin(x))*eps^-1", "--grid", "3:6", "--kmax", "1"},
           {"mean", "5 + sin(x)"},
           {"props", "--seed", "7", "--cases", "20"},
           {"spectrum", "cos(x)", "--out", "csv", "--grid", "3:5"}}) {
    const auto a = call(args), b = call(args);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.code, b.code);
  }
}

TEST(Cli, CsvOutput) {
  const auto o = call({"mean", "5 + eps*sin(x)", "--grid", "3:6", "--out", "csv"});
  ASSERT_EQ(o.code, 0);
  EXPECT_EQ(o.out, "eps,re,im\r\n0.125,5,0\r\n0.0625,5,0\r\n0.03125,5,0\r\n0.015625,5,0\r\n");
  // too few grid points for a fit: inconclusive
  EXPECT_EQ(call({"mean", "5 + eps*sin(x)", "--grid", "3:4"}).code, 1);
  EXPECT_EQ(apgf::report::Table::quote("a,b"), "\"a,b\"");
  EXPECT_EQ(apgf::report::Table::quote("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(apgf::report::Table::quote("line\r\nbreak"), "\"line\r\nbreak\"");
  EXPECT_EQ(apgf::report::Table::quote("plain"), "plain");
}

TEST(Cli, GridSelection) {
  const auto a = call({"classify", "sin(x)", "--grid", "0.5,0.25,0.125,0.0625"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.report()["config"]["grid"], json::array({0.5, 0.25, 0.125, 0.0625}));

  ::setenv("APGF_GRID", "4:7", 1);
  const auto b = call({"classify", "sin(x)"});
  const auto c = call({"classify", "sin(x)", "--grid", "3:5"});
  ::unsetenv("APGF_GRID");
  EXPECT_EQ(b.report()["config"]["grid"].size(), 4u);
  EXPECT_EQ(b.report()["config"]["grid"][0], 0.0625);
  EXPECT_EQ(c.report()["config"]["grid"].size(), 3u);
  EXPECT_EQ(call({"classify", "sin(x)"}).report()["config"]["grid"].size(), 12u);
}

TEST(Cli, EveryCommandRuns) {
  const std::vector<std::vector<std::string>> cmds = {
      {"equal", "sin(x)", "sin(x) + exp(-1/eps)*cos(x)", "--mmax", "8"},
      {"mean", "eps^-2 * (3 + exp(i*x))"},
      {"bohr", "eps^-1 * exp(i*sqrt(2)*x) + 4*exp(i*x)", "--lambda", "sqrt(2)"},
      {"embed", "sin(x)", "--mollifier", "gaussian:3", "--derivative", "2", "--kmax", "1"},
      {"convolve", "sin(x)", "--profile", "gaussian", "--grid", "3:6", "--kmax", "1"},
      {"primitive", "cos(x)", "--x0", "0"},
      {"bohlbohr", "sin(x)", "--grid", "3:6"},
      {"compose", "sin(x)", "--poly", "1,0,1"},
      {"aptest", "sin(x)", "--delta", "0.1"},
      {"props", "--seed", "11", "--cases", "30"},
  };
  for (const auto& c : cmds) {
    const auto o = call(c);
    EXPECT_EQ(o.code, 0) << c[0] << ": " << o.err;
    const auto r = o.report();
    EXPECT_EQ(r["command"], c[0]);
    EXPECT_EQ(r["version"], apgf::cli::kVersion);
  }
  const auto eq = call(cmds[0]).report();
  EXPECT_TRUE(eq["results"]["equal"].get<bool>());
  const auto bohr = call(cmds[2]).report();
  EXPECT_EQ(bohr["results"]["value"]["values"][0][0], 8.0);  // 1 / 2^-3
  const auto conv = call(cmds[4]).report();
  EXPECT_TRUE(conv["results"]["symbolic"].get<bool>());
  const auto& s = conv["results"]["net"]["slices"][0]["terms"];
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(std::hypot(s[1][1].get<double>(), s[1][2].get<double>()), 0.5 * std::exp(-0.5), 1e-15);
  const auto bb = call(cmds[6]).report();
  EXPECT_EQ(bb["results"]["verdict"], "bounded");
}

TEST(Cli, SecondaryOutcomes) {
  // no tau in (delta, 3] brings x -> sin(x) back within 1e-3
  const auto o = call({"aptest", "sin(x)", "--delta", "1e-3", "--search", "3"});
  EXPECT_EQ(o.code, 0);  // tau = 0 always qualifies
  const auto r = o.report();
  EXPECT_EQ(r["results"]["representatives"].size(), 1u);

  const auto p = call({"primitive", "1 + cos(x)"});
  EXPECT_EQ(p.code, 0);
  EXPECT_TRUE(p.report()["results"]["has_secular_term"].get<bool>());
  const auto g = call({"bohlbohr", "1 + sin(x)", "--grid", "3:6"});
  EXPECT_EQ(g.code, 0);
  EXPECT_EQ(g.report()["results"]["verdict"], "growing");
}

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(call({"--help"}).code, 0);
  const auto v = call({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find(apgf::cli::kVersion), std::string::npos);
}
