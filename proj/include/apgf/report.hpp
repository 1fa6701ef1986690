/// \file report.hpp
/// JSON and CSV serialization of analysis results.

#pragma once

#include "json.hpp"

#include <ostream>
#include <string>
#include <vector>

#include "apgf/analysis.hpp"
#include "apgf/expr.hpp"

namespace apgf::report {

using json = nlohmann::ordered_json;

inline json complex_json(complex c) { return json::array({c.real(), c.imag()}); }

/// Terms as [frequency, re, im].
inline json trigpoly_json(const TrigPoly& p) {
  json a = json::array();
  for (const auto& t : p.terms()) a.push_back(json::array({t.frequency, t.coefficient.real(), t.coefficient.imag()}));
  return a;
}

inline json grid_json(const EpsGrid& g) { return json(g.values()); }

inline json scalar_json(const GeneralizedScalar& s) {
  json v = json::array();
  for (const auto& c : s.values()) v.push_back(complex_json(c));
  return {{"eps", grid_json(s.grid())}, {"values", std::move(v)}};
}

inline json fit_json(const std::optional<AsymptoticFit>& f) {
  if (!f) return nullptr;
  return {{"slope", f->slope},
          {"intercept", f->intercept},
          {"slope_stderr", f->slope_stderr},
          {"max_residual", f->max_residual},
          {"excluded_eps", f->excluded}};
}

inline json classification_json(const Classification& c) {
  json orders = json::array();
  for (const auto& o : c.orders) {
    orders.push_back({{"k", o.k},
                      {"verdict", to_string(o.verdict)},
                      {"seminorms", o.values},
                      {"fit", fit_json(o.fit)},
                      {"tail_fit", fit_json(o.tail_fit)},
                      {"exactly_zero", o.exactly_zero},
                      {"eventually_zero", o.eventually_zero},
                      {"note", o.note}});
  }
  json witness = nullptr;
  if (c.witness_k) witness = *c.witness_k;
  return {{"verdict", to_string(c.verdict)}, {"k_max", c.k_max},     {"m_max", c.m_max},
          {"witness_k", witness},           {"orders", std::move(orders)}, {"caveats", c.caveats}};
}

/// Symbolic nets list their terms per eps; callable nets only their declared order.
inline json net_json(const GeneralizedFunction& u) {
  json j;
  j["representation"] = u.is_symbolic() ? "symbolic" : "callable";
  if (u.is_symbolic()) {
    json s = json::array();
    for (std::size_t i = 0; i < u.grid().size(); ++i) s.push_back({{"eps", u.grid()[i]}, {"terms", trigpoly_json(u.slice(i))}});
    j["slices"] = std::move(s);
  } else {
    j["declared_order"] = u.max_order();
    j["eps"] = grid_json(u.grid());
  }
  return j;
}

/// RFC-4180 table: CRLF line ends, fields quoted when they contain a comma,
/// quote, CR or LF.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  struct Cell {
    std::string text;
    Cell(std::string s) : text(std::move(s)) {}
    Cell(const char* s) : text(s) {}
    Cell(double v) : text(expr::format_double(v)) {}
    Cell(int v) : text(std::to_string(v)) {}
    Cell(std::size_t v) : text(std::to_string(v)) {}
  };

  void add(std::vector<Cell> row) {
    std::vector<std::string> r;
    for (auto& c : row) r.push_back(std::move(c.text));
    rows_.push_back(std::move(r));
  }

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

  static std::string quote(const std::string& f) {
    if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
    std::string q = "\"";
    for (char c : f) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

  void write(std::ostream& os) const {
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << quote(r[i]);
      os << "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// eps,k,seminorm rows of a classification.
inline Table seminorm_table(const Classification& c) {
  Table t({"eps", "k", "seminorm"});
  for (const auto& o : c.orders)
    for (std::size_t i = 0; i < o.values.size(); ++i) t.add({c.grid[i], o.k, o.values[i]});
  return t;
}

}  // namespace apgf::report
