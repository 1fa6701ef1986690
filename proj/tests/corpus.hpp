#pragma once

#include <string>
#include <vector>

namespace corpus {

// exponential-polynomial fragment: lowers symbolically
inline const std::vector<std::string> kFragment = {
    "sin(x)",
    "cos(x)",
    "exp(i*x)",
    "sin(x)^2",
    "eps^-2 * sin(x) + exp(i*sqrt(2)*x)",
    "sin(x/eps)",
    "2*exp(i*x) + (3-i)*exp(i*sqrt(2)*x) + 0.5",
    "5",
    "eps",
    "eps^-3 * sin(x)",
    "exp(-1/eps) * sin(x)",
    "sin(x)*cos(x)",
    "cos(2*x + 1)",
    "sin(3*x - eps)",
    "(1 + sin(x))^3",
    "-sin(x)^2 + cos(x)^2",
    "sin(x + x)",
    "exp(i*(x/eps + x))",
    "sqrt(2)*cos(sqrt(3)*x)",
    "exp(sin(0)) * cos(x)",
    "i*sin(x) - i*cos(x)",
    "sin(x)/eps^2",
    "1/(1+eps) * exp(-i*x)",
    "cos(x)^4 - sin(x)^4",
    "sin(0.5*x)*sin(1.5*x)*sin(2.5*x)",
    "2.5e-1 * cos(1e1 * x)",
    "(sin(x) + cos(x/eps))^2",
    "exp(i*eps*x)",
    "eps^2 * (cos(x) - 1)",
    "-(-(sin(x)))",
    "exp(2*i*x) * exp(-2*i*x)",
};

// smooth almost periodic slices outside the fragment: lowered to callables
inline const std::vector<std::string> kCallable = {
    "exp(sin(x))",
    "sqrt(2 + sin(x))",
    "sin(sin(x))",
    "cos(eps*sin(x/eps))",
    "exp(cos(x))^2 * sin(x)",
    "sin(x)*exp(sin(x))",
    "exp(i*sin(x))",
    "sin(2*cos(sqrt(2)*x))",
    "1 + exp(sin(x))/eps",
};

// well-formed but rejected by lowering
inline const std::vector<std::string> kRejected = {
    "x", "x*sin(x)", "1/sin(x)", "exp(x)", "sin(i*x)", "x^2", "sqrt(x)", "sin(x)^-1",
};

// extra syntax for the round-trip suite
inline const std::vector<std::string> kSyntax = {
    "-x^2", "2^-3", "1e-05*x", "((x))", "2*-x", "x - x - x", "8/2/2", "  sin ( x )\t",
};

inline std::vector<std::string> all() {
  std::vector<std::string> v = kFragment;
  v.insert(v.end(), kCallable.begin(), kCallable.end());
  v.insert(v.end(), kRejected.begin(), kRejected.end());
  v.insert(v.end(), kSyntax.begin(), kSyntax.end());
  return v;
}

}  // namespace corpus
