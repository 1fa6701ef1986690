/// \file error.hpp
/// Exception types thrown by the apgf library.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace apgf {

/// Base class of every apgf error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values, empty grids, out-of-range parameters.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A derivative order beyond what a net or mollifier declares.
class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

/// A construction that cannot be completed, e.g. a singular moment system.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// Too few usable points for an asymptotic fit.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Expression syntax error with the byte offset where parsing stopped.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected,
              const std::string& message)
      : Error(message + " at offset " + std::to_string(offset)),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

}  // namespace apgf
