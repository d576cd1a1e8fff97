#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kosz {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input that violates an operation's precondition (bad sizes, disconnected graph, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Malformed edge-list file; carries the 1-based line number.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Numerical breakdown during an iterative solve.
class SolverError : public Error {
public:
  using Error::Error;
};

// Software operation counters. Flops are counted at instrumented sites,
// tree_ops counts nodes/entries touched inside tree structures.
struct OpCounters {
  std::uint64_t flops = 0;
  std::uint64_t tree_ops = 0;

  OpCounters& operator+=(const OpCounters& o) noexcept {
    flops += o.flops;
    tree_ops += o.tree_ops;
    return *this;
  }
};

}  // namespace kosz
