#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace atsp {

// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The input admits no solution or violates a documented precondition.
class SolveError : public Error {
 public:
  using Error::Error;
};

// Malformed instance text or flag value.
class ParseError : public Error {
 public:
  using Error::Error;
};

// An internal guarantee failed. Always a bug, never bad input.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

// Min-cost flow with no feasible solution. `cut` holds the nodes on the
// source side of a cut whose capacity is smaller than the demand behind it.
class InfeasibleFlow : public SolveError {
 public:
  InfeasibleFlow(const std::string& what, std::vector<int> cut)
      : SolveError(what), cut_(std::move(cut)) {}
  const std::vector<int>& cut() const { return cut_; }

 private:
  std::vector<int> cut_;
};

[[noreturn]] void fail_check(const char* file, int line, const std::string& msg);

}  // namespace atsp

#define ATSP_CHECK(cond, msg)                              \
  do {                                                     \
    if (!(cond)) ::atsp::fail_check(__FILE__, __LINE__, (msg)); \
  } while (0)
