#pragma once

#include <stdexcept>
#include <string>

namespace fovcalib {

// Input outside a mapping's domain, or a parameter violating a type invariant.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative solver gave up. Carries the last iterate for diagnostics.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_iterate)
      : std::runtime_error(what), last_iterate_(last_iterate) {}

  double last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_iterate_;
};

// Pose / homography estimation failed (degenerate or too few points).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (syntax, missing keys, wrong types).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fovcalib
