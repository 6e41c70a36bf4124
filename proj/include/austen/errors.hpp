#pragma once

#include <stdexcept>
#include <string>

namespace austen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed files, schema violations, bad flags or config values.
class InputError : public Error {
 public:
  using Error::Error;
};

// Data that is well-formed but numerically unusable: zero residual variance,
// single treatment arm, a fit that does not converge.
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public DegenerateDataError {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : DegenerateDataError(what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

}  // namespace austen
