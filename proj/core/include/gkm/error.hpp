#pragma once

#include <stdexcept>
#include <string>

namespace gkm {

// Caller violated a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not deliver a trustworthy result
// (quadrature non-convergence, non-finite state, violated bound).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed, truncated or mismatched serialized data.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gkm
