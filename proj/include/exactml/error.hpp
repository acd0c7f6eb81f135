#pragma once

#include <stdexcept>
#include <string>

namespace exactml {

// Malformed documents, failed validation, out-of-domain inputs.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the network compiler when an accumulator needs more bits than allowed.
class WidthOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by enumeration-based tools when a size cap is exceeded.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace exactml
