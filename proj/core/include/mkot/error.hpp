#pragma once

#include <stdexcept>
#include <string>

namespace mkot {

// Base class for all errors raised by this library. Subtypes live in the
// header of the module that raises them.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mkot
