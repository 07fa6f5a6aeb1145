#pragma once

#include <stdexcept>

namespace resin {

// Solver failures and diverging numerics; maps to CLI exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace resin
