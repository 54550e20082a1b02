#pragma once

#include <stdexcept>
#include <string>

namespace tlaproof {

// Common base for every error this library raises on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigurationError : Error {
  using Error::Error;
};

}  // namespace tlaproof
