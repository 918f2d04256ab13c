#pragma once

#include <stdexcept>

namespace pic {

// Invalid or inconsistent run configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values encountered during training (CLI exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pic
