#pragma once

#include <stdexcept>
#include <string>

namespace vclust {

// Exit-code families used by the CLI: config 2, numerical 3, I/O 4.
// Precondition violations on library calls throw std::invalid_argument.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vclust
