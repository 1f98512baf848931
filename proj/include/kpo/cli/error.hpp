#pragma once

#include <stdexcept>

namespace kpo::cli {

// Anything wrong with the user's configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kpo::cli
