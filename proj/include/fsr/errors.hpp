#pragma once

#include <stdexcept>
#include <string>

namespace fsr {

// Bad or inconsistent input data (malformed files, invalid sets, sampling
// requests the store cannot satisfy).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or command-line usage.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A broken internal invariant. Never expected to escape in correct use.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fsr
