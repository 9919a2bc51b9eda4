#pragma once

#include <stdexcept>
#include <string>

namespace btcf {

/// Problems caused by user-supplied data or arguments (bad CSV, missing file,
/// schema mismatch). The CLI maps these to exit code 2; anything else is an
/// internal error (exit 1).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace btcf
