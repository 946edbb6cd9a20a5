#ifndef CMAB_ERROR_HPP
#define CMAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cmab {

/// Invalid configuration or malformed input supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computational guard (enumeration size, table size) was exceeded.
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cmab

#endif  // CMAB_ERROR_HPP
