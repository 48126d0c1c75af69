#pragma once

#include <stdexcept>
#include <string>

namespace marsmc {

/// Invalid dimensions, orders or parameter values supplied by a caller.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed run configuration (unknown key, bad type, out-of-range value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data could not be read or parsed.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sampler cannot continue: all incremental weights vanished, or the prior
/// rejection sampler ran out of budget.
class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace marsmc
