#pragma once

#include <stdexcept>
#include <string>

namespace jppo {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Quadrature or iteration that failed to reach its tolerance.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Transmission with zero rate, or a problem with no feasible action.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration; `key_path` names the offending entry (e.g. "fidelity_weights").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key_path, const std::string& message)
      : std::runtime_error(key_path.empty() ? message : key_path + ": " + message),
        key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

}  // namespace jppo
