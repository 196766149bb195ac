#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace kgp {

/// A precondition on an argument was violated (p outside (0,2), grid mismatch, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// b = 0 with a >= a*: the infimum is not attained, so there is nothing to minimize.
class InfimumNotAttained : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An iterative procedure could not bracket its target or ran out of iterations.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration schema violation; `path()` names the offending field ("params.p").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace kgp
