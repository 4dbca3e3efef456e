#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trajprune {

/// Invalid configuration, dimension mismatch or precondition violation.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Training produced a non-finite or exploding quantity.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t epoch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}

  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_ = 0;
};

/// A run-time invariant of the pruning loop was broken.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace trajprune
