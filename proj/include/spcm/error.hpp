#pragma once

#include <stdexcept>
#include <string>

namespace spcm {

/// Invalid numeric parameter (bad K, p, gamma, ...). Maps to a configuration error at the CLI.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data that cannot be clustered (empty, ragged, non-finite, degenerate).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A cluster lost every active point; raised by the representative update.
class AssumptionViolation : public std::runtime_error {
 public:
  AssumptionViolation(const std::string& what, std::size_t cluster)
      : std::runtime_error(what), cluster_(cluster) {}
  std::size_t cluster() const noexcept { return cluster_; }

 private:
  std::size_t cluster_;
};

}  // namespace spcm
