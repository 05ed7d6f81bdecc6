#pragma once

#include <stdexcept>
#include <string>

namespace gindex {

// Input outside the mathematical domain of an operation (e.g. R >= 1, p > 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Two charges sitting on the same point: the log interaction is infinite.
class SingularConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Chain setup that cannot be realized, e.g. a sector value above n.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A conditioned chain never visited one of the states needed for a ratio.
class InsufficientSamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gindex
