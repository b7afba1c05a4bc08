#pragma once

#include <stdexcept>
#include <string>

namespace trinet {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Problem size exceeds what the configured limits allow.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Operation called in the wrong state (e.g. certificate from a feasible solve).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A numerical procedure produced a non-finite or otherwise unusable value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trinet
