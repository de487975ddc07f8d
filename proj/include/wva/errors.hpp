#pragma once

#include <stdexcept>
#include <string>

namespace wva {

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Photon-number leakage past a mode cutoff exceeded the configured tolerance.
struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested tensor would exceed the amplitude budget.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Weak value diverges (perfectly dark port, delta == 0).
struct DivergentWeakValue : std::domain_error {
  using std::domain_error::domain_error;
};

struct InvalidRegime : std::domain_error {
  using std::domain_error::domain_error;
};

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateFit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace wva
