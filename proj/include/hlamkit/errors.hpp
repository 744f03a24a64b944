#pragma once

#include <stdexcept>
#include <string>

namespace hlamkit {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Problem generation failed (dimension overflow etc.).
struct GenerationError : Error {
  using Error::Error;
};

// Rank/task planning failed (e.g. more ranks than grid planes).
struct PlanError : Error {
  using Error::Error;
};

// Invalid solver setup (zero diagonal, bad tolerances).
struct SetupError : Error {
  using Error::Error;
};

// Kernel or task contract violated (range out of bounds, overlapping
// concurrent writes outside a relaxed region).
struct ContractViolation : Error {
  using Error::Error;
};

// Task graph is malformed (unknown or forward explicit dependency).
struct SchedulingError : Error {
  using Error::Error;
};

// Fabric protocol misuse: mismatched collective modes, lost peer,
// watchdog timeout on a blocked wait.
struct ProtocolError : Error {
  using Error::Error;
};

// Fabric was poisoned because some rank failed; remaining waiters abort.
struct FabricError : Error {
  using Error::Error;
};

// Numerical breakdown in a Krylov solver (zero denominator, restart storm).
struct BreakdownError : Error {
  using Error::Error;
};

}  // namespace hlamkit
