#pragma once

#include <stdexcept>
#include <string>

namespace odapsim {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input text: scenario files, pattern specs, CSV rows.
// Messages carry the source location when one is known.
class ParseError : public Error {
public:
  using Error::Error;
};

// Structurally valid input that violates a model invariant
// (unknown replica database, infeasible target count, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

// A runtime configuration that cannot be simulated
// (unallocated fragment, non-positive throughput).
class ConfigError : public Error {
public:
  using Error::Error;
};

// Calibration could not satisfy its targets (negative solution,
// contradictory constraints beyond tolerance).
class CalibrationError : public Error {
public:
  using Error::Error;
};

// Simulation engine invariant violations and guard trips
// (release without hold, event limit exceeded, scheduling in the past).
class EngineError : public Error {
public:
  using Error::Error;
};

// Filesystem-level failures when reading or writing result files.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace odapsim
