#pragma once

#include <stdexcept>
#include <string>

namespace sinkdist {

// Invalid arguments: bad dimensions, negative mass, out-of-range parameters.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed input files (IDX headers, truncated payloads).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Floating point trouble inside a solver: kernel underflow, non-finite iterates.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solver gave up (pivot budget exhausted, bracket not found).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sinkdist
