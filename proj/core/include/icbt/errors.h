#pragma once

#include <stdexcept>
#include <string>

namespace icbt {

// Malformed or unusable input data (unknown labels, disconnected comparison
// graphs, parse failures).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A ModelState broke one of its structural invariants.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace icbt
