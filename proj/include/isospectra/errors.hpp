#pragma once

#include <stdexcept>
#include <string>

namespace isospectra {

// Raised when an iterative numerical routine does not reach its tolerance
// within the allowed budget (quadrature refinement, eigensolver sweeps).
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace isospectra
