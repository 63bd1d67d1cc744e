// Error taxonomy shared across the library. The CLI maps kinds to exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace gtqa {

enum class ErrorKind {
  Parameter,   // bad arguments / infeasible parameters
  Generation,  // randomized construction exhausted its retry budget
  Shape,       // dimension mismatch
  Label,       // unknown or duplicate tensor axis label
  Numerical,   // numerical routine failed (eigensolver, SVD, ...)
  Domain,      // value outside the operation's domain
  Degenerate,  // zero / rank-deficient object where a regular one is required
  Topology,    // operation referenced a non-existent edge or vertex
  Capacity,    // problem size exceeds a hard resource limit
  Config,      // inconsistent run configuration
  Outcome,     // forced measurement outcome has (near-)zero probability
  Io,          // file format / version problems
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gtqa
