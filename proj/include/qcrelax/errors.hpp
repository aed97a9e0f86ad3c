#pragma once

#include <stdexcept>
#include <string>

namespace qcrelax {

/// Input outside the closure of the admissible set, or a quantity evaluated
/// where it is not defined (e.g. the gradient of g on z = 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class PreconditionViolated : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A root-finder hit its iteration cap. Existence and uniqueness of the roots
/// solved here are known, so this indicates a solver bug.
class ConvergenceFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateDirection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InadmissibleInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class BoxTooSmall : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qcrelax
