#pragma once

#include <stdexcept>
#include <string>

namespace gmspike {

/// Input outside the admissible parameter or evaluation domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical failure inside the integrator or the shooting driver.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gmspike
