#pragma once

#include <stdexcept>
#include <string>

namespace tcboost {

/// Bad input: malformed files, invalid parameters, dimension mismatches.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The convex solver failed to reach an optimal point.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace tcboost
