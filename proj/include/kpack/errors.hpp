#pragma once

#include <stdexcept>
#include <string>

namespace kpack {

// Caller broke a documented precondition (bad sizes, missing labels, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A structural obstruction that makes the requested object impossible,
// e.g. an odd half in a pair-complete matching.
class ObstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sizing windows that are empty for the given parameters.
class SizingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough disjoint objects of some kind (configurations, cliques, ...).
class SupplyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Should never fire; means an invariant inside the library was broken.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace kpack
