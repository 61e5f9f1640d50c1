#pragma once

#include <stdexcept>
#include <string>

namespace divfield {

// Level or coordinate outside the range the construction supports.
class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Request larger than a documented capacity limit (window size, raster cells).
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Caller combined arguments that do not belong together.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Evaluation point or stencil violates a geometric precondition.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Output file could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace divfield
