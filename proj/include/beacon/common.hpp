#ifndef BEACON_COMMON_HPP
#define BEACON_COMMON_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace beacon {

// Invalid numeric or structural argument (delta out of range, empty
// population, bad Beta shape, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Individual or SNV index outside the matrix.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Malformed on-disk data. The message names the line/field or byte offset.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problem too large for an exact enumeration solver.
class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal consistency check failed (e.g. a flip of a 0-response, or an
// incremental quantity drifting from its from-scratch value).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Unusable service or run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input on which the requested statistic is undefined (e.g. clustering a
// constant score vector).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace beacon

#endif  // BEACON_COMMON_HPP
