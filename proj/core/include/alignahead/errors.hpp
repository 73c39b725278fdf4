#pragma once

#include <stdexcept>
#include <string>

#include "alignahead/precision.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

/// Operand shapes do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent dataset input.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run / model / loss configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A training loss became NaN or infinite.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ALIGNAHEAD_NAMESPACE_END
