#pragma once

#include <stdexcept>
#include <string>

namespace bubblelab {

/// Invalid user configuration (bad flag, missing file, malformed descriptor).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not certify its result (unresolved preimages,
/// no antipodal pair within tolerance, degenerate fiber sample).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bubblelab
