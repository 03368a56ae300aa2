#pragma once

#include <stdexcept>
#include <string>

namespace kess {

/// Raised when an input violates a documented contract: an off-manifold
/// point, a malformed chain file, an incompatible kernel/chain pairing,
/// an out-of-range parameter. The message names the offending quantity.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kess
