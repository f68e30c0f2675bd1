#pragma once

#include <stdexcept>
#include <string>

namespace ggmtree {

// Failure of a numerical procedure on valid input: missing spectral gap,
// Newton divergence, unreachable truncation target, seed leaving the simplex.
// Invalid arguments and malformed configuration throw std::invalid_argument
// or std::domain_error instead.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ggmtree
