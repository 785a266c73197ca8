#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace chaossync {

/// State of one system at an instant: n ordered real components.
using StateVector = std::vector<double>;

inline bool all_finite(const StateVector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline void require_dim(const StateVector& v, std::size_t n, const std::string& what) {
  if (v.size() != n) {
    throw std::invalid_argument(what + ": expected dimension " + std::to_string(n) +
                                ", got " + std::to_string(v.size()));
  }
}

}  // namespace chaossync
