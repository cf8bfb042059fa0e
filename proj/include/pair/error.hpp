#pragma once

#include <stdexcept>
#include <string>

namespace pair {

/// Raised for any rejected input or violated precondition.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pair
