#pragma once

#include <stdexcept>

namespace mister {

/// Raised for every contract violation inside the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mister
