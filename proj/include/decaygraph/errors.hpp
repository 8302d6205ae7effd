#pragma once

#include <stdexcept>
#include <string>

namespace decaygraph {

// Bad input data: malformed files, inconsistent sizes, impossible configs.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments or option combinations supplied by the caller.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace decaygraph
