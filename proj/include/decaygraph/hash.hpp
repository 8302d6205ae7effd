#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace decaygraph {

// FNV-1a, 64-bit. Used for staleness checks, not integrity.
class Fnv1a {
 public:
  void update(std::string_view bytes);
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

std::string hash_bytes(std::string_view bytes);
// Empty string when the file does not exist.
std::string hash_file(const std::string& path);

}  // namespace decaygraph
