#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace labo {

// Streaming FNV-1a (64-bit). Used for run-log content hashes, manifest
// hashes, and named-stream seed derivation. Not cryptographic.
class Fnv1a64 {
 public:
  void update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= static_cast<std::uint64_t>(p[i]);
      state_ *= 0x100000001b3ull;
    }
  }
  void update(std::string_view s) { update(s.data(), s.size()); }

  std::uint64_t digest() const { return state_; }

  static std::uint64_t hash(std::string_view s) {
    Fnv1a64 h;
    h.update(s);
    return h.digest();
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

std::string hex64(std::uint64_t v);

}  // namespace labo
