#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace labo {

// SplitMix64 stream. All randomness in the project flows through named
// streams derived from one root seed, so results do not depend on thread
// count or evaluation order. uniform01/gaussian are fully specified here
// (no implementation-defined std:: distributions).
class RngStream {
 public:
  RngStream() : state_(0x9e3779b97f4a7c15ull) {}
  explicit RngStream(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  // Box-Muller without a cached spare: each call consumes two uniforms,
  // which keeps the stream state a single serializable word.
  double gaussian();

  // Uniform index in [0, n). n must be > 0.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
  }

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

 private:
  std::uint64_t state_;
};

std::uint64_t derive_seed(std::uint64_t root, std::string_view name);
std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::uint64_t index);

inline RngStream derive_stream(std::uint64_t root, std::string_view name) {
  return RngStream(derive_seed(root, name));
}
inline RngStream derive_stream(std::uint64_t root, std::string_view name, std::uint64_t index) {
  return RngStream(derive_seed(root, name, index));
}

// Named persistent streams for the optimization loop; states are part of a
// checkpoint so resumed runs replay the exact sequence.
class StreamRegistry {
 public:
  explicit StreamRegistry(std::uint64_t root = 0) : root_(root) {}

  RngStream& get(const std::string& name) {
    auto it = streams_.find(name);
    if (it == streams_.end()) {
      it = streams_.emplace(name, RngStream(derive_seed(root_, name))).first;
    }
    return it->second;
  }

  std::uint64_t root() const { return root_; }
  const std::map<std::string, RngStream>& streams() const { return streams_; }
  void restore(const std::string& name, std::uint64_t state) { streams_[name] = RngStream(state); }

 private:
  std::uint64_t root_;
  std::map<std::string, RngStream> streams_;
};

}  // namespace labo
