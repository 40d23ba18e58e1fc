#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace labo {

inline constexpr std::size_t kParamDim = 185;
inline constexpr std::size_t kMorphologyDim = 122;
inline constexpr std::size_t kControlDim = 63;
inline constexpr std::size_t kControlPerType = 21;
inline constexpr int kMaxFingers = 6;
inline constexpr int kMinFingers = 2;
inline constexpr int kMaxSegments = 6;
inline constexpr int kMinSegments = 2;
// 6 fingers x 8 (height, radius) slot pairs. Only the first
// segments_per_finger[i] pairs of finger i are decoded; the rest are carried
// in the vector but ignored, which keeps the full 185-dim layout regular.
inline constexpr std::size_t kShapeSlotsPerFinger = 8;

struct LayoutBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
  double lo = 0.0;
  double hi = 1.0;
  bool integer = false;
};

// Named dimension blocks of the raw design vector. Fixed for this project;
// serialized into every run log so logs are self-describing.
struct DesignLayout {
  std::vector<LayoutBlock> blocks;

  static const DesignLayout& standard();

  const LayoutBlock& block(const std::string& name) const;
  std::size_t total_length() const;

  nlohmann::json schema() const;
};

// A point in the raw design space: 185 reals, each in [0, 1].
struct ParamVector {
  std::vector<double> values;

  ParamVector() : values(kParamDim, 0.0) {}
  explicit ParamVector(std::vector<double> v);

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::size_t size() const { return values.size(); }

  // Throws MalformedVector if the length or any element is out of contract.
  void validate() const;
};

double affine_map(double v, double lo, double hi);
int integer_map(double v, int lo, int hi);

}  // namespace labo
