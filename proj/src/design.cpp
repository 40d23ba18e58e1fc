#include "labo/design/decode.hpp"
#include "labo/design/layout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "labo/core/errors.hpp"

namespace labo {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

ParamVector::ParamVector(std::vector<double> v) : values(std::move(v)) { validate(); }

void ParamVector::validate() const {
  if (values.size() != kParamDim) {
    throw MalformedVector("parameter vector has length " + std::to_string(values.size()) +
                          ", expected " + std::to_string(kParamDim));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "element %zu = %.17g outside [0,1]", i, v);
      throw MalformedVector(buf);
    }
  }
}

double affine_map(double v, double lo, double hi) { return lo + v * (hi - lo); }

int integer_map(double v, int lo, int hi) {
  const int span = hi - lo + 1;
  const int mapped = lo + static_cast<int>(std::floor(v * static_cast<double>(span)));
  return std::min(mapped, hi);
}

const DesignLayout& DesignLayout::standard() {
  static const DesignLayout layout = [] {
    DesignLayout l;
    l.blocks = {
        {"base_height", 0, 1, -1.0, 1.0, false},
        {"segment_mass", 1, 1, 1.0, 5.0, false},
        {"finger_count", 2, 1, 2.0, 6.0, true},
        {"segment_counts", 3, 6, 2.0, 6.0, true},
        {"segment_shapes", 9, 96, 0.0, 1.0, false},  // (height, radius) pairs, mapped per field
        {"fingertip_shapes", 105, 6, 0.2, 0.4, false},
        {"friction_joint", 111, 5, 0.0, 1.0, false},  // per-dimension ranges, see decode()
        {"mount_locations", 116, 6, 0.0, kTwoPi, false},
        {"control", 122, 63, 0.0, 1.0, false},
    };
    return l;
  }();
  return layout;
}

const LayoutBlock& DesignLayout::block(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return b;
  }
  throw Error("unknown layout block: " + name);
}

std::size_t DesignLayout::total_length() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.length;
  return n;
}

nlohmann::json DesignLayout::schema() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : blocks) {
    arr.push_back({{"name", b.name},
                   {"offset", b.offset},
                   {"length", b.length},
                   {"lo", b.lo},
                   {"hi", b.hi},
                   {"integer", b.integer}});
  }
  return arr;
}

const char* to_string(GraspType t) {
  switch (t) {
    case GraspType::kPower: return "power";
    case GraspType::kPinch: return "pinch";
    case GraspType::kLateral: return "lateral";
  }
  return "?";
}

GraspType grasp_type_from_string(const std::string& s) {
  if (s == "power") return GraspType::kPower;
  if (s == "pinch") return GraspType::kPinch;
  if (s == "lateral") return GraspType::kLateral;
  throw Error("unknown grasp type: " + s);
}

namespace {

TypeCommands decode_type_commands(const double* raw, double v_lim) {
  // 21 dims per grasp type: 6 palm-joint commands, 6 shared intermediate
  // commands, 6 tip commands, 3 group gain multipliers.
  TypeCommands c;
  c.gains = {affine_map(raw[18], 0.5, 1.5), affine_map(raw[19], 0.5, 1.5),
             affine_map(raw[20], 0.5, 1.5)};
  auto map_cmd = [v_lim](double v, double gain) {
    const double cmd = (2.0 * v - 1.0) * v_lim * gain;
    return std::clamp(cmd, -v_lim, v_lim);
  };
  for (int i = 0; i < kMaxFingers; ++i) {
    c.palm[i] = map_cmd(raw[i], c.gains[0]);
    c.mid[i] = map_cmd(raw[6 + i], c.gains[1]);
    c.tip[i] = map_cmd(raw[12 + i], c.gains[2]);
  }
  return c;
}

}  // namespace

DecodeResult decode(const ParamVector& theta, const DesignLayout& layout, ControlMode mode) {
  theta.validate();
  if (layout.total_length() != kParamDim) {
    throw Error("layout does not cover the full parameter vector");
  }
  const auto& v = theta.values;

  HandMorphology m;
  m.base_height = affine_map(v[layout.block("base_height").offset], -1.0, 1.0);
  m.segment_mass = affine_map(v[layout.block("segment_mass").offset], 1.0, 5.0);
  m.n_fingers = integer_map(v[layout.block("finger_count").offset], kMinFingers, kMaxFingers);

  const std::size_t seg_counts_off = layout.block("segment_counts").offset;
  const std::size_t shapes_off = layout.block("segment_shapes").offset;
  const std::size_t tips_off = layout.block("fingertip_shapes").offset;
  const std::size_t mounts_off = layout.block("mount_locations").offset;

  m.segments_per_finger.resize(m.n_fingers);
  m.segments.resize(m.n_fingers);
  m.fingertip_radius.resize(m.n_fingers);
  m.mount_angles.resize(m.n_fingers);
  for (int f = 0; f < m.n_fingers; ++f) {
    const int n_seg = integer_map(v[seg_counts_off + f], kMinSegments, kMaxSegments);
    m.segments_per_finger[f] = n_seg;
    m.segments[f].resize(n_seg);
    for (int s = 0; s < n_seg; ++s) {
      const std::size_t base = shapes_off + 2 * kShapeSlotsPerFinger * f + 2 * s;
      m.segments[f][s].height = affine_map(v[base], 1.0, 1.5);
      m.segments[f][s].radius = affine_map(v[base + 1], 0.2, 0.4);
    }
    m.fingertip_radius[f] = affine_map(v[tips_off + f], 0.2, 0.4);
    const double ang = affine_map(v[mounts_off + f], 0.0, kTwoPi);
    m.mount_angles[f] = (ang >= kTwoPi) ? 0.0 : ang;
  }

  const std::size_t fj = layout.block("friction_joint").offset;
  m.lateral_friction = affine_map(v[fj + 0], 1.0, 5.0);
  m.spinning_friction = affine_map(v[fj + 1], 1.0, 5.0);
  m.joint_velocity_limit = affine_map(v[fj + 2], 0.1, 2.0);
  m.joint_damping = affine_map(v[fj + 3], 1.0, 1.1);
  m.joint_effort = affine_map(v[fj + 4], 500.0, 4000.0);

  if (auto rej = rejection_check(m)) return *rej;

  ControlPlan plan;
  plan.mode = mode;
  const std::size_t ctrl = layout.block("control").offset;
  for (int t = 0; t < 3; ++t) {
    plan.per_type[t] = decode_type_commands(&v[ctrl + kControlPerType * t], m.joint_velocity_limit);
  }
  return DecodedHand{std::move(m), plan};
}

std::optional<Rejection> rejection_check(const HandMorphology& morph) {
  const auto& a = morph.mount_angles;
  const double min_sep = kMinMountSeparationDeg * kTwoPi / 360.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      double d = std::fabs(a[i] - a[j]);
      d = std::fmod(d, kTwoPi);
      d = std::min(d, kTwoPi - d);
      if (d < min_sep) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "fingers %zu and %zu are %.3f deg apart", i, j,
                      d * 360.0 / kTwoPi);
        return Rejection{RejectionRule::kFingersTooClose, buf};
      }
    }
  }
  return std::nullopt;
}

double morphology_cost(const HandMorphology& morph) {
  double cost = (morph.n_fingers - 2) / 4.0;
  for (int n : morph.segments_per_finger) {
    cost += std::max(n - 3, 0) / 3.0;
  }
  return cost;
}

}  // namespace labo
