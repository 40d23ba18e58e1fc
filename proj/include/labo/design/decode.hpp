#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "labo/design/layout.hpp"

namespace labo {

enum class GraspType { kPower = 0, kPinch = 1, kLateral = 2 };
inline constexpr std::array<GraspType, 3> kGraspTypes = {GraspType::kPower, GraspType::kPinch,
                                                         GraspType::kLateral};
const char* to_string(GraspType t);
GraspType grasp_type_from_string(const std::string& s);

struct SegmentDims {
  double height = 0.0;  // [1, 1.5]
  double radius = 0.0;  // [0.2, 0.4]
};

// Physical hand description decoded from the morphology half of the vector.
struct HandMorphology {
  double base_height = 0.0;   // [-1, 1]
  double segment_mass = 0.0;  // [1, 5]
  int n_fingers = 0;          // {2..6}
  std::vector<int> segments_per_finger;            // n_fingers entries in {2..6}
  std::vector<std::vector<SegmentDims>> segments;  // [finger][segment]
  std::vector<double> fingertip_radius;            // [0.2, 0.4] per finger
  double lateral_friction = 0.0;                   // [1, 5]
  double spinning_friction = 0.0;                  // [1, 5]
  double joint_velocity_limit = 0.0;               // [0.1, 2]
  double joint_damping = 0.0;                      // [1, 1.1]
  double joint_effort = 0.0;                       // [500, 4000]
  std::vector<double> mount_angles;                // [0, 2*pi) on the palm rim
};

// Open-loop commands for one grasp type. Joint-group velocities already have
// the group gains folded in and are clamped to +/- joint_velocity_limit.
struct TypeCommands {
  std::array<double, kMaxFingers> palm{};  // rad/s, per finger
  std::array<double, kMaxFingers> mid{};   // rad/s, shared by intermediate joints
  std::array<double, kMaxFingers> tip{};   // rad/s, per finger
  std::array<double, 3> gains{};           // [0.5, 1.5], recorded for the log
};

enum class ControlMode { kVelocity, kTorque };

struct ControlPlan {
  std::array<TypeCommands, 3> per_type;
  ControlMode mode = ControlMode::kVelocity;

  const TypeCommands& commands(GraspType t) const { return per_type[static_cast<int>(t)]; }
};

enum class RejectionRule { kFingersTooClose };

struct Rejection {
  RejectionRule rule = RejectionRule::kFingersTooClose;
  std::string detail;
};

struct DecodedHand {
  HandMorphology morphology;
  ControlPlan plan;
};

using DecodeResult = std::variant<DecodedHand, Rejection>;

inline constexpr double kMinMountSeparationDeg = 12.0;

// Deterministic map from the raw vector to a hand + control plan, or a
// Rejection when the mount-angle rule fails. Throws MalformedVector on
// out-of-contract input.
DecodeResult decode(const ParamVector& theta, const DesignLayout& layout,
                    ControlMode mode = ControlMode::kVelocity);

// Pass iff the minimum pairwise circular distance between mount angles is
// >= 12 degrees.
std::optional<Rejection> rejection_check(const HandMorphology& morph);

// (n_f - 2)/4 + sum_i max(n_si - 3, 0)/3. The clamp covers the 2-segment
// fingers the decoder permits.
double morphology_cost(const HandMorphology& morph);

}  // namespace labo
