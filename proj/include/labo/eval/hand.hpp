#pragma once

#include <vector>

#include "labo/design/decode.hpp"
#include "labo/eval/object.hpp"
#include "labo/geom/shapes.hpp"
#include "labo/geom/vec3.hpp"

namespace labo {

// Fixed scene constants (desk plane at z = 0, units follow the morphology
// ranges: segment heights 1-1.5, radii 0.2-0.4).
inline constexpr double kPalmRadius = 2.0;
inline constexpr double kPalmHalfHeight = 0.1;
inline constexpr double kJointLimitLo = -0.6;  // rad, slight splay allowed
inline constexpr double kJointLimitHi = 2.4;   // rad

// World placement of the palm and per-finger frames for one grasp type.
// Fingers rest along the palm normal; positive joint angles curl them toward
// the palm axis.
struct HandModel {
  HandMorphology morph;
  GraspType type = GraspType::kPower;

  Vec3 origin;       // palm center
  Vec3 ex, ey, ez;   // right-handed; ez = palm normal = finger rest direction
  struct FingerFrame {
    Vec3 mount;    // on the palm rim, top face
    Vec3 radial;   // outward from the palm axis
    Vec3 tangent;  // joint axis direction
  };
  std::vector<FingerFrame> fingers;
  double max_reach = 0.0;   // longest finger chain incl. fingertip
  Pose object_start;        // object pose at episode start

  // Placement is canonical per grasp type: power rests the object on the
  // upturned palm, pinch hangs the palm above the object on the desk,
  // lateral faces an upright plate. base_height fine-tunes the approach.
  static HandModel build(const HandMorphology& morph, GraspType type, const ObjectModel& obj);
};

// One collision body of the hand: segments and fingertips are capsules
// (fingertip: zero-length segment), link_index == segment count marks the
// fingertip. The palm disk is handled separately.
struct HandLink {
  Vec3 a, b;
  double radius = 0.0;
  int finger = 0;
  int link_index = 0;
  bool is_tip = false;
};

// Joint state of the closing hand. Joints freeze permanently at a joint
// limit or when a link at or distal to them reaches the object.
class HandState {
 public:
  explicit HandState(const HandModel& model);

  const HandModel& model() const { return *model_; }
  const std::vector<HandLink>& links() const { return links_; }
  int joint_count(int finger) const { return static_cast<int>(joints_[finger].size()); }
  double joint_angle(int finger, int j) const { return joints_[finger][j].q; }
  bool frozen(int finger, int j) const { return joints_[finger][j].frozen; }
  bool all_frozen() const;

  // Velocity command for joint j of a finger under the plan's grouping:
  // joint 0 <- palm command, last joint <- tip command, others <- shared
  // intermediate command.
  double joint_velocity(int finger, int j, const TypeCommands& cmd) const;

  // Integrate one step; joints clamp and freeze at limits. Returns true if
  // any joint moved.
  bool integrate(const TypeCommands& cmd, double dt);

  // Freeze joints 0..k of a finger (proximal chain stops when link k rests
  // on the object; distal joints keep wrapping).
  void freeze_through(int finger, int link_index);

  void forward_kinematics();

 private:
  struct Joint {
    double q = 0.0;
    bool frozen = false;
  };
  const HandModel* model_;
  std::vector<std::vector<Joint>> joints_;
  std::vector<HandLink> links_;
};

ConvexCore palm_disk(const HandModel& model);

// Convex core of the object at a world pose (mesh objects are handled
// per-triangle elsewhere).
ConvexCore object_core(const ObjectModel& obj, const Pose& pose);

// Distance from a world-frame segment to the object surface (handles all
// object kinds, including per-triangle mesh queries). Returns core closest
// points; subtract the capsule radius for the surface distance.
ClosestPair object_distance(const ObjectModel& obj, const Pose& pose, const Vec3& a,
                            const Vec3& b);

}  // namespace labo
