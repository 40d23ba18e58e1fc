#include "labo/eval/hand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace labo {

namespace {

// Rotate a local point into the world frame of a pose.
Vec3 rotate(const Quat& q, const Vec3& v) {
  const Vec3 u{q.x, q.y, q.z};
  const Vec3 t = 2.0 * cross(u, v);
  return v + q.w * t + cross(u, t);
}

Vec3 to_world(const Pose& pose, const Vec3& local) {
  return pose.position + rotate(pose.orientation, local);
}

// Height of the lowest point of the object below its local origin, along a
// world direction "down" (unit). Used to rest objects on surfaces.
double support_extent(const ObjectModel& obj, const Vec3& down) {
  switch (obj.kind) {
    case ObjectKind::kSphere:
      return obj.radius;
    case ObjectKind::kBox:
    case ObjectKind::kThinPlate:
      return std::fabs(down.x) * obj.half_extents.x + std::fabs(down.y) * obj.half_extents.y +
             std::fabs(down.z) * obj.half_extents.z;
    case ObjectKind::kConvexPoly: {
      double best = 0.0;
      for (const auto& p : obj.hull_points) best = std::max(best, dot(p, down));
      return best;
    }
    case ObjectKind::kTriMesh: {
      double best = 0.0;
      for (const auto& p : obj.mesh.vertices) best = std::max(best, dot(p, down));
      return best;
    }
  }
  return 0.0;
}

}  // namespace

HandModel HandModel::build(const HandMorphology& morph, GraspType type, const ObjectModel& obj) {
  HandModel m;
  m.morph = morph;
  m.type = type;

  for (int f = 0; f < morph.n_fingers; ++f) {
    double reach = 2.0 * morph.fingertip_radius[f];
    for (const auto& s : morph.segments[f]) reach += s.height;
    m.max_reach = std::max(m.max_reach, reach);
  }

  const double bh = morph.base_height;  // [-1, 1]
  const double rest = support_extent(obj, {0, 0, -1});
  m.object_start.orientation = Quat::identity();
  switch (type) {
    case GraspType::kPower: {
      // Palm up; the object rests on the palm top face, on the palm axis.
      m.ex = {1, 0, 0};
      m.ey = {0, 1, 0};
      m.ez = {0, 0, 1};
      m.origin = {0, 0, 1.0 + 0.5 * bh};
      m.object_start.position = m.origin + Vec3{0, 0, kPalmHalfHeight + rest};
      break;
    }
    case GraspType::kPinch: {
      // Palm down above the object resting on the desk; fingers hang around
      // it and curl underneath.
      m.ex = {1, 0, 0};
      m.ey = {0, -1, 0};
      m.ez = {0, 0, -1};
      m.object_start.position = {0, 0, rest};
      const double obj_top = rest + support_extent(obj, {0, 0, 1});
      const double gap = std::max(0.3, m.max_reach * (0.55 + 0.10 * bh));
      m.origin = {0, 0, obj_top + gap};
      break;
    }
    case GraspType::kLateral: {
      // Palm vertical with normal +y; the plate stands upright at the
      // origin and the fingers close on its faces.
      m.ex = {0, 0, 1};
      m.ey = {1, 0, 0};
      m.ez = {0, 1, 0};
      m.object_start.position = {0, 0, rest};
      const double near_edge = support_extent(obj, {0, -1, 0});
      const double approach = std::max(0.4, m.max_reach * (0.55 + 0.10 * bh));
      m.origin = {0, -(near_edge + approach), std::max(rest, 1.1)};
      break;
    }
  }

  m.fingers.resize(morph.n_fingers);
  for (int f = 0; f < morph.n_fingers; ++f) {
    const double a = morph.mount_angles[f];
    const Vec3 radial = std::cos(a) * m.ex + std::sin(a) * m.ey;
    FingerFrame fr;
    fr.radial = radial;
    fr.tangent = cross(m.ez, radial);
    fr.mount = m.origin + kPalmRadius * radial + kPalmHalfHeight * m.ez;
    m.fingers[f] = fr;
  }
  return m;
}

HandState::HandState(const HandModel& model) : model_(&model) {
  const auto& morph = model.morph;
  joints_.resize(morph.n_fingers);
  for (int f = 0; f < morph.n_fingers; ++f) {
    joints_[f].resize(morph.segments_per_finger[f]);
  }
  forward_kinematics();
}

bool HandState::all_frozen() const {
  for (const auto& finger : joints_) {
    for (const auto& j : finger) {
      if (!j.frozen) return false;
    }
  }
  return true;
}

double HandState::joint_velocity(int finger, int j, const TypeCommands& cmd) const {
  const int last = static_cast<int>(joints_[finger].size()) - 1;
  if (j == 0) return cmd.palm[finger];
  if (j == last) return cmd.tip[finger];
  return cmd.mid[finger];
}

bool HandState::integrate(const TypeCommands& cmd, double dt) {
  bool moved = false;
  for (std::size_t f = 0; f < joints_.size(); ++f) {
    for (std::size_t j = 0; j < joints_[f].size(); ++j) {
      Joint& joint = joints_[f][j];
      if (joint.frozen) continue;
      const double v = joint_velocity(static_cast<int>(f), static_cast<int>(j), cmd);
      if (v == 0.0) continue;
      double q = joint.q + v * dt;
      if (q <= kJointLimitLo) {
        q = kJointLimitLo;
        joint.frozen = true;
      } else if (q >= kJointLimitHi) {
        q = kJointLimitHi;
        joint.frozen = true;
      }
      if (q != joint.q) moved = true;
      joint.q = q;
    }
  }
  if (moved) forward_kinematics();
  return moved;
}

void HandState::freeze_through(int finger, int link_index) {
  const int last = static_cast<int>(joints_[finger].size()) - 1;
  const int upto = std::min(link_index, last);
  for (int j = 0; j <= upto; ++j) joints_[finger][j].frozen = true;
}

void HandState::forward_kinematics() {
  links_.clear();
  const auto& morph = model_->morph;
  for (int f = 0; f < morph.n_fingers; ++f) {
    const auto& frame = model_->fingers[f];
    Vec3 p = frame.mount;
    double theta = 0.0;
    const int n_seg = morph.segments_per_finger[f];
    Vec3 dir = model_->ez;
    for (int s = 0; s < n_seg; ++s) {
      theta += joints_[f][s].q;
      dir = std::cos(theta) * model_->ez - std::sin(theta) * frame.radial;
      const Vec3 q = p + morph.segments[f][s].height * dir;
      links_.push_back({p, q, morph.segments[f][s].radius, f, s, false});
      p = q;
    }
    const double tr = morph.fingertip_radius[f];
    const Vec3 c = p + tr * dir;
    links_.push_back({c, c, tr, f, n_seg, true});
  }
}

ConvexCore palm_disk(const HandModel& model) {
  return ConvexCore::disk(model.origin, model.ez, kPalmRadius, kPalmHalfHeight);
}

ConvexCore object_core(const ObjectModel& obj, const Pose& pose) {
  switch (obj.kind) {
    case ObjectKind::kSphere:
      return ConvexCore::point(pose.position);
    case ObjectKind::kBox:
    case ObjectKind::kThinPlate: {
      std::vector<Vec3> corners;
      corners.reserve(8);
      const Vec3 h = obj.half_extents;
      for (int sx : {-1, 1}) {
        for (int sy : {-1, 1}) {
          for (int sz : {-1, 1}) {
            corners.push_back(to_world(pose, Vec3{sx * h.x, sy * h.y, sz * h.z}));
          }
        }
      }
      return ConvexCore::polytope(std::move(corners));
    }
    case ObjectKind::kConvexPoly: {
      std::vector<Vec3> pts;
      pts.reserve(obj.hull_points.size());
      for (const auto& p : obj.hull_points) pts.push_back(to_world(pose, p));
      return ConvexCore::polytope(std::move(pts));
    }
    case ObjectKind::kTriMesh:
      // Meshes are queried per triangle; the core is only used as a coarse
      // fallback (bounding points).
      return ConvexCore::point(pose.position);
  }
  return ConvexCore::point(pose.position);
}

ClosestPair object_distance(const ObjectModel& obj, const Pose& pose, const Vec3& a,
                            const Vec3& b) {
  if (obj.kind == ObjectKind::kTriMesh) {
    ClosestPair best;
    best.distance = std::numeric_limits<double>::infinity();
    for (const auto& f : obj.mesh.faces) {
      const Vec3 va = to_world(pose, obj.mesh.vertices[f[0]]);
      const Vec3 vb = to_world(pose, obj.mesh.vertices[f[1]]);
      const Vec3 vc = to_world(pose, obj.mesh.vertices[f[2]]);
      const ClosestPair r = closest_segment_triangle(a, b, va, vb, vc);
      if (r.distance < best.distance) best = r;
    }
    return best;
  }
  if (obj.kind == ObjectKind::kSphere) {
    // Segment-point with the sphere radius folded into the distance.
    const ClosestPair core = closest_segment_segment(a, b, pose.position, pose.position);
    ClosestPair out;
    out.on_a = core.on_a;
    const Vec3 d = pose.position - core.on_a;
    const double dist = norm(d);
    out.distance = std::max(0.0, dist - obj.radius);
    out.on_b = dist > 1e-12 ? pose.position - (obj.radius / dist) * d : pose.position;
    return out;
  }
  const ConvexCore seg = ConvexCore::segment(a, b);
  const ConvexCore oc = object_core(obj, pose);
  return gjk_closest(seg, oc);
}

}  // namespace labo
