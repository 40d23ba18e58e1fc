#pragma once

#include <cstddef>
#include <vector>

#include "labo/geom/vec3.hpp"

namespace labo {

// Convex core for GJK. A collision shape is a core swept by a margin
// (capsule = segment + radius, sphere = point + radius); boxes, plates and
// convex hulls are polytopes with zero margin; the palm is a squat disk.
struct ConvexCore {
  enum class Kind { kPoint, kSegment, kPolytope, kDisk };

  Kind kind = Kind::kPoint;
  std::vector<Vec3> pts;   // point: 1, segment: 2, polytope: n
  Vec3 axis{0, 0, 1};      // disk only
  double radius = 0.0;     // disk only
  double half_height = 0.0;  // disk only

  static ConvexCore point(const Vec3& p) { return {Kind::kPoint, {p}, {}, 0.0, 0.0}; }
  static ConvexCore segment(const Vec3& a, const Vec3& b) {
    return {Kind::kSegment, {a, b}, {}, 0.0, 0.0};
  }
  static ConvexCore polytope(std::vector<Vec3> v) {
    return {Kind::kPolytope, std::move(v), {}, 0.0, 0.0};
  }
  static ConvexCore disk(const Vec3& center, const Vec3& axis, double radius, double half_height) {
    return {Kind::kDisk, {center}, axis, radius, half_height};
  }

  Vec3 support(const Vec3& dir) const;
};

struct ClosestPair {
  double distance = 0.0;  // distance between cores; 0 when they intersect
  Vec3 on_a;
  Vec3 on_b;
};

// GJK closest-point query between two convex cores. Deterministic: fixed
// iteration cap and tolerances, no randomness.
ClosestPair gjk_closest(const ConvexCore& a, const ConvexCore& b);

// Closest points between two segments [p1,q1], [p2,q2].
ClosestPair closest_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2,
                                    const Vec3& q2);

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Closest points between a segment and a triangle.
ClosestPair closest_segment_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b,
                                     const Vec3& c);

}  // namespace labo
