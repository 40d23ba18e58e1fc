#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "labo/geom/shapes.hpp"
#include "labo/geom/vec3.hpp"

namespace labo {

enum class ObjectKind { kSphere, kBox, kThinPlate, kConvexPoly, kTriMesh };
const char* to_string(ObjectKind k);
ObjectKind object_kind_from_string(const std::string& s);

enum class ComplexityBin { kLow, kMedium, kHigh };
const char* to_string(ComplexityBin b);

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

// A benchmark object. Contact geometry is the analytic primitive (sphere),
// the corner polytope (box/plate), the generating hull (convex polyhedra) or
// the raw triangles (imported meshes); vertex_count is the tessellation
// count used for complexity binning.
struct ObjectModel {
  std::string id;
  ObjectKind kind = ObjectKind::kSphere;
  int vertex_count = 0;
  double scale = 1.0;
  double mass = 1.0;
  Pose initial_pose;

  double radius = 0.0;                 // sphere
  Vec3 half_extents{0.5, 0.5, 0.5};    // box / thin plate
  std::vector<Vec3> hull_points;       // convex polyhedron (local frame)
  TriMesh mesh;                        // imported mesh (local frame)

  // Radius of the bounding sphere around the local origin.
  double bounding_radius() const;

  nlohmann::json to_json() const;
  static ObjectModel from_json(const nlohmann::json& j);
};

inline constexpr int kComplexityLowBelow = 5000;   // < 5000 vertices: low
inline constexpr int kComplexityHighAbove = 7000;  // > 7000 vertices: high
ComplexityBin complexity_bin(const ObjectModel& obj);

// Procedural generator. kind selects the family; objects differ in size,
// mass and tessellation count, all drawn from the seeded stream.
std::vector<ObjectModel> generate_objects(ObjectKind kind, int count, std::uint64_t seed);

// Mixed set for power/pinch tasks (spheres, boxes, convex polyhedra).
std::vector<ObjectModel> generate_graspable_mix(int count, std::uint64_t seed);

// Wavefront OBJ subset: `v` and triangular `f` statements. Throws
// UnsupportedMesh on non-triangles or a non-watertight edge structure.
ObjectModel import_wavefront(const std::string& path);

}  // namespace labo
