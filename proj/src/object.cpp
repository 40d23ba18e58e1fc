#include "labo/eval/object.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "labo/core/errors.hpp"
#include "labo/core/rng.hpp"

namespace labo {

const char* to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::kSphere: return "sphere";
    case ObjectKind::kBox: return "box";
    case ObjectKind::kThinPlate: return "thin-plate";
    case ObjectKind::kConvexPoly: return "convex-poly";
    case ObjectKind::kTriMesh: return "mesh";
  }
  return "?";
}

ObjectKind object_kind_from_string(const std::string& s) {
  if (s == "sphere") return ObjectKind::kSphere;
  if (s == "box") return ObjectKind::kBox;
  if (s == "thin-plate") return ObjectKind::kThinPlate;
  if (s == "convex-poly") return ObjectKind::kConvexPoly;
  if (s == "mesh") return ObjectKind::kTriMesh;
  throw Error("unknown object kind: " + s);
}

const char* to_string(ComplexityBin b) {
  switch (b) {
    case ComplexityBin::kLow: return "low";
    case ComplexityBin::kMedium: return "medium";
    case ComplexityBin::kHigh: return "high";
  }
  return "?";
}

ComplexityBin complexity_bin(const ObjectModel& obj) {
  if (obj.vertex_count < kComplexityLowBelow) return ComplexityBin::kLow;
  if (obj.vertex_count > kComplexityHighAbove) return ComplexityBin::kHigh;
  return ComplexityBin::kMedium;
}

double ObjectModel::bounding_radius() const {
  switch (kind) {
    case ObjectKind::kSphere:
      return radius;
    case ObjectKind::kBox:
    case ObjectKind::kThinPlate:
      return norm(half_extents);
    case ObjectKind::kConvexPoly: {
      double r2 = 0.0;
      for (const auto& p : hull_points) r2 = std::max(r2, norm2(p));
      return std::sqrt(r2);
    }
    case ObjectKind::kTriMesh: {
      double r2 = 0.0;
      for (const auto& p : mesh.vertices) r2 = std::max(r2, norm2(p));
      return std::sqrt(r2);
    }
  }
  return 0.0;
}

nlohmann::json ObjectModel::to_json() const {
  nlohmann::json j{{"id", id},
                   {"kind", to_string(kind)},
                   {"vertex_count", vertex_count},
                   {"scale", scale},
                   {"mass", mass},
                   {"position", {initial_pose.position.x, initial_pose.position.y,
                                 initial_pose.position.z}},
                   {"orientation", {initial_pose.orientation.w, initial_pose.orientation.x,
                                    initial_pose.orientation.y, initial_pose.orientation.z}}};
  switch (kind) {
    case ObjectKind::kSphere:
      j["radius"] = radius;
      break;
    case ObjectKind::kBox:
    case ObjectKind::kThinPlate:
      j["half_extents"] = {half_extents.x, half_extents.y, half_extents.z};
      break;
    case ObjectKind::kConvexPoly: {
      nlohmann::json pts = nlohmann::json::array();
      for (const auto& p : hull_points) pts.push_back({p.x, p.y, p.z});
      j["hull_points"] = pts;
      break;
    }
    case ObjectKind::kTriMesh: {
      nlohmann::json vs = nlohmann::json::array(), fs = nlohmann::json::array();
      for (const auto& p : mesh.vertices) vs.push_back({p.x, p.y, p.z});
      for (const auto& f : mesh.faces) fs.push_back({f[0], f[1], f[2]});
      j["vertices"] = vs;
      j["faces"] = fs;
      break;
    }
  }
  return j;
}

ObjectModel ObjectModel::from_json(const nlohmann::json& j) {
  ObjectModel o;
  o.id = j.at("id").get<std::string>();
  o.kind = object_kind_from_string(j.at("kind").get<std::string>());
  o.vertex_count = j.at("vertex_count").get<int>();
  o.scale = j.at("scale").get<double>();
  o.mass = j.at("mass").get<double>();
  const auto& p = j.at("position");
  o.initial_pose.position = {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
  const auto& q = j.at("orientation");
  o.initial_pose.orientation = {q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                                q[3].get<double>()};
  switch (o.kind) {
    case ObjectKind::kSphere:
      o.radius = j.at("radius").get<double>();
      break;
    case ObjectKind::kBox:
    case ObjectKind::kThinPlate: {
      const auto& h = j.at("half_extents");
      o.half_extents = {h[0].get<double>(), h[1].get<double>(), h[2].get<double>()};
      break;
    }
    case ObjectKind::kConvexPoly:
      for (const auto& pt : j.at("hull_points")) {
        o.hull_points.push_back({pt[0].get<double>(), pt[1].get<double>(), pt[2].get<double>()});
      }
      break;
    case ObjectKind::kTriMesh:
      for (const auto& pt : j.at("vertices")) {
        o.mesh.vertices.push_back({pt[0].get<double>(), pt[1].get<double>(), pt[2].get<double>()});
      }
      for (const auto& f : j.at("faces")) {
        o.mesh.faces.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>()});
      }
      break;
  }
  return o;
}

namespace {

// Tessellation counts used only for complexity binning; drawn to cover the
// three bins. Icosphere subdivision counts appear for spheres.
int draw_vertex_count(RngStream& rng, ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kSphere: {
      static constexpr int kIcosphere[] = {642, 2562, 10242};
      const double u = rng.uniform01();
      return kIcosphere[u < 0.4 ? 0 : (u < 0.8 ? 1 : 2)];
    }
    case ObjectKind::kBox:
    case ObjectKind::kThinPlate:
      return 8;
    default: {
      const double u = rng.uniform01();
      if (u < 0.34) return 600 + static_cast<int>(rng.uniform01() * 4000.0);   // low
      if (u < 0.67) return 5000 + static_cast<int>(rng.uniform01() * 2000.0);  // medium
      return 7001 + static_cast<int>(rng.uniform01() * 5000.0);                // high
    }
  }
}

ObjectModel make_sphere(RngStream& rng, int index) {
  ObjectModel o;
  o.kind = ObjectKind::kSphere;
  o.radius = rng.uniform(0.6, 1.3);
  o.scale = o.radius;
  o.mass = rng.uniform(0.5, 2.0);
  o.vertex_count = draw_vertex_count(rng, o.kind);
  o.id = "sphere-" + std::to_string(index);
  return o;
}

ObjectModel make_box(RngStream& rng, int index) {
  ObjectModel o;
  o.kind = ObjectKind::kBox;
  o.half_extents = {rng.uniform(0.4, 1.0), rng.uniform(0.4, 1.0), rng.uniform(0.4, 1.0)};
  o.scale = norm(o.half_extents);
  o.mass = rng.uniform(0.5, 2.0);
  o.vertex_count = draw_vertex_count(rng, o.kind);
  o.id = "box-" + std::to_string(index);
  return o;
}

ObjectModel make_plate(RngStream& rng, int index) {
  ObjectModel o;
  o.kind = ObjectKind::kThinPlate;
  // Thin along x, extended in y and z; stands upright for lateral grasps.
  o.half_extents = {rng.uniform(0.1, 0.25), rng.uniform(0.8, 1.8), rng.uniform(0.8, 1.6)};
  o.scale = norm(o.half_extents);
  o.mass = rng.uniform(0.3, 1.5);
  o.vertex_count = draw_vertex_count(rng, o.kind);
  o.id = "plate-" + std::to_string(index);
  return o;
}

ObjectModel make_convex_poly(RngStream& rng, int index) {
  ObjectModel o;
  o.kind = ObjectKind::kConvexPoly;
  // Support points on a randomly squashed sphere; the conic hull of 24-48
  // directions gives irregular but convex shapes.
  const int n = 24 + static_cast<int>(rng.uniform01() * 24.0);
  const double rx = rng.uniform(0.5, 1.2);
  const double ry = rng.uniform(0.5, 1.2);
  const double rz = rng.uniform(0.5, 1.2);
  o.hull_points.reserve(n);
  for (int i = 0; i < n; ++i) {
    // Uniform direction via gaussian normalization.
    Vec3 d{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    d = normalized(d);
    const double bump = rng.uniform(0.85, 1.15);
    o.hull_points.push_back({d.x * rx * bump, d.y * ry * bump, d.z * rz * bump});
  }
  o.scale = std::max({rx, ry, rz});
  o.mass = rng.uniform(0.5, 2.0);
  o.vertex_count = draw_vertex_count(rng, o.kind);
  o.id = "poly-" + std::to_string(index);
  return o;
}

}  // namespace

std::vector<ObjectModel> generate_objects(ObjectKind kind, int count, std::uint64_t seed) {
  if (count <= 0) throw Error("generate_objects: count must be positive");
  std::vector<ObjectModel> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    RngStream rng = derive_stream(seed, "object", static_cast<std::uint64_t>(i));
    switch (kind) {
      case ObjectKind::kSphere: out.push_back(make_sphere(rng, i)); break;
      case ObjectKind::kBox: out.push_back(make_box(rng, i)); break;
      case ObjectKind::kThinPlate: out.push_back(make_plate(rng, i)); break;
      case ObjectKind::kConvexPoly: out.push_back(make_convex_poly(rng, i)); break;
      case ObjectKind::kTriMesh: throw Error("mesh objects come from import, not generation");
    }
  }
  return out;
}

std::vector<ObjectModel> generate_graspable_mix(int count, std::uint64_t seed) {
  if (count <= 0) throw Error("generate_graspable_mix: count must be positive");
  std::vector<ObjectModel> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    RngStream rng = derive_stream(seed, "mix-object", static_cast<std::uint64_t>(i));
    const double u = rng.uniform01();
    if (u < 0.4) {
      out.push_back(make_sphere(rng, i));
    } else if (u < 0.7) {
      out.push_back(make_box(rng, i));
    } else {
      out.push_back(make_convex_poly(rng, i));
    }
  }
  return out;
}

ObjectModel import_wavefront(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnsupportedMesh("cannot open mesh file: " + path);

  TriMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) throw UnsupportedMesh("malformed vertex line: " + line);
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // Accept "i", "i/..", "i//.." forms; only the vertex index is used.
        const std::size_t slash = tok.find('/');
        const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
        idx.push_back(std::stoi(head));
      }
      if (idx.size() != 3) throw UnsupportedMesh("only triangular faces are supported");
      std::array<int, 3> f{};
      for (int k = 0; k < 3; ++k) {
        int i = idx[k];
        if (i < 0) i = static_cast<int>(mesh.vertices.size()) + i + 1;
        if (i < 1 || i > static_cast<int>(mesh.vertices.size())) {
          throw UnsupportedMesh("face index out of range");
        }
        f[k] = i - 1;
      }
      mesh.faces.push_back(f);
    }
  }
  if (mesh.vertices.empty() || mesh.faces.empty()) {
    throw UnsupportedMesh("mesh has no geometry: " + path);
  }

  // Watertightness: in a closed orientable triangle mesh every undirected
  // edge is shared by exactly two faces.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      int a = f[k], b = f[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      edge_count[{a, b}]++;
    }
  }
  for (const auto& [edge, n] : edge_count) {
    if (n != 2) {
      throw UnsupportedMesh("mesh is not watertight (edge " + std::to_string(edge.first) + "-" +
                            std::to_string(edge.second) + " on " + std::to_string(n) + " faces)");
    }
  }

  // Center on the centroid so the local origin is inside the object.
  Vec3 centroid{0, 0, 0};
  for (const auto& v : mesh.vertices) centroid += v;
  centroid = centroid / static_cast<double>(mesh.vertices.size());
  for (auto& v : mesh.vertices) v -= centroid;

  ObjectModel o;
  o.kind = ObjectKind::kTriMesh;
  o.mesh = std::move(mesh);
  o.vertex_count = static_cast<int>(o.mesh.vertices.size());
  o.scale = o.bounding_radius();
  o.mass = 1.0;
  o.id = path;
  return o;
}

}  // namespace labo
