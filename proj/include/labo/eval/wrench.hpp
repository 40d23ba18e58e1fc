#pragma once

#include <array>
#include <vector>

#include "labo/geom/vec3.hpp"

namespace labo {

// One frictional point contact between the hand and the object. The normal
// is the unit direction in which the link presses into the object.
struct Contact {
  Vec3 point;
  Vec3 normal;
};

inline constexpr int kConeEdges = 8;

// Linearized contact model: each contact contributes kConeEdges wrench
// columns (force edge of the Coulomb cone; torque about the given center of
// mass). A wrench is attainable iff it is a nonnegative combination of the
// columns.
struct WrenchCone {
  std::vector<std::array<double, 6>> columns;

  static WrenchCone build(const std::vector<Contact>& contacts, const Vec3& com, double mu);
};

struct ConeProjection {
  double residual_norm = 0.0;     // distance from the target to the cone
  Vec3 force_residual;            // unattainable force component
  Vec3 torque_residual;           // unattainable torque component
  std::vector<double> multipliers;
};

// Nonnegative least squares: projects the target wrench onto the cone
// (Lawson-Hanson active set; deterministic). residual == 0 within tolerance
// means the wrench is attainable, i.e. the perturbation is resisted.
ConeProjection project_onto_cone(const WrenchCone& cone, const std::array<double, 6>& target);

inline bool resisted(const ConeProjection& p, const std::array<double, 6>& target) {
  double n2 = 0.0;
  for (double t : target) n2 += t * t;
  return p.residual_norm <= 1e-6 * std::max(1.0, std::sqrt(n2));
}

// Brute-force reference: searches nonnegative combinations over all column
// subsets of size <= 6 (Caratheodory). Exponential in the column count; used
// by tests as the independent oracle.
bool cone_contains_enumerated(const WrenchCone& cone, const std::array<double, 6>& target,
                              double tol = 1e-7);

}  // namespace labo
