#include "labo/eval/episode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "labo/core/errors.hpp"
#include "labo/core/rng.hpp"

namespace labo {

double step_reward(const StepState& s, GraspType type) {
  const double d_pos = std::min(s.pos_offset, 2.0);
  const double d_orn = std::min(s.orn_offset, 2.0);
  switch (type) {
    case GraspType::kPower:
    case GraspType::kPinch:
      return -0.01 * s.self_collision + 0.1 * s.contact_ratio - 0.1 * d_pos;
    case GraspType::kLateral:
      return -0.01 * s.self_collision + 0.1 * s.contact_ratio - 0.05 * d_pos - 0.05 * d_orn;
  }
  return 0.0;
}

namespace {

const std::array<Vec3, 8> kPerturbDirections = [] {
  std::array<Vec3, 8> d{};
  for (int i = 0; i < 8; ++i) {
    const double phi = 2.0 * 3.14159265358979323846 * i / 8.0;
    d[i] = {std::cos(phi), std::sin(phi), 0.0};
  }
  return d;
}();

bool vicinity_check(GraspType type, const Vec3& dpos, double d_orn) {
  switch (type) {
    case GraspType::kPower:
      return std::fabs(dpos.x) <= 3.0 && std::fabs(dpos.y) <= 3.0 && std::fabs(dpos.z) <= 1.0;
    case GraspType::kPinch:
      return dpos.z >= 0.05 && std::fabs(dpos.x) <= 2.0 && std::fabs(dpos.y) <= 2.0;
    case GraspType::kLateral:
      return d_orn < 2.5 && std::fabs(dpos.x) <= 3.0 && std::fabs(dpos.y) <= 3.0 &&
             std::fabs(dpos.z) <= 0.3;
  }
  return false;
}

// Adjacency for the self-collision rule: consecutive links of one finger
// (the fingertip is adjacent to the last segment).
bool links_adjacent(const HandLink& a, const HandLink& b) {
  return a.finger == b.finger && std::abs(a.link_index - b.link_index) <= 1;
}

bool links_overlap(const HandLink& a, const HandLink& b) {
  const ClosestPair c = closest_segment_segment(a.a, a.b, b.a, b.b);
  return c.distance < a.radius + b.radius;
}

struct FingerBound {
  Vec3 center;
  double radius = 0.0;
};

}  // namespace

PerturbationOutcome perturbation_test(const GraspState& grasp, GraspType type,
                                      std::uint64_t seed, const EpisodeParams& params) {
  PerturbationOutcome out;
  RngStream rng = derive_stream(seed, "perturbation");

  const WrenchCone cone = WrenchCone::build(grasp.contacts, grasp.com, grasp.mu);
  const double weight = grasp.object_mass * params.gravity;

  // Support check: can the contacts balance gravity alone?
  const std::array<double, 6> grav_req{0.0, 0.0, weight, 0.0, 0.0, 0.0};
  const ConeProjection grav_proj = project_onto_cone(cone, grav_req);
  out.supported = resisted(grav_proj, grav_req);
  out.lift = (type == GraspType::kPinch && out.supported) ? params.lift_height : 0.0;

  const double denom_lin = params.stiffness * grasp.displacement_gain;
  const double denom_rot = params.rot_stiffness * grasp.displacement_gain;

  for (int d = 0; d < 8; ++d) {
    const double mag = rng.uniform(params.perturb_lo, params.perturb_hi);
    out.magnitudes[d] = mag;
    const Vec3 dir = kPerturbDirections[d];
    // Balancing wrench the contacts must supply: minus (gravity + push).
    const std::array<double, 6> req{-mag * dir.x, -mag * dir.y, weight, 0.0, 0.0, 0.0};
    const ConeProjection proj = project_onto_cone(cone, req);
    out.resisted[d] = resisted(proj, req);

    // The unattainable part moves the object: net unbalanced force is the
    // negated residual.
    Vec3 disp = (-1.0 / denom_lin) * proj.force_residual;
    disp.z += out.lift;
    const double rot = norm(proj.torque_residual) / denom_rot;
    out.displacements[d] = disp;
    out.rotations[d] = rot;
    const bool ok = vicinity_check(type, disp, rot);
    out.vicinity_flags[d] = ok;
    if (ok) ++out.survived;
  }
  return out;
}

EpisodeResult simulate_episode(const HandMorphology& morph, const ControlPlan& plan,
                               const GraspTask& task, std::uint64_t seed,
                               const EpisodeParams& params) {
  const HandModel model = HandModel::build(morph, task.type, task.object);
  HandState hand(model);
  const TypeCommands& cmd = plan.commands(task.type);
  const Pose obj_pose = model.object_start;
  const ObjectModel& obj = task.object;
  const double obj_bound = obj.bounding_radius();

  const int n_links = static_cast<int>(hand.links().size());
  std::vector<char> link_contact(n_links, 0);

  // Step-0 self-intersection means the mount layout produced an impossible
  // hand; the caller scores it as a failure.
  {
    const auto& links = hand.links();
    for (int i = 0; i < n_links; ++i) {
      for (int j = i + 1; j < n_links; ++j) {
        if (links_adjacent(links[i], links[j])) continue;
        if (links_overlap(links[i], links[j])) {
          throw GeometryError("hand links overlap at step 0");
        }
      }
    }
  }

  EpisodeResult result;
  result.contact_ratio_trace.reserve(params.closing_steps);

  const int n_fingers = morph.n_fingers;
  std::vector<FingerBound> bounds(n_fingers);
  auto refresh_bounds = [&]() {
    for (int f = 0; f < n_fingers; ++f) bounds[f] = FingerBound{};
    std::vector<int> counts(n_fingers, 0);
    for (const auto& l : hand.links()) {
      bounds[l.finger].center += 0.5 * (l.a + l.b);
      counts[l.finger]++;
    }
    for (int f = 0; f < n_fingers; ++f) {
      if (counts[f] > 0) bounds[f].center = bounds[f].center / counts[f];
    }
    for (const auto& l : hand.links()) {
      auto& b = bounds[l.finger];
      const double r = std::max(norm(l.a - b.center), norm(l.b - b.center)) + l.radius;
      b.radius = std::max(b.radius, r);
    }
  };

  auto evaluate_state = [&](double* c_s, double* r_o) {
    const auto& links = hand.links();
    refresh_bounds();

    bool self_collision = false;
    for (int fi = 0; fi < n_fingers && !self_collision; ++fi) {
      for (int fj = fi; fj < n_fingers && !self_collision; ++fj) {
        if (fi != fj &&
            norm(bounds[fi].center - bounds[fj].center) > bounds[fi].radius + bounds[fj].radius) {
          continue;
        }
        for (int i = 0; i < n_links && !self_collision; ++i) {
          if (links[i].finger != fi) continue;
          for (int j = (fi == fj ? i + 1 : 0); j < n_links; ++j) {
            if (links[j].finger != fj) continue;
            if (links_adjacent(links[i], links[j])) continue;
            if (links_overlap(links[i], links[j])) {
              self_collision = true;
              break;
            }
          }
        }
      }
    }

    int tips_in_contact = 0;
    for (int i = 0; i < n_links; ++i) {
      const auto& l = hand.links()[i];
      // Cheap reject: link far outside the object's bounding sphere.
      const double coarse = norm(0.5 * (l.a + l.b) - obj_pose.position) -
                            0.5 * norm(l.b - l.a) - l.radius - obj_bound;
      bool touching = false;
      if (coarse <= params.contact_tol) {
        const ClosestPair cp = object_distance(obj, obj_pose, l.a, l.b);
        touching = cp.distance - l.radius <= params.contact_tol;
      }
      if (touching) {
        if (!link_contact[i]) {
          link_contact[i] = 1;
          hand.freeze_through(l.finger, l.link_index);
        }
        if (l.is_tip) ++tips_in_contact;
      }
    }
    *c_s = self_collision ? 1.0 : 0.0;
    *r_o = static_cast<double>(tips_in_contact) / static_cast<double>(n_fingers);
  };

  // Closing phase. Once the hand reaches steady state (all joints frozen or
  // commanded still) the per-step quantities repeat; they are still summed
  // step by step.
  double c_s = 0.0, r_o = 0.0;
  bool steady = false;
  for (int t = 0; t < params.closing_steps; ++t) {
    if (!steady) evaluate_state(&c_s, &r_o);
    const double r = params.reward_variant == RewardVariant::kV1
                         ? (-0.01 * c_s + 0.01 * r_o)
                         : step_reward({c_s, r_o, 0.0, 0.0}, task.type);
    result.episodic_reward += r;
    result.contact_ratio_trace.push_back(r_o);
    if (c_s > 0.0) ++result.self_collision_steps;
    if (!steady) {
      const bool moved = hand.integrate(cmd, params.dt);
      if (!moved) steady = true;
    }
  }

  // Contact set at the end of closing: every link within tolerance plus the
  // palm when the object rests on it.
  GraspState grasp;
  grasp.type = task.type;
  grasp.com = obj_pose.position;
  grasp.mu = morph.lateral_friction / 5.0;  // [1,5] -> [0.2,1.0]
  grasp.object_mass = obj.mass;
  // Effort scales how stiffly the grasp opposes unresisted pushes.
  grasp.displacement_gain = morph.joint_effort / 40000.0;  // [0.0125, 0.1]
  grasp.object_char_length = std::max(0.1, obj_bound);

  for (const auto& l : hand.links()) {
    const double coarse = norm(0.5 * (l.a + l.b) - obj_pose.position) -
                          0.5 * norm(l.b - l.a) - l.radius - obj_bound;
    if (coarse > params.contact_tol) continue;
    const ClosestPair cp = object_distance(obj, obj_pose, l.a, l.b);
    if (cp.distance - l.radius <= params.contact_tol) {
      Vec3 n = cp.on_b - cp.on_a;
      if (norm(n) < 1e-9) n = obj_pose.position - 0.5 * (l.a + l.b);
      n = normalized(n);
      const Vec3 point = cp.on_a + l.radius * n;
      grasp.contacts.push_back({point, n});
    }
  }
  {
    // Palm contact (power grasps rest the object on it).
    const ConvexCore palm = palm_disk(model);
    const ConvexCore oc = object_core(obj, obj_pose);
    ClosestPair cp;
    if (obj.kind == ObjectKind::kSphere) {
      cp = gjk_closest(palm, ConvexCore::point(obj_pose.position));
      cp.distance = std::max(0.0, cp.distance - obj.radius);
    } else if (obj.kind == ObjectKind::kTriMesh) {
      cp.distance = std::numeric_limits<double>::infinity();
      for (const auto& v : obj.mesh.vertices) {
        // Mesh-palm: vertex query is enough for resting contact.
        Vec3 w{obj_pose.position.x + v.x, obj_pose.position.y + v.y, obj_pose.position.z + v.z};
        const ClosestPair r = gjk_closest(palm, ConvexCore::point(w));
        if (r.distance < cp.distance) cp = r;
      }
    } else {
      cp = gjk_closest(palm, oc);
    }
    if (cp.distance <= params.contact_tol) {
      Vec3 n = model.ez;  // palm presses along its normal
      grasp.contacts.push_back({cp.on_a, n});
    }
  }

  const PerturbationOutcome perturb = perturbation_test(grasp, task.type, seed, params);
  result.perturbation_survived = perturb.survived;
  result.vicinity_flags = perturb.vicinity_flags;
  result.success = perturb.survived == 8;

  // Perturbation-phase reward: 100 steps per direction at the displaced
  // pose. The v1 variant uses the per-step perturbation bonus instead.
  for (int d = 0; d < 8; ++d) {
    const Vec3 disp = perturb.displacements[d];
    const double d_pos = norm(disp);
    const double d_orn = perturb.rotations[d];
    double r;
    if (params.reward_variant == RewardVariant::kV1) {
      const double iv = perturb.vicinity_flags[d] ? 1.0 : 0.0;
      r = iv * (perturb.magnitudes[d] * 1e-5) - 0.05 * (1.0 - iv) + r_o * 1e-5;
    } else {
      r = step_reward({c_s, r_o, d_pos, d_orn}, task.type);
    }
    for (int t = 0; t < params.perturb_steps_per_direction; ++t) {
      result.episodic_reward += r;
    }
  }
  return result;
}

}  // namespace labo
