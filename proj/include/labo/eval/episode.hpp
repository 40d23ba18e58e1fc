#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "labo/design/decode.hpp"
#include "labo/eval/hand.hpp"
#include "labo/eval/suite.hpp"
#include "labo/eval/wrench.hpp"

namespace labo {

enum class RewardVariant { kIcra, kV1 };

struct EpisodeParams {
  int closing_steps = 2000;
  int perturb_steps_per_direction = 100;  // x 8 directions
  double dt = 1.0 / 240.0;
  double contact_tol = 0.02;
  double stiffness = 500.0;       // force / length, translation of unresisted force
  double rot_stiffness = 200.0;   // torque / rad
  double gravity = 10.0;          // force per unit mass
  double lift_height = 0.1;       // pinch lift when the grasp supports the weight
  double perturb_lo = 500.0;
  double perturb_hi = 1000.0;
  RewardVariant reward_variant = RewardVariant::kIcra;
};

// Inputs of the per-step reward. Displacements are capped at 2.0 units
// inside step_reward, which bounds the reward in [-0.21, 0.1].
struct StepState {
  double self_collision = 0.0;  // c_s in {0, 1}
  double contact_ratio = 0.0;   // r_o in [0, 1], fingertips touching / total
  double pos_offset = 0.0;      // d_pos >= 0
  double orn_offset = 0.0;      // d_orn >= 0 (radians)
};

double step_reward(const StepState& s, GraspType type);

struct EpisodeResult {
  double episodic_reward = 0.0;
  bool success = false;
  std::vector<double> contact_ratio_trace;  // one entry per closing step
  int self_collision_steps = 0;
  int perturbation_survived = 0;  // out of 8
  std::array<bool, 8> vicinity_flags{};
};

// State of the hand/object system after the closing phase; the perturbation
// test operates on this snapshot.
struct GraspState {
  GraspType type = GraspType::kPower;
  std::vector<Contact> contacts;  // hand-object contacts incl. the palm
  Vec3 com;                       // object center of mass (world)
  double mu = 0.0;                // Coulomb coefficient, lateral_friction/5
  double object_mass = 1.0;
  double displacement_gain = 1.0;  // effort-scaled, see episode.cpp
  double object_char_length = 1.0;
};

struct PerturbationOutcome {
  int survived = 0;
  std::array<bool, 8> vicinity_flags{};
  std::array<bool, 8> resisted{};       // wrench-feasibility verdict per direction
  std::array<double, 8> magnitudes{};   // drawn forces
  std::array<Vec3, 8> displacements{};  // object displacement per direction
  std::array<double, 8> rotations{};    // d_orn per direction
  bool supported = false;               // grasp holds the weight at rest
  double lift = 0.0;
};

// Eight planar compass directions, magnitudes drawn from the seeded stream.
// A direction is resisted iff the balancing wrench lies in the contact cone;
// unresisted residuals displace the object and the grasp-type vicinity check
// decides survival.
PerturbationOutcome perturbation_test(const GraspState& grasp, GraspType type,
                                      std::uint64_t seed, const EpisodeParams& params = {});

// Quasi-static closing episode: 2000 kinematic steps at dt = 1/240 with
// contact/limit freezing, per-step rewards, then the perturbation test.
// Deterministic given (inputs, seed). Throws GeometryError if the hand
// self-intersects at step 0.
EpisodeResult simulate_episode(const HandMorphology& morph, const ControlPlan& plan,
                               const GraspTask& task, std::uint64_t seed,
                               const EpisodeParams& params = {});

}  // namespace labo
