#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "labo/design/layout.hpp"
#include "labo/eval/episode.hpp"
#include "labo/eval/suite.hpp"

namespace labo {

struct ScoreParams {
  double cost_weight = 0.1;
  double score_floor = -1.0;  // score of rejected designs
  ControlMode control_mode = ControlMode::kVelocity;
  EpisodeParams episode;
};

struct TaskOutcome {
  GraspType type = GraspType::kPower;
  ComplexityBin bin = ComplexityBin::kLow;
  double reward = 0.0;
  bool success = false;
  int survived = 0;
};

struct ScoreReport {
  double F = 0.0;
  double cost = 0.0;
  bool rejected = false;
  std::vector<double> per_task_rewards;
  std::vector<std::uint8_t> p;  // success bits, one per task in suite order
  std::array<double, 3> per_type_success_rate{};
  std::array<int, 3> type_counts{};
  double overall_success_rate = 0.0;
  std::vector<TaskOutcome> tasks;

  // F from its parts; matches the F field to ~1e-12 for evaluated designs.
  double recompute_F(double cost_weight = 0.1) const;
};

// Evaluates every task of one split (episodes run in parallel into disjoint
// slots). Rejected designs score the configured floor with an all-zero p;
// per-episode GeometryError scores that task as a zero-reward failure.
ScoreReport score(const ParamVector& theta, const TaskSuite& suite, bool test_split,
                  std::uint64_t seed, const ScoreParams& params = {});

}  // namespace labo
