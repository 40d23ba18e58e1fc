#include "labo/eval/score.hpp"

#include <cmath>

#include "labo/core/errors.hpp"
#include "labo/core/parallel.hpp"
#include "labo/core/rng.hpp"

namespace labo {

double ScoreReport::recompute_F(double cost_weight) const {
  double sum = 0.0;
  for (double r : per_task_rewards) sum += r;
  const double mean = per_task_rewards.empty() ? 0.0 : sum / per_task_rewards.size();
  return mean - cost_weight * cost;
}

ScoreReport score(const ParamVector& theta, const TaskSuite& suite, bool test_split,
                  std::uint64_t seed, const ScoreParams& params) {
  const auto idx = suite.indices(test_split);
  const std::size_t n = idx.size();

  ScoreReport report;
  report.p.assign(n, 0);
  report.per_task_rewards.assign(n, 0.0);
  report.tasks.resize(n);

  const DecodeResult decoded = decode(theta, DesignLayout::standard(), params.control_mode);
  if (std::holds_alternative<Rejection>(decoded)) {
    report.rejected = true;
    report.F = params.score_floor;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& t = suite.tasks[idx[i]];
      report.tasks[i] = {t.type, complexity_bin(t.object), 0.0, false, 0};
      report.type_counts[static_cast<int>(t.type)]++;
    }
    return report;
  }

  const auto& hand = std::get<DecodedHand>(decoded);
  report.cost = morphology_cost(hand.morphology);

  parallel_for(n, [&](std::size_t i) {
    const GraspTask& task = suite.tasks[idx[i]];
    const std::uint64_t episode_seed =
        derive_seed(seed, "episode", static_cast<std::uint64_t>(idx[i])) ^ task.seed;
    TaskOutcome out;
    out.type = task.type;
    out.bin = complexity_bin(task.object);
    try {
      const EpisodeResult ep =
          simulate_episode(hand.morphology, hand.plan, task, episode_seed, params.episode);
      out.reward = ep.episodic_reward;
      out.success = ep.success;
      out.survived = ep.perturbation_survived;
    } catch (const GeometryError&) {
      // Impossible hand for this pose: scored failure, not a crash.
      out.reward = 0.0;
      out.success = false;
      out.survived = 0;
    }
    report.tasks[i] = out;
    report.per_task_rewards[i] = out.reward;
    report.p[i] = out.success ? 1 : 0;
  });

  std::array<int, 3> success_counts{};
  for (std::size_t i = 0; i < n; ++i) {
    const int t = static_cast<int>(report.tasks[i].type);
    report.type_counts[t]++;
    if (report.p[i]) success_counts[t]++;
  }
  int total_success = 0;
  for (int t = 0; t < 3; ++t) {
    report.per_type_success_rate[t] =
        report.type_counts[t] > 0
            ? static_cast<double>(success_counts[t]) / report.type_counts[t]
            : 0.0;
    total_success += success_counts[t];
  }
  report.overall_success_rate = n > 0 ? static_cast<double>(total_success) / n : 0.0;
  report.F = report.recompute_F(params.cost_weight);
  return report;
}

}  // namespace labo
