#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "labo/eval/score.hpp"
#include "labo/eval/suite.hpp"
#include "labo/opt/run_config.hpp"

namespace labo {

// One evaluated design in the BO dataset Q. f is the latent coordinate the
// surrogate sees; encoder_version tracks staleness (fine-tuning moves the
// encoder, so Q is re-encoded before each refit).
struct BOEntry {
  std::vector<double> f;
  double F = 0.0;
  std::vector<double> theta;
  std::vector<double> p;
  int encoder_version = 0;
};

struct BODataset {
  std::vector<BOEntry> entries;
  int encoder_version = 0;
};

// One score-function evaluation as logged (one line of runlog.jsonl).
struct EvalRecord {
  int iteration = 0;
  std::vector<double> theta;
  std::vector<double> f;  // latent proposal (labo only)
  double F = 0.0;
  double cost = 0.0;
  bool rejected = false;
  std::vector<std::uint8_t> p;
  double best_F = 0.0;
  double best_success = 0.0;
  double wall_ms = 0.0;  // volatile: excluded from the content hash
};

struct RunResult {
  RunConfig config;
  std::vector<EvalRecord> records;
  nlohmann::json pretrain_record;  // null for baselines
  std::vector<double> best_theta;
  double best_F = 0.0;
  ScoreReport train_report;
  ScoreReport test_report;
  std::string runlog_path;
  std::string summary_path;
  std::string curve_path;
  std::uint64_t content_hash = 0;
};

ScoreParams score_params_from(const RunConfig& cfg);

// Success rates and cost on both splits for one design; the row format of
// the result tables.
std::pair<ScoreReport, ScoreReport> evaluate_design(const ParamVector& theta,
                                                    const TaskSuite& suite, std::uint64_t seed,
                                                    const ScoreParams& params);

nlohmann::json report_to_json(const ScoreReport& report);
ScoreReport report_from_json(const nlohmann::json& j);

// Hash over the canonical run-log records with volatile fields removed;
// identical config + seed must reproduce it bit-exactly.
std::uint64_t runlog_content_hash(const std::vector<nlohmann::json>& records);

// Executes the configured optimizer end to end: pretraining (labo), the
// evaluation loop, per-iteration logging, checkpoints, and the final
// train/test report of the best design. resume=true continues from the
// checkpoint directory inside cfg.out_dir.
RunResult run(const RunConfig& cfg, bool resume = false);

}  // namespace labo
