#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "labo/eval/score.hpp"

namespace labo {

struct RunSummary {
  std::string path;
  std::string optimizer;
  std::uint64_t seed = 0;
  int fixed_fingers = 0;
  std::string suite_hash;
  bool has_reports = false;
  ScoreReport train;
  ScoreReport test;
};

// Reads a run's summary.json; throws SchemaMismatch on missing or
// incompatible versions.
RunSummary load_run_summary(const std::string& path);

struct TableCell {
  double mean = 0.0;
  double stddev = 0.0;  // population stddev over seeds
  int n = 0;
};

struct ReportRow {
  std::string label;
  TableCell power, pinch, lateral, overall, cost;
};

struct BinRow {
  std::string method;
  std::string bin;
  TableCell success;
  int task_count = 0;
};

struct ReportTables {
  std::vector<ReportRow> methods;       // one row per optimizer
  std::vector<BinRow> complexity;       // method x complexity bin
  std::vector<ReportRow> finger_ablation;  // runs tagged fixed_fingers

  std::string methods_tsv() const;
  std::string complexity_tsv() const;
  std::string fingers_tsv() const;
  nlohmann::json to_json() const;
};

// Aggregates run summaries over seeds; success-rate columns use the test
// split. Overall cells are the task-count-weighted mean of the type cells.
ReportTables aggregate_runs(const std::vector<RunSummary>& runs);

}  // namespace labo
