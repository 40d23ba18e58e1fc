#include "labo/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "labo/core/errors.hpp"
#include "labo/opt/labo_loop.hpp"

namespace labo {

RunSummary load_run_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaMismatch("cannot read run summary: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch("summary parse error in " + path + ": " + e.what());
  }
  if (j.value("log_version", 0) != 1) {
    throw SchemaMismatch("incompatible log version in " + path);
  }
  RunSummary s;
  s.path = path;
  s.optimizer = j.at("optimizer").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.suite_hash = j.value("suite_hash", "");
  s.fixed_fingers = j.at("config").at("run").at("fixed_fingers").get<int>();
  if (j.contains("train_report")) {
    s.has_reports = true;
    s.train = report_from_json(j.at("train_report"));
    s.test = report_from_json(j.at("test_report"));
  }
  return s;
}

namespace {

TableCell cell_of(const std::vector<double>& values) {
  TableCell c;
  c.n = static_cast<int>(values.size());
  if (values.empty()) return c;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= values.size();
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= values.size();
  c.mean = mean;
  c.stddev = std::sqrt(var);
  return c;
}

// Weighted overall rate recomputed from the type rates so the table identity
// (overall = task-count-weighted mean of the type columns) is exact.
double weighted_overall(const ScoreReport& r) {
  double total = 0.0;
  int n = 0;
  for (int t = 0; t < 3; ++t) {
    total += r.per_type_success_rate[t] * r.type_counts[t];
    n += r.type_counts[t];
  }
  return n > 0 ? total / n : 0.0;
}

ReportRow make_row(const std::string& label, const std::vector<const RunSummary*>& runs) {
  ReportRow row;
  row.label = label;
  std::vector<double> power, pinch, lateral, overall, cost;
  for (const auto* r : runs) {
    power.push_back(r->test.per_type_success_rate[0]);
    pinch.push_back(r->test.per_type_success_rate[1]);
    lateral.push_back(r->test.per_type_success_rate[2]);
    overall.push_back(weighted_overall(r->test));
    cost.push_back(r->test.cost);
  }
  row.power = cell_of(power);
  row.pinch = cell_of(pinch);
  row.lateral = cell_of(lateral);
  row.overall = cell_of(overall);
  row.cost = cell_of(cost);
  return row;
}

std::string fmt_cell(const TableCell& c) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f±%.4f", c.mean, c.stddev);
  return buf;
}

}  // namespace

ReportTables aggregate_runs(const std::vector<RunSummary>& runs) {
  if (runs.empty()) throw Error("report: no runs given");

  ReportTables tables;
  std::map<std::string, std::vector<const RunSummary*>> by_method;
  std::map<int, std::vector<const RunSummary*>> by_fingers;
  for (const auto& r : runs) {
    if (!r.has_reports) continue;
    if (r.fixed_fingers >= 2) {
      by_fingers[r.fixed_fingers].push_back(&r);
    } else {
      by_method[r.optimizer].push_back(&r);
    }
  }

  for (const auto& [method, group] : by_method) {
    tables.methods.push_back(make_row(method, group));

    // Complexity bins on the test split, pooled per method.
    for (const char* bin : {"low", "medium", "high"}) {
      std::vector<double> rates;
      int count = 0;
      for (const auto* r : group) {
        int bin_total = 0, bin_success = 0;
        for (const auto& t : r->test.tasks) {
          if (std::string(to_string(t.bin)) != bin) continue;
          ++bin_total;
          if (t.success) ++bin_success;
        }
        if (bin_total > 0) rates.push_back(static_cast<double>(bin_success) / bin_total);
        count = std::max(count, bin_total);
      }
      BinRow row;
      row.method = method;
      row.bin = bin;
      row.success = cell_of(rates);
      row.task_count = count;
      tables.complexity.push_back(row);
    }
  }
  for (const auto& [fingers, group] : by_fingers) {
    tables.finger_ablation.push_back(make_row(std::to_string(fingers), group));
  }
  return tables;
}

std::string ReportTables::methods_tsv() const {
  std::ostringstream out;
  out << "method\tpower\tpinch\tlateral\toverall\tcost\truns\n";
  for (const auto& row : methods) {
    out << row.label << "\t" << fmt_cell(row.power) << "\t" << fmt_cell(row.pinch) << "\t"
        << fmt_cell(row.lateral) << "\t" << fmt_cell(row.overall) << "\t" << fmt_cell(row.cost)
        << "\t" << row.overall.n << "\n";
  }
  return out.str();
}

std::string ReportTables::complexity_tsv() const {
  std::ostringstream out;
  out << "method\tcomplexity\tsuccess\ttasks\n";
  for (const auto& row : complexity) {
    out << row.method << "\t" << row.bin << "\t" << fmt_cell(row.success) << "\t"
        << row.task_count << "\n";
  }
  return out.str();
}

std::string ReportTables::fingers_tsv() const {
  std::ostringstream out;
  out << "n_fingers\tpower\tpinch\tlateral\toverall\tcost\truns\n";
  for (const auto& row : finger_ablation) {
    out << row.label << "\t" << fmt_cell(row.power) << "\t" << fmt_cell(row.pinch) << "\t"
        << fmt_cell(row.lateral) << "\t" << fmt_cell(row.overall) << "\t" << fmt_cell(row.cost)
        << "\t" << row.overall.n << "\n";
  }
  return out.str();
}

nlohmann::json ReportTables::to_json() const {
  auto cell_json = [](const TableCell& c) {
    return nlohmann::json{{"mean", c.mean}, {"stddev", c.stddev}, {"n", c.n}};
  };
  nlohmann::json methods_j = nlohmann::json::array();
  for (const auto& row : methods) {
    methods_j.push_back({{"method", row.label},
                         {"power", cell_json(row.power)},
                         {"pinch", cell_json(row.pinch)},
                         {"lateral", cell_json(row.lateral)},
                         {"overall", cell_json(row.overall)},
                         {"cost", cell_json(row.cost)}});
  }
  nlohmann::json bins_j = nlohmann::json::array();
  for (const auto& row : complexity) {
    bins_j.push_back({{"method", row.method},
                      {"complexity", row.bin},
                      {"success", cell_json(row.success)},
                      {"tasks", row.task_count}});
  }
  nlohmann::json fingers_j = nlohmann::json::array();
  for (const auto& row : finger_ablation) {
    fingers_j.push_back({{"n_fingers", row.label},
                         {"power", cell_json(row.power)},
                         {"pinch", cell_json(row.pinch)},
                         {"lateral", cell_json(row.lateral)},
                         {"overall", cell_json(row.overall)},
                         {"cost", cell_json(row.cost)}});
  }
  return nlohmann::json{{"log_version", 1},
                        {"methods", methods_j},
                        {"complexity", bins_j},
                        {"finger_ablation", fingers_j}};
}

}  // namespace labo
