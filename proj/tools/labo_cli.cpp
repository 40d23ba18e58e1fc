#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "labo/cli/report.hpp"
#include "labo/core/errors.hpp"
#include "labo/core/hash.hpp"
#include "labo/core/parallel.hpp"
#include "labo/eval/object.hpp"
#include "labo/opt/labo_loop.hpp"
#include "labo/opt/run_config.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::vector<double> read_theta_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw labo::ConfigError("cannot read theta file: " + path);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  return values;
}

void apply_overrides(labo::RunConfig& cfg, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw labo::ConfigError("--set expects section.key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

void print_report_pair(const labo::ScoreReport& train, const labo::ScoreReport& test) {
  auto line = [](const char* split, const labo::ScoreReport& r) {
    std::printf("%-5s  F=%+.4f  cost=%.4f  power=%.3f  pinch=%.3f  lateral=%.3f  overall=%.3f%s\n",
                split, r.F, r.cost, r.per_type_success_rate[0], r.per_type_success_rate[1],
                r.per_type_success_rate[2], r.overall_success_rate,
                r.rejected ? "  [rejected]" : "");
  };
  line("train", train);
  line("test", test);
}

int run_main(const std::string& config_path, const std::vector<std::string>& sets, bool resume) {
  labo::RunConfig cfg;
  if (!config_path.empty()) cfg = labo::load_config_file(config_path);
  apply_overrides(cfg, sets);
  cfg.validate();

  const labo::RunResult result = labo::run(cfg, resume);
  std::printf("run complete: %zu evaluations, best F = %+.4f\n", result.records.size(),
              result.best_F);
  if (!result.best_theta.empty()) {
    print_report_pair(result.train_report, result.test_report);
    std::ofstream theta_out(cfg.out_dir + "/best_theta.txt");
    theta_out.precision(17);
    for (double v : result.best_theta) theta_out << v << "\n";
  }
  std::printf("run log:      %s\n", result.runlog_path.c_str());
  std::printf("summary:      %s\n", result.summary_path.c_str());
  std::printf("curve:        %s\n", result.curve_path.c_str());
  std::printf("content hash: %s\n", labo::hex64(result.content_hash).c_str());
  return 0;
}

int report_main(const std::vector<std::string>& summary_paths, const std::string& out_dir) {
  std::vector<labo::RunSummary> runs;
  for (const auto& p : summary_paths) runs.push_back(labo::load_run_summary(p));
  const labo::ReportTables tables = labo::aggregate_runs(runs);

  fs::create_directories(out_dir);
  const std::string methods_path = out_dir + "/report_methods.tsv";
  std::ofstream(methods_path) << tables.methods_tsv();
  const std::string bins_path = out_dir + "/report_complexity.tsv";
  std::ofstream(bins_path) << tables.complexity_tsv();
  const std::string fingers_path = out_dir + "/report_fingers.tsv";
  std::ofstream(fingers_path) << tables.fingers_tsv();
  const std::string json_path = out_dir + "/report.json";
  std::ofstream(json_path) << tables.to_json().dump(2) << "\n";

  std::cout << tables.methods_tsv();
  if (!tables.finger_ablation.empty()) std::cout << "\n" << tables.fingers_tsv();
  std::printf("wrote %s, %s, %s, %s\n", methods_path.c_str(), bins_path.c_str(),
              fingers_path.c_str(), json_path.c_str());
  return 0;
}

int objects_main(const std::string& kind, int count, std::uint64_t seed,
                 const std::string& out_dir) {
  const auto objects = labo::generate_objects(labo::object_kind_from_string(kind), count, seed);
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    nlohmann::json j = objects[i].to_json();
    j["complexity"] = labo::to_string(labo::complexity_bin(objects[i]));
    j["generator_seed"] = seed;
    const std::string path = out_dir + "/" + objects[i].id + ".json";
    std::ofstream out(path);
    out << j.dump(2) << "\n";
  }
  std::printf("wrote %zu %s manifests to %s\n", objects.size(), kind.c_str(), out_dir.c_str());
  return 0;
}

int suite_main(int n_tasks, std::uint64_t seed, const std::string& out_path) {
  const labo::TaskSuite suite = labo::TaskSuite::procedural(n_tasks, seed);
  suite.save(out_path);
  std::printf("wrote suite manifest %s (%d train + %d test tasks, hash %s)\n", out_path.c_str(),
              suite.count(false), suite.count(true), labo::hex64(suite.content_hash()).c_str());
  return 0;
}

int eval_main(const std::string& theta_path, const std::string& suite_path,
              const std::vector<std::string>& sets) {
  labo::RunConfig cfg;
  apply_overrides(cfg, sets);
  labo::ParamVector theta(read_theta_file(theta_path));
  const labo::TaskSuite suite = suite_path.empty()
                                    ? labo::TaskSuite::procedural(cfg.n_tasks, cfg.suite_seed)
                                    : labo::TaskSuite::load(suite_path);
  const auto [train, test] =
      labo::evaluate_design(theta, suite, cfg.suite_seed, labo::score_params_from(cfg));
  print_report_pair(train, test);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint hand-morphology and grasp-control optimization"};
  app.require_subcommand(1);

  bool serial = false;
  app.add_flag("--serial", serial, "disable the OpenMP kernels (serial reference path)");

  // run
  auto* run_cmd = app.add_subcommand("run", "execute an optimization run from a config file");
  std::string config_path;
  std::vector<std::string> run_sets;
  bool resume = false;
  run_cmd->add_option("--config", config_path, "key-value config file");
  run_cmd->add_option("--set", run_sets, "override: section.key=value (repeatable)");
  run_cmd->add_flag("--resume", resume, "resume from the checkpoint in run.out_dir");
  std::string optimizer_flag, out_flag, suite_flag;
  long long seed_flag = -1, budget_flag = -1;
  run_cmd->add_option("--optimizer", optimizer_flag, "labo|raw_bo|cmaes|uniform");
  run_cmd->add_option("--seed", seed_flag, "root seed");
  run_cmd->add_option("--budget", budget_flag, "score-function evaluations");
  run_cmd->add_option("--out", out_flag, "output directory");
  run_cmd->add_option("--suite", suite_flag, "suite manifest path");

  // report
  auto* report_cmd = app.add_subcommand("report", "aggregate run summaries into tables");
  std::vector<std::string> report_paths;
  std::string report_out = "reports";
  report_cmd->add_option("summaries", report_paths, "summary.json paths")->required();
  report_cmd->add_option("--out", report_out, "output directory");

  // objects
  auto* objects_cmd = app.add_subcommand("objects", "generate benchmark object manifests");
  std::string obj_kind = "sphere";
  int obj_count = 10;
  long long obj_seed = 0;
  std::string obj_out = "objects";
  objects_cmd->add_option("--kind", obj_kind, "sphere|box|thin-plate|convex-poly");
  objects_cmd->add_option("--count", obj_count, "number of objects");
  objects_cmd->add_option("--seed", obj_seed, "generator seed");
  objects_cmd->add_option("--out", obj_out, "output directory");

  // suite
  auto* suite_cmd = app.add_subcommand("suite", "generate a task-suite manifest");
  int suite_tasks = 160;
  long long suite_seed = 12345;
  std::string suite_out = "suite.json";
  suite_cmd->add_option("--n-tasks", suite_tasks, "train tasks (test split mirrors it)");
  suite_cmd->add_option("--seed", suite_seed, "suite seed");
  suite_cmd->add_option("--out", suite_out, "manifest path");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score a stored design on a suite");
  std::string theta_path, eval_suite;
  std::vector<std::string> eval_sets;
  eval_cmd->add_option("theta", theta_path, "file with 185 reals in [0,1], one per line")
      ->required();
  eval_cmd->add_option("--suite", eval_suite, "suite manifest path");
  eval_cmd->add_option("--set", eval_sets, "config override: section.key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  labo::set_parallel_enabled(!serial);

  try {
    if (run_cmd->parsed()) {
      std::vector<std::string> sets = run_sets;
      if (!optimizer_flag.empty()) sets.push_back("run.optimizer=" + optimizer_flag);
      if (seed_flag >= 0) sets.push_back("run.seed=" + std::to_string(seed_flag));
      if (budget_flag >= 0) sets.push_back("run.budget=" + std::to_string(budget_flag));
      if (!out_flag.empty()) sets.push_back("run.out_dir=" + out_flag);
      if (!suite_flag.empty()) sets.push_back("run.suite_manifest=" + suite_flag);
      return run_main(config_path, sets, resume);
    }
    if (report_cmd->parsed()) return report_main(report_paths, report_out);
    if (objects_cmd->parsed()) {
      return objects_main(obj_kind, obj_count, static_cast<std::uint64_t>(obj_seed), obj_out);
    }
    if (suite_cmd->parsed()) {
      return suite_main(suite_tasks, static_cast<std::uint64_t>(suite_seed), suite_out);
    }
    if (eval_cmd->parsed()) {
      return eval_main(theta_path, eval_suite, eval_sets);
    }
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const labo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const labo::SchemaMismatch& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
